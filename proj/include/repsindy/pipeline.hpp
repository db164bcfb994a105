#ifndef REPSINDY_PIPELINE_HPP_
#define REPSINDY_PIPELINE_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>
#include "repsindy/config.hpp"
#include "repsindy/errors.hpp"
#include "repsindy/evaluation.hpp"
#include "repsindy/game_models.hpp"
#include "repsindy/io.hpp"
#include "repsindy/sindy.hpp"
#include "repsindy/trajectory.hpp"

namespace repsindy {

/// Random start for `game`: uniform on each population's simplex.
inline InitialState sample_initial_state(const PayoffGame& game, std::uint64_t seed) {
  if (game.symmetric()) return sample_simplex(game.row_strategies(), seed);
  return BipopulationState{sample_simplex(game.row_strategies(), seed),
                           sample_simplex(game.col_strategies(), detail::DeriveSeed(seed, 1))};
}

inline InitialState initial_state_from_vector(const PayoffGame& game,
                                              const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != game.state_dimension())
    throw ConfigError("initial state has " + std::to_string(values.size()) +
                      " entries, game needs " + std::to_string(game.state_dimension()));
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                        static_cast<Eigen::Index>(values.size()));
  if (game.symmetric()) return SimplexPoint(v);
  const int m = game.row_strategies();
  return BipopulationState{SimplexPoint(v.head(m)),
                           SimplexPoint(v.tail(game.col_strategies()))};
}

/// Simulates the configured trajectory plan. Trajectory i starts from a state
/// drawn with stream 2i of `seed` and receives noise from stream 2i+1. Exact
/// derivatives are attached (before noise) when the config asks for them.
inline std::vector<Trajectory> generate_trajectories(const ExperimentConfig& cfg) {
  const PayoffGame& game = cfg.RequireGame();
  const auto& plan = cfg.trajectories;
  std::vector<Trajectory> out;
  for (int i = 0; i < plan.count; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const InitialState x0 =
        plan.initial_conditions.empty()
            ? sample_initial_state(game, detail::DeriveSeed(plan.seed, 2 * k))
            : initial_state_from_vector(game, plan.initial_conditions[static_cast<std::size_t>(i)]);
    Trajectory t = simulate(game, x0, plan.t_end, plan.h);
    t.meta.seed = plan.seed;
    if (cfg.derivatives == DerivativeSource::Exact) t = exact_derivatives(game, std::move(t));
    t = add_noise(std::move(t), {plan.noise_sigma, detail::DeriveSeed(plan.seed, 2 * k + 1)});
    out.push_back(std::move(t));
  }
  return out;
}

/// Makes sure every trajectory carries the derivative matrix the config asks
/// for: finite differences are always recomputed from the states; exact
/// derivatives come from the file or, failing that, from the configured game.
inline std::vector<Trajectory> prepare_derivatives(const ExperimentConfig& cfg,
                                                   std::vector<Trajectory> trajs) {
  for (auto& t : trajs) {
    t.meta.noise_sigma = cfg.trajectories.noise_sigma;
    if (cfg.derivatives == DerivativeSource::FiniteDifference) {
      t = finite_difference_derivatives(std::move(t));
    } else if (!t.derivatives) {
      if (!cfg.game)
        throw MissingDerivatives(
            "trajectory has no derivative columns and no game is configured for exact "
            "derivatives");
      t = exact_derivatives(*cfg.game, std::move(t));
    }
  }
  return trajs;
}

struct IdentifyResult {
  SparseModel model;
  std::optional<EnsembleModel> ensemble;
};

inline IdentifyResult identify(const ExperimentConfig& cfg, const std::vector<Trajectory>& trajs) {
  const DataMatrices data = assemble_data(trajs);
  const auto n = static_cast<int>(data.x.cols());
  const FeatureLibrary library(n, cfg.library_degree, cfg.library_trig);
  FitOptions opts;
  opts.stlsq.threshold = cfg.fit.threshold;
  opts.stlsq.max_iter = cfg.fit.max_iter;
  opts.stlsq.rank_tolerance = cfg.fit.rank_tolerance;
  opts.stlsq.normalize_columns = cfg.fit.normalize_columns;
  opts.constraint_blocks = cfg.ResolveBlocks(n);
  IdentifyResult out;
  if (cfg.fit.ensemble.enabled) {
    EnsembleOptions ens;
    ens.n_models = cfg.fit.ensemble.n_models;
    ens.subsample_fraction = cfg.fit.ensemble.subsample_fraction;
    ens.inclusion_threshold = cfg.fit.ensemble.inclusion_threshold;
    ens.seed = cfg.trajectories.seed;
    out.ensemble = ensemble_fit(data, library, opts, ens);
    out.model = out.ensemble->model;
  } else {
    out.model = fit(data, library, opts);
  }
  return out;
}

inline std::vector<std::string> default_state_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

inline std::vector<std::string> state_names(const ExperimentConfig& cfg, int n) {
  if (cfg.game && cfg.game->state_dimension() == n) return cfg.game->state_names();
  return default_state_names(n);
}

inline nlohmann::json model_document(const ExperimentConfig& cfg, const IdentifyResult& r) {
  nlohmann::json doc =
      model_to_json(r.model, r.ensemble ? &*r.ensemble : nullptr);
  const auto names = state_names(cfg, r.model.n_states());
  doc["state_names"] = names;
  doc["equations"] = render_equations(r.model, names);
  doc["config"] = cfg.ToJson();
  return doc;
}

/// Scores `model` against the configured game's exact replicator system.
inline IdentificationReport evaluate(const ExperimentConfig& cfg, const SparseModel& model,
                                     const nlohmann::json& model_config = nullptr) {
  const PayoffGame& game = cfg.RequireGame();
  if (model.n_states() != game.state_dimension())
    throw DimensionError("model has " + std::to_string(model.n_states()) +
                         " states, game has " + std::to_string(game.state_dimension()));
  const SparseModel truth = ground_truth_coefficients(game, model.library);
  const SupportMetrics s = support_metrics(model, truth);
  const CoefficientError e = coefficient_error(model, truth);
  const InitialState x0 = cfg.evaluation.x0.empty()
                              ? sample_initial_state(game, cfg.evaluation.seed)
                              : initial_state_from_vector(game, cfg.evaluation.x0);
  const ForecastResult f = forecast(model, game, x0, cfg.evaluation.t_end, cfg.evaluation.h);

  IdentificationReport r;
  r.support_precision = s.precision;
  r.support_recall = s.recall;
  r.support_f1 = s.f1;
  r.coeff_max_abs_error = e.max_abs;
  r.coeff_rms_error = e.rms;
  r.forecast_rmse = f.rmse;
  r.forecast_diverged_at = f.diverged_at;
  r.equations = render_equations(model, game.state_names());
  r.config = cfg.ToJson();
  if (!model_config.is_null()) r.config["model_config"] = model_config;
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCell {
  int index = 0;
  int n_trajectories = 1;
  int samples_per_trajectory = 0;
  double noise_sigma = 0.0;
  double threshold = 0.0;
  DerivativeSource derivative_source = DerivativeSource::Exact;
  std::uint64_t seed = 0;
  IdentificationReport report;
};

/// Config of one grid cell: the base config with the cell's axis values and
/// seed = master seed + cell index.
inline ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
  ExperimentConfig c = base;
  c.sweep = SweepSpec{};
  c.trajectories.count = cell.n_trajectories;
  c.trajectories.t_end = static_cast<double>(cell.samples_per_trajectory - 1) * base.trajectories.h;
  c.trajectories.noise_sigma = cell.noise_sigma;
  c.trajectories.seed = cell.seed;
  c.trajectories.initial_conditions.clear();
  c.fit.threshold = cell.threshold;
  c.derivatives = cell.derivative_source;
  return c;
}

inline std::vector<SweepCell> sweep_grid(const ExperimentConfig& cfg) {
  const auto& sw = cfg.sweep;
  if (!sw.present ||
      (sw.n_trajectories.empty() && sw.samples_per_trajectory.empty() && sw.noise_sigma.empty() &&
       sw.threshold.empty() && sw.derivative_source.empty()))
    throw ConfigError("sweep needs at least one grid axis");
  const int base_samples =
      static_cast<int>(sample_count(cfg.trajectories.t_end, cfg.trajectories.h));
  auto or_base = [](auto axis, auto base) {
    if (axis.empty()) axis.push_back(base);
    return axis;
  };
  const auto nt = or_base(sw.n_trajectories, cfg.trajectories.count);
  const auto ns = or_base(sw.samples_per_trajectory, base_samples);
  const auto sg = or_base(sw.noise_sigma, cfg.trajectories.noise_sigma);
  const auto th = or_base(sw.threshold, cfg.fit.threshold);
  const auto ds = or_base(sw.derivative_source, cfg.derivatives);
  std::vector<SweepCell> cells;
  auto add = [&](int a, int b, double c, double d, DerivativeSource e) {
    SweepCell cell;
    cell.index = static_cast<int>(cells.size());
    cell.n_trajectories = a;
    cell.samples_per_trajectory = b;
    cell.noise_sigma = c;
    cell.threshold = d;
    cell.derivative_source = e;
    cell.seed = cfg.trajectories.seed + static_cast<std::uint64_t>(cell.index);
    cells.push_back(cell);
  };
  if (sw.zip) {
    const std::size_t len =
        std::max({nt.size(), ns.size(), sg.size(), th.size(), ds.size()});
    auto at = [len](const auto& axis, std::size_t i) { return axis.size() == len ? axis[i] : axis[0]; };
    for (std::size_t i = 0; i < len; ++i)
      add(at(nt, i), at(ns, i), at(sg, i), at(th, i), at(ds, i));
  } else {
    for (int a : nt)
      for (int b : ns)
        for (double c : sg)
          for (double d : th)
            for (DerivativeSource e : ds) add(a, b, c, d, e);
  }
  return cells;
}

/// Runs one cell end to end: simulate, derivatives, identify, evaluate.
inline IdentificationReport run_cell(const ExperimentConfig& base, const SweepCell& cell) {
  const ExperimentConfig c = cell_config(base, cell);
  const auto trajs = prepare_derivatives(c, generate_trajectories(c));
  const IdentifyResult r = identify(c, trajs);
  return evaluate(c, r.model, c.ToJson());
}

inline std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepCell> cells = sweep_grid(cfg);
  detail::ParallelFor(static_cast<int>(cells.size()), [&](int i) {
    auto& cell = cells[static_cast<std::size_t>(i)];
    cell.report = run_cell(cfg, cell);
  });
  return cells;
}

inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::string out =
      "cell,n_trajectories,samples_per_trajectory,noise_sigma,threshold,derivative_source,seed,"
      "support_precision,support_recall,support_f1,coeff_max_abs_error,coeff_rms_error,"
      "forecast_rmse,forecast_diverged_at\n";
  for (const auto& c : cells) {
    const auto& r = c.report;
    out += std::to_string(c.index) + "," + std::to_string(c.n_trajectories) + "," +
           std::to_string(c.samples_per_trajectory) + "," + format_double(c.noise_sigma) + "," +
           format_double(c.threshold) + "," + to_string(c.derivative_source) + "," +
           std::to_string(c.seed) + "," + format_double(r.support_precision) + "," +
           format_double(r.support_recall) + "," + format_double(r.support_f1) + "," +
           format_double(r.coeff_max_abs_error) + "," + format_double(r.coeff_rms_error) + "," +
           format_double(r.forecast_rmse) + "," +
           (r.forecast_diverged_at ? format_double(*r.forecast_diverged_at) : std::string()) +
           "\n";
  }
  return out;
}

}  // namespace repsindy

#endif  // REPSINDY_PIPELINE_HPP_
