#ifndef REPSINDY_CONFIG_HPP_
#define REPSINDY_CONFIG_HPP_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>
#include "repsindy/errors.hpp"
#include "repsindy/game_models.hpp"
#include "repsindy/sparse_model.hpp"

namespace repsindy {

enum class DerivativeSource { Exact, FiniteDifference };

inline std::string to_string(DerivativeSource s) {
  return s == DerivativeSource::Exact ? "exact" : "finite_difference";
}

inline DerivativeSource derivative_source_from_string(const std::string& s) {
  if (s == "exact") return DerivativeSource::Exact;
  if (s == "finite_difference") return DerivativeSource::FiniteDifference;
  throw ConfigError("derivative source must be 'exact' or 'finite_difference', got '" + s + "'");
}

struct TrajectoryPlan {
  int count = 1;
  double t_end = 10.0;
  double h = 0.01;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  // Explicit starting states (flattened x then y for two-population games).
  std::vector<std::vector<double>> initial_conditions;
};

struct EnsembleSpec {
  bool enabled = false;
  int n_models = 100;
  double subsample_fraction = 0.6;
  double inclusion_threshold = 0.5;
};

struct FitSpec {
  double threshold = 0.05;
  int max_iter = 10;
  double rank_tolerance = 1e-6;
  bool normalize_columns = false;
  // true: one block per population of the configured game (or all states when
  // no game is given); false: no reduction; explicit list: as given.
  bool constraint_blocks = true;
  std::optional<ConstraintBlocks> explicit_blocks;
  EnsembleSpec ensemble;
};

struct EvaluationSpec {
  double t_end = 10.0;
  double h = 0.01;
  std::uint64_t seed = 1;
  std::vector<double> x0;  // empty: sampled from `seed`
};

struct SweepSpec {
  std::vector<int> n_trajectories;
  std::vector<int> samples_per_trajectory;
  std::vector<double> noise_sigma;
  std::vector<double> threshold;
  std::vector<DerivativeSource> derivative_source;
  // false: cartesian product of the axes; true: axes are zipped element-wise
  // (all given axes must have the same length).
  bool zip = false;
  bool present = false;
};

/// Everything one experiment needs. Parsed from a JSON document whose
/// sections are all optional; unknown keys anywhere are rejected.
struct ExperimentConfig {
  nlohmann::json game_spec;  // null when no game is configured
  std::optional<PayoffGame> game;
  TrajectoryPlan trajectories;
  DerivativeSource derivatives = DerivativeSource::Exact;
  int library_degree = 3;
  bool library_trig = false;
  FitSpec fit;
  EvaluationSpec evaluation;
  SweepSpec sweep;

  const PayoffGame& RequireGame() const {
    if (!game) throw ConfigError("this command needs a 'game' in the config");
    return *game;
  }

  /// Blocks to use for an n-state fit, or nullopt when reduction is off.
  std::optional<ConstraintBlocks> ResolveBlocks(int n_states) const {
    if (fit.explicit_blocks) return fit.explicit_blocks;
    if (!fit.constraint_blocks) return std::nullopt;
    if (game) {
      if (game->state_dimension() != n_states)
        throw DimensionError("data dimension does not match the configured game");
      return game->blocks();
    }
    ConstraintBlocks one(1);
    for (int i = 0; i < n_states; ++i) one[0].push_back(i);
    return one;
  }

  nlohmann::json ToJson() const {
    using nlohmann::json;
    json j;
    j["game"] = game_spec;
    j["trajectories"] = {{"count", trajectories.count},
                         {"t_end", trajectories.t_end},
                         {"h", trajectories.h},
                         {"seed", trajectories.seed},
                         {"noise_sigma", trajectories.noise_sigma},
                         {"initial_conditions", trajectories.initial_conditions}};
    j["derivatives"] = to_string(derivatives);
    j["library"] = {{"degree", library_degree}, {"trig", library_trig}};
    json blocks = fit.explicit_blocks ? json(*fit.explicit_blocks) : json(fit.constraint_blocks);
    j["fit"] = {{"threshold", fit.threshold},
                {"max_iter", fit.max_iter},
                {"rank_tolerance", fit.rank_tolerance},
                {"normalize_columns", fit.normalize_columns},
                {"constraint_blocks", blocks},
                {"ensemble",
                 {{"enabled", fit.ensemble.enabled},
                  {"n_models", fit.ensemble.n_models},
                  {"subsample_fraction", fit.ensemble.subsample_fraction},
                  {"inclusion_threshold", fit.ensemble.inclusion_threshold}}}};
    j["evaluation"] = {{"t_end", evaluation.t_end},
                       {"h", evaluation.h},
                       {"seed", evaluation.seed},
                       {"x0", evaluation.x0}};
    if (sweep.present) {
      std::vector<std::string> sources;
      for (auto s : sweep.derivative_source) sources.push_back(to_string(s));
      json sw = json::object();
      auto axis = [&sw](const char* key, const auto& values) {
        if (!values.empty()) sw[key] = values;
      };
      axis("n_trajectories", sweep.n_trajectories);
      axis("samples_per_trajectory", sweep.samples_per_trajectory);
      axis("noise_sigma", sweep.noise_sigma);
      axis("threshold", sweep.threshold);
      axis("derivative_source", sources);
      if (sweep.zip) sw["combine"] = "zip";
      j["sweep"] = sw;
    }
    return j;
  }
};

namespace detail {

using nlohmann::json;

inline void RequireKeys(const json& obj, const std::string& where,
                        std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError("unknown key '" + where + "." + item.key() + "'");
  }
}

template <typename T>
T Get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + where + "." + key + "' has the wrong type");
  }
}

inline double GetNumber(const json& obj, const char* key, double fallback,
                        const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  return obj.at(key).get<double>();
}

inline int GetInt(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer())
    throw ConfigError("'" + where + "." + key + "' must be an integer");
  return obj.at(key).get<int>();
}

inline bool GetBool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError("'" + where + "." + key + "' must be a boolean");
  return obj.at(key).get<bool>();
}

inline std::uint64_t GetSeed(const json& obj, const char* key, std::uint64_t fallback,
                             const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_unsigned())
    throw ConfigError("'" + where + "." + key + "' must be a non-negative integer");
  return obj.at(key).get<std::uint64_t>();
}

inline Eigen::MatrixXd PayoffMatrix(const json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) throw ConfigError("'" + where + "' must be a matrix");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = rows[0].is_array() ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  if (c == 0) throw ConfigError("'" + where + "' must be a matrix");
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
      throw ConfigError("'" + where + "' rows must have equal length");
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number())
        throw ConfigError("'" + where + "' entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

inline PayoffGame ParseGame(const json& spec) {
  if (spec.is_string()) return builtin_game(spec.get<std::string>());
  RequireKeys(spec, "game",
              {"kind", "name", "payoffs", "labels", "row_payoffs", "col_payoffs",
               "row_labels", "col_labels"});
  const std::string kind = Get<std::string>(spec, "kind", "", "game");
  const std::string name = Get<std::string>(spec, "name", "custom", "game");
  if (kind == "symmetric") {
    Eigen::MatrixXd a = PayoffMatrix(spec.value("payoffs", json()), "game.payoffs");
    auto labels = Get<std::vector<std::string>>(spec, "labels", {}, "game");
    if (labels.empty())
      for (Eigen::Index i = 0; i < a.rows(); ++i) labels.push_back(std::to_string(i + 1));
    return PayoffGame::Symmetric(name, a, labels);
  }
  if (kind == "two_population") {
    Eigen::MatrixXd a = PayoffMatrix(spec.value("row_payoffs", json()), "game.row_payoffs");
    Eigen::MatrixXd b = PayoffMatrix(spec.value("col_payoffs", json()), "game.col_payoffs");
    auto rl = Get<std::vector<std::string>>(spec, "row_labels", {}, "game");
    auto cl = Get<std::vector<std::string>>(spec, "col_labels", {}, "game");
    if (rl.empty())
      for (Eigen::Index i = 0; i < a.rows(); ++i) rl.push_back(std::to_string(i + 1));
    if (cl.empty())
      for (Eigen::Index i = 0; i < a.cols(); ++i) cl.push_back(std::to_string(i + 1));
    return PayoffGame::TwoPopulation(name, a, b, rl, cl);
  }
  throw ConfigError("game.kind must be 'symmetric' or 'two_population'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  using detail::GetBool;
  using detail::GetInt;
  using detail::GetNumber;
  using detail::GetSeed;
  using nlohmann::json;
  detail::RequireKeys(doc, "config",
                      {"game", "trajectories", "derivatives", "library", "fit", "evaluation",
                       "sweep"});
  ExperimentConfig cfg;
  try {
    if (doc.contains("game") && !doc.at("game").is_null()) {
      cfg.game_spec = doc.at("game");
      cfg.game = detail::ParseGame(cfg.game_spec);
    }
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("invalid game: ") + e.what());
  }

  if (doc.contains("trajectories")) {
    const json& t = doc.at("trajectories");
    detail::RequireKeys(t, "trajectories",
                        {"count", "t_end", "h", "seed", "noise_sigma", "initial_conditions"});
    auto& p = cfg.trajectories;
    p.count = GetInt(t, "count", p.count, "trajectories");
    p.t_end = GetNumber(t, "t_end", p.t_end, "trajectories");
    p.h = GetNumber(t, "h", p.h, "trajectories");
    p.seed = GetSeed(t, "seed", p.seed, "trajectories");
    p.noise_sigma = GetNumber(t, "noise_sigma", p.noise_sigma, "trajectories");
    p.initial_conditions = detail::Get<std::vector<std::vector<double>>>(
        t, "initial_conditions", {}, "trajectories");
  }
  if (doc.contains("derivatives")) {
    if (!doc.at("derivatives").is_string()) throw ConfigError("'derivatives' must be a string");
    cfg.derivatives = derivative_source_from_string(doc.at("derivatives").get<std::string>());
  }
  if (doc.contains("library")) {
    const json& l = doc.at("library");
    detail::RequireKeys(l, "library", {"degree", "trig"});
    cfg.library_degree = GetInt(l, "degree", cfg.library_degree, "library");
    cfg.library_trig = GetBool(l, "trig", cfg.library_trig, "library");
  }
  if (doc.contains("fit")) {
    const json& f = doc.at("fit");
    detail::RequireKeys(f, "fit",
                        {"threshold", "max_iter", "rank_tolerance", "normalize_columns",
                         "constraint_blocks", "ensemble"});
    auto& s = cfg.fit;
    s.threshold = GetNumber(f, "threshold", s.threshold, "fit");
    s.max_iter = GetInt(f, "max_iter", s.max_iter, "fit");
    s.rank_tolerance = GetNumber(f, "rank_tolerance", s.rank_tolerance, "fit");
    s.normalize_columns = GetBool(f, "normalize_columns", s.normalize_columns, "fit");
    if (f.contains("constraint_blocks")) {
      const json& b = f.at("constraint_blocks");
      if (b.is_boolean()) {
        s.constraint_blocks = b.get<bool>();
      } else {
        s.explicit_blocks = detail::Get<ConstraintBlocks>(f, "constraint_blocks", {}, "fit");
        s.constraint_blocks = true;
      }
    }
    if (f.contains("ensemble")) {
      const json& e = f.at("ensemble");
      detail::RequireKeys(e, "fit.ensemble",
                          {"enabled", "n_models", "subsample_fraction", "inclusion_threshold"});
      auto& en = s.ensemble;
      en.enabled = GetBool(e, "enabled", en.enabled, "fit.ensemble");
      en.n_models = GetInt(e, "n_models", en.n_models, "fit.ensemble");
      en.subsample_fraction =
          GetNumber(e, "subsample_fraction", en.subsample_fraction, "fit.ensemble");
      en.inclusion_threshold =
          GetNumber(e, "inclusion_threshold", en.inclusion_threshold, "fit.ensemble");
    }
  }
  if (doc.contains("evaluation")) {
    const json& e = doc.at("evaluation");
    detail::RequireKeys(e, "evaluation", {"t_end", "h", "seed", "x0"});
    auto& ev = cfg.evaluation;
    ev.t_end = GetNumber(e, "t_end", ev.t_end, "evaluation");
    ev.h = GetNumber(e, "h", ev.h, "evaluation");
    ev.seed = GetSeed(e, "seed", ev.seed, "evaluation");
    ev.x0 = detail::Get<std::vector<double>>(e, "x0", {}, "evaluation");
  }
  if (doc.contains("sweep")) {
    const json& w = doc.at("sweep");
    detail::RequireKeys(w, "sweep",
                        {"n_trajectories", "samples_per_trajectory", "noise_sigma", "threshold",
                         "derivative_source", "combine"});
    auto& sw = cfg.sweep;
    sw.present = true;
    const auto combine = detail::Get<std::string>(w, "combine", "product", "sweep");
    if (combine != "product" && combine != "zip")
      throw ConfigError("sweep.combine must be 'product' or 'zip'");
    sw.zip = combine == "zip";
    auto axis = [&](const char* key, auto& out) {
      using V = std::decay_t<decltype(out)>;
      if (!w.contains(key)) return;
      out = detail::Get<V>(w, key, V{}, "sweep");
      if (out.empty()) throw ConfigError(std::string("sweep axis '") + key + "' is empty");
    };
    axis("n_trajectories", sw.n_trajectories);
    axis("samples_per_trajectory", sw.samples_per_trajectory);
    axis("noise_sigma", sw.noise_sigma);
    axis("threshold", sw.threshold);
    std::vector<std::string> sources;
    axis("derivative_source", sources);
    for (const auto& s : sources) sw.derivative_source.push_back(derivative_source_from_string(s));
    if (sw.zip) {
      std::size_t len = 0;
      for (std::size_t n : {sw.n_trajectories.size(), sw.samples_per_trajectory.size(),
                            sw.noise_sigma.size(), sw.threshold.size(),
                            sw.derivative_source.size()}) {
        if (n == 0) continue;
        if (len != 0 && n != len) throw ConfigError("zipped sweep axes must have equal length");
        len = n;
      }
    }
  }

  // Ranges.
  const auto& p = cfg.trajectories;
  if (p.count < 1) throw ConfigError("trajectories.count must be >= 1");
  if (!(p.t_end > 0.0) || !(p.h > 0.0)) throw ConfigError("trajectories.t_end and h must be > 0");
  if (p.h > p.t_end) throw ConfigError("trajectories.h must not exceed t_end");
  if (!(p.noise_sigma >= 0.0)) throw ConfigError("trajectories.noise_sigma must be >= 0");
  if (!p.initial_conditions.empty() &&
      static_cast<int>(p.initial_conditions.size()) != p.count)
    throw ConfigError("initial_conditions needs one entry per trajectory");
  if (cfg.library_degree < 0 || cfg.library_degree > 8)
    throw ConfigError("library.degree must lie in [0, 8]");
  if (!(cfg.fit.threshold >= 0.0)) throw ConfigError("fit.threshold must be >= 0");
  if (cfg.fit.max_iter < 1) throw ConfigError("fit.max_iter must be >= 1");
  if (!(cfg.fit.rank_tolerance >= 0.0 && cfg.fit.rank_tolerance < 1.0))
    throw ConfigError("fit.rank_tolerance must lie in [0, 1)");
  const auto& en = cfg.fit.ensemble;
  if (en.n_models < 1) throw ConfigError("fit.ensemble.n_models must be >= 1");
  if (!(en.subsample_fraction > 0.0 && en.subsample_fraction <= 1.0))
    throw ConfigError("fit.ensemble.subsample_fraction must lie in (0, 1]");
  if (!(en.inclusion_threshold >= 0.0 && en.inclusion_threshold <= 1.0))
    throw ConfigError("fit.ensemble.inclusion_threshold must lie in [0, 1]");
  if (!(cfg.evaluation.t_end > 0.0) || !(cfg.evaluation.h > 0.0) ||
      cfg.evaluation.h > cfg.evaluation.t_end)
    throw ConfigError("evaluation.t_end and h must be > 0 with h <= t_end");
  for (int v : cfg.sweep.n_trajectories)
    if (v < 1) throw ConfigError("sweep.n_trajectories entries must be >= 1");
  for (int v : cfg.sweep.samples_per_trajectory)
    if (v < 3) throw ConfigError("sweep.samples_per_trajectory entries must be >= 3");
  for (double v : cfg.sweep.noise_sigma)
    if (!(v >= 0.0)) throw ConfigError("sweep.noise_sigma entries must be >= 0");
  for (double v : cfg.sweep.threshold)
    if (!(v >= 0.0)) throw ConfigError("sweep.threshold entries must be >= 0");
  return cfg;
}

}  // namespace repsindy

#endif  // REPSINDY_CONFIG_HPP_
