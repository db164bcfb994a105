// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. argv[1] is the path to the repsindy executable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "repsindy/pipeline.hpp"
#include "repsindy/svg_plot.hpp"

using namespace repsindy;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s) {
    o.pass = false;
    o.detail += "; over time budget";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d (%s): %s [%.3fs]\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig RpsConfig() {
  return parse_config(json::parse(R"({
    "game": "rps",
    "trajectories": {"count": 1, "t_end": 10, "h": 0.01, "seed": 42},
    "derivatives": "exact",
    "library": {"degree": 3, "trig": false},
    "fit": {"threshold": 0.05, "constraint_blocks": true}
  })"));
}

IdentificationReport RunConfig(const ExperimentConfig& c, SparseModel* model = nullptr) {
  const auto trajs = prepare_derivatives(c, generate_trajectories(c));
  const IdentifyResult r = identify(c, trajs);
  if (model) *model = r.model;
  return evaluate(c, r.model);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int Run(const std::string& cmd) {
  return std::system((cmd + " >/dev/null 2>&1").c_str());
}

double crit1_error = -1.0;

Outcome Criterion1() {
  const ExperimentConfig c = RpsConfig();
  SparseModel m;
  const IdentificationReport r = RunConfig(c, &m);
  const SparseModel truth = ground_truth_coefficients(*c.game, m.library);
  const bool support = ((m.coefficients.array() != 0.0) == (truth.coefficients.array() != 0.0)).all();
  int fitted_nonzeros = 0;
  for (int col : {0, 1}) fitted_nonzeros += static_cast<int>((m.coefficients.col(col).array() != 0.0).count());
  const double colsum = m.coefficients.rowwise().sum().cwiseAbs().maxCoeff();
  crit1_error = r.coeff_max_abs_error;
  const auto total_nonzeros = (m.coefficients.array() != 0.0).count();
  const bool ok = m.library.size() == 20 && support && fitted_nonzeros == 4 && total_nonzeros == 6 &&
                  r.coeff_max_abs_error < 1e-6 && r.support_f1 == 1.0 && colsum < 1e-12;
  return {ok, "features=" + std::to_string(m.library.size()) +
                  " fitted_nonzeros=" + std::to_string(fitted_nonzeros) +
                  " total_nonzeros=" + std::to_string(total_nonzeros) +
                  " f1=" + Fmt("%.3f", r.support_f1) +
                  " max_abs_err=" + Fmt("%.2e", r.coeff_max_abs_error)};
}

Outcome Criterion2() {
  ExperimentConfig c = RpsConfig();
  c.trajectories.h = 0.1;
  c.trajectories.t_end = 9.9;
  c.derivatives = DerivativeSource::FiniteDifference;
  const auto samples = sample_count(c.trajectories.t_end, c.trajectories.h);
  const IdentificationReport r = RunConfig(c);
  const bool ok = samples == 100 && r.support_f1 == 1.0 && r.coeff_max_abs_error > crit1_error &&
                  r.coeff_max_abs_error < 0.2;
  return {ok, "samples=" + std::to_string(samples) + " f1=" + Fmt("%.3f", r.support_f1) +
                  " max_abs_err=" + Fmt("%.2e", r.coeff_max_abs_error) +
                  " (criterion 1: " + Fmt("%.2e", crit1_error) + ")"};
}

Outcome Criterion3() {
  ExperimentConfig c = parse_config(json::parse(R"({
    "game": "battle_of_sexes",
    "trajectories": {"h": 0.1, "noise_sigma": 0.005},
    "derivatives": "finite_difference",
    "fit": {"threshold": 0.05, "rank_tolerance": 0.01},
    "sweep": {"n_trajectories": [1, 20], "samples_per_trajectory": [2000, 100], "combine": "zip"}
  })"));
  std::vector<double> f1a, f1b, ea, eb;
  for (std::uint64_t k = 0; k < 10; ++k) {
    c.trajectories.seed = 1000 + 2 * k;
    const auto cells = run_sweep(c);
    f1a.push_back(cells[0].report.support_f1);
    ea.push_back(cells[0].report.coeff_max_abs_error);
    f1b.push_back(cells[1].report.support_f1);
    eb.push_back(cells[1].report.coeff_max_abs_error);
  }
  const double ma = median(f1a), mb = median(f1b), xa = median(ea), xb = median(eb);
  return {mb >= ma && xb <= xa,
          "median f1 1x2000=" + Fmt("%.3f", ma) + " 20x100=" + Fmt("%.3f", mb) +
              "; median max_abs_err 1x2000=" + Fmt("%.3f", xa) + " 20x100=" + Fmt("%.3f", xb)};
}

Outcome Criterion4() {
  const PayoffGame rps = builtin_game("rps");
  const SimplexPoint x0 = sample_simplex(3, 42);
  const Trajectory t = simulate(rps, x0, 50.0, 0.01);
  double sum_dev = 0, prod_dev = 0;
  const double p0 = t.states.row(0).prod();
  for (Eigen::Index i = 0; i < t.samples(); ++i) {
    sum_dev = std::max(sum_dev, std::abs(t.states.row(i).sum() - 1.0));
    prod_dev = std::max(prod_dev, std::abs(t.states.row(i).prod() - p0));
  }
  bool faces = true;
  for (const SimplexPoint& f : {SimplexPoint{0.6, 0.4, 0.0}, SimplexPoint{0.0, 0.3, 0.7},
                                SimplexPoint{0.25, 0.0, 0.75}}) {
    const Trajectory ft = simulate(rps, f, 50.0, 0.01);
    for (int j = 0; j < 3; ++j)
      if (f(j) == 0.0 && !ft.states.col(j).isZero(0)) faces = false;
  }
  return {sum_dev < 1e-9 && prod_dev < 1e-6 && faces,
          "max|sum-1|=" + Fmt("%.2e", sum_dev) + " max|prod-prod0|=" + Fmt("%.2e", prod_dev) +
              " faces_exact=" + (faces ? "yes" : "no")};
}

Outcome Criterion5() {
  const double lambda = 0.1;
  StlsqOptions opts;
  opts.threshold = lambda;
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = oracle::RandomSparseInstance(5000 + seed, 5, 50, 2, lambda);
    const Eigen::VectorXd c = stlsq(inst.theta, inst.y, opts).col(0);
    if (oracle::SupportMask(c) == oracle::BestSubset(inst.theta, inst.y, 1e-10)) ++agree;
  }
  return {agree == 50, std::to_string(agree) + "/50 instances match best-subset support"};
}

Outcome Criterion6() {
  const ExperimentConfig c = RpsConfig();
  const DataMatrices data = assemble_data(prepare_derivatives(c, generate_trajectories(c)));
  const FeatureLibrary lib(3, 3, false);
  FitOptions opts;
  opts.constraint_blocks = c.game->blocks();
  const SparseModel truth = ground_truth_coefficients(*c.game, lib);
  const EnsembleModel e = ensemble_fit(data, lib, opts, {100, 0.6, 0.5, 42});
  double min_true = 1.0, max_spurious = 0.0;
  for (Eigen::Index r = 0; r < truth.coefficients.rows(); ++r)
    for (Eigen::Index k = 0; k < truth.coefficients.cols(); ++k) {
      if (truth.coefficients(r, k) != 0.0) min_true = std::min(min_true, e.inclusion_probability(r, k));
      else max_spurious = std::max(max_spurious, e.inclusion_probability(r, k));
    }
  const SparseModel plain = fit(data, lib, opts);
  const EnsembleModel full = ensemble_fit(data, lib, opts, {100, 1.0, 0.5, 42});
  const double gap = (full.coefficient_median - plain.coefficients).cwiseAbs().maxCoeff();
  return {min_true == 1.0 && max_spurious <= 0.2 && gap <= 1e-12,
          "min P(true)=" + Fmt("%.2f", min_true) + " max P(spurious)=" + Fmt("%.2f", max_spurious) +
              " |median(frac=1) - plain|=" + Fmt("%.1e", gap)};
}

Outcome Criterion7() {
  const Eigen::VectorXd r = replicator_rhs(builtin_game("rps"), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto [dx, dy] = replicator_rhs_bipopulation(builtin_game("battle_of_sexes"),
                                                    {{2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3}});
  const double a = r.cwiseAbs().maxCoeff();
  const double b = std::max(dx.cwiseAbs().maxCoeff(), dy.cwiseAbs().maxCoeff());
  return {a <= 1e-14 && b <= 1e-14,
          "|rhs| RPS centre=" + Fmt("%.1e", a) + " BoS mixed equilibrium=" + Fmt("%.1e", b)};
}

Outcome Criterion8(const std::string& cli) {
  // Library-level round trips.
  ExperimentConfig c = RpsConfig();
  c.trajectories.noise_sigma = 0.01;
  const Trajectory t = generate_trajectories(c)[0];
  const Trajectory back = trajectory_from_csv(trajectory_to_csv(t), "mem");
  const bool csv_ok = back.times == t.times && back.states == t.states &&
                      *back.derivatives == *t.derivatives;
  const SparseModel m = identify(RpsConfig(), prepare_derivatives(RpsConfig(), generate_trajectories(RpsConfig()))).model;
  const SparseModel mb = model_from_json(json::parse(model_to_json(m).dump(2)));
  const bool json_ok = mb.coefficients == m.coefficients && mb.library == m.library &&
                       mb.reconstructed_columns == m.reconstructed_columns;

  // CLI determinism: every command twice, outputs compared byte for byte.
  const fs::path dir = fs::temp_directory_path() / "repsindy_acceptance_c8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  json cfg = RpsConfig().ToJson();
  cfg["trajectories"]["count"] = 3;
  cfg["trajectories"]["noise_sigma"] = 0.001;
  cfg["fit"]["ensemble"]["enabled"] = true;
  cfg["fit"]["ensemble"]["n_models"] = 20;
  cfg["sweep"] = {{"threshold", {0.05, 0.1}}, {"noise_sigma", {0.0, 0.001}}};
  write_json_file(dir / "config.json", cfg);
  const std::string base = cli + " ";
  const std::string conf = " --config " + (dir / "config.json").string() + " ";
  std::vector<std::string> mismatched;
  int failed_runs = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path o = dir / run;
    fs::create_directories(o);
    failed_runs += Run(base + "simulate" + conf + (o / "sim").string()) != 0;
    const std::string csvs = (o / "sim/traj_000.csv").string() + " " +
                             (o / "sim/traj_001.csv").string() + " " +
                             (o / "sim/traj_002.csv").string();
    failed_runs += Run(base + "identify" + conf + (o / "model.json").string() + " " + csvs) != 0;
    failed_runs += Run(base + "evaluate" + conf + (o / "model.json").string() + " " +
                       (o / "report.json").string()) != 0;
    failed_runs += Run(base + "sweep" + conf + (o / "sweep.csv").string()) != 0;
    failed_runs += Run(base + "plot" + conf + (o / "sim/traj_000.csv").string() + " " +
                       (o / "plot.svg").string()) != 0;
  }
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir / "a");
    ++compared;
    if (!fs::exists(dir / "b" / rel) ||
        read_text_file(entry.path()) != read_text_file(dir / "b" / rel))
      mismatched.push_back(rel.string());
  }
  fs::remove_all(dir);
  const bool ok = csv_ok && json_ok && failed_runs == 0 && mismatched.empty() && compared >= 9;
  return {ok, std::string("csv_roundtrip=") + (csv_ok ? "exact" : "lossy") +
                  " json_roundtrip=" + (json_ok ? "exact" : "lossy") +
                  " cli_failures=" + std::to_string(failed_runs) +
                  " files_compared=" + std::to_string(compared) +
                  " mismatched=" + std::to_string(mismatched.size())};
}

Outcome Criterion9(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "repsindy_acceptance_c9";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_json_file(dir / "config.json", json::parse(R"({
    "game": "rps",
    "trajectories": {"count": 1, "t_end": 200, "h": 0.02, "initial_conditions": [[0.5, 0.3, 0.2]]},
    "derivatives": "exact"
  })"));
  const std::string conf = " --config " + (dir / "config.json").string() + " ";
  int rc = Run(cli + " simulate" + conf + (dir / "sim").string());
  rc |= Run(cli + " plot" + conf + (dir / "sim/traj_000.csv").string() + " " +
            (dir / "orbit.svg").string());
  if (rc != 0) return {false, "CLI returned nonzero"};
  const auto pts = svg_polyline_points(read_text_file(dir / "orbit.svg"));
  fs::remove_all(dir);
  const double h = std::sqrt(3.0) / 2.0;
  std::size_t outside = 0;
  for (const auto& [u, v] : pts)
    if (v < -1e-12 || v > 2.0 * h * u + 1e-12 || v > 2.0 * h * (1.0 - u) + 1e-12) ++outside;
  double closest = 1e9;
  for (std::size_t i = pts.size() - pts.size() / 10; i < pts.size(); ++i)
    closest = std::min(closest, std::hypot(pts[i].first - pts[0].first, pts[i].second - pts[0].second));
  return {!pts.empty() && outside == 0 && closest < 0.02,
          "points=" + std::to_string(pts.size()) + " outside=" + std::to_string(outside) +
              " final-10% distance to start=" + Fmt("%.2e", closest)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-repsindy>\n";
    return 2;
  }
  const std::string cli = argv[1];
  Report(1, "RPS exact recovery", 1.0, Criterion1);
  Report(2, "RPS low-data degradation", 0, Criterion2);
  Report(3, "BoS multi-trajectory advantage", 30.0, Criterion3);
  Report(4, "conservation", 1.0, Criterion4);
  Report(5, "STLSQ best-subset equivalence", 5.0, Criterion5);
  Report(6, "ensemble sanity", 10.0, Criterion6);
  Report(7, "fixed points", 0, Criterion7);
  Report(8, "round trips and determinism", 0, [&] { return Criterion8(cli); });
  Report(9, "plot contract", 0, [&] { return Criterion9(cli); });
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
