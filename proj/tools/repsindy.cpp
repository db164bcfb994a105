// repsindy: simulate replicator dynamics and rediscover them with SINDy.
//
//   repsindy simulate --config c.json OUT_DIR
//   repsindy identify --config c.json OUT_MODEL IN.csv...
//   repsindy evaluate --config c.json MODEL OUT_REPORT
//   repsindy sweep    --config c.json OUT.csv
//   repsindy plot     [--config c.json | --game rps] IN.csv OUT.svg
//
// Exit codes: 0 success, 1 invalid input or config, 2 I/O failure.

#include <array>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "repsindy/config.hpp"
#include "repsindy/errors.hpp"
#include "repsindy/io.hpp"
#include "repsindy/pipeline.hpp"
#include "repsindy/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace repsindy;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig LoadConfig(const Common& c) {
  ExperimentConfig cfg =
      c.config_path.empty() ? parse_config(Json::object()) : parse_config(read_json_file(c.config_path));
  if (c.seed) cfg.trajectories.seed = *c.seed;
  return cfg;
}

void AddCommon(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "override the master seed");
}

int Simulate(const Common& c, const std::string& out_dir) {
  const ExperimentConfig cfg = LoadConfig(c);
  const auto trajs = generate_trajectories(cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03zu.csv", i);
    write_trajectory_csv(fs::path(out_dir) / name, trajs[i]);
  }
  // CSV has no room for the config, so it goes next to the files.
  write_json_file(fs::path(out_dir) / "simulate_config.json", cfg.ToJson());
  return 0;
}

int Identify(const Common& c, const std::string& out_model, const std::vector<std::string>& inputs) {
  const ExperimentConfig cfg = LoadConfig(c);
  std::vector<Trajectory> trajs;
  for (const auto& path : inputs) trajs.push_back(read_trajectory_csv(path));
  const IdentifyResult r = identify(cfg, prepare_derivatives(cfg, std::move(trajs)));
  write_json_file(out_model, model_document(cfg, r));
  return 0;
}

int Evaluate(const Common& c, const std::string& game_id, const std::string& model_path,
             const std::string& out_report) {
  ExperimentConfig cfg = LoadConfig(c);
  if (!game_id.empty()) {
    cfg.game = builtin_game(game_id);
    cfg.game_spec = game_id;
  }
  const Json doc = read_json_file(model_path);
  const SparseModel model = model_from_json(doc);
  const Json model_config = doc.contains("config") ? doc.at("config") : Json();
  write_json_file(out_report, report_to_json(evaluate(cfg, model, model_config)));
  return 0;
}

int Sweep(const Common& c, const std::string& out_csv) {
  const ExperimentConfig cfg = LoadConfig(c);
  write_text_file(out_csv, sweep_to_csv(run_sweep(cfg)));
  write_json_file(out_csv + ".config.json", cfg.ToJson());
  return 0;
}

int Plot(const Common& c, const std::string& game_id, const std::string& in_csv,
         const std::string& out_svg) {
  std::optional<PayoffGame> game;
  if (!game_id.empty()) game = builtin_game(game_id);
  else if (!c.config_path.empty()) game = LoadConfig(c).game;
  const Trajectory traj = read_trajectory_csv(in_csv);
  std::array<std::string, 3> labels{"x1", "x2", "x3"};
  if (game && game->symmetric() && game->row_strategies() == 3)
    for (std::size_t i = 0; i < 3; ++i) labels[i] = game->row_labels[i];
  write_text_file(out_svg, render_simplex_svg(traj.states, labels));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replicator dynamics simulation and sparse identification"};
  app.require_subcommand(1);

  Common common;
  std::string game_id, out_path, in_path;
  std::vector<std::string> inputs;

  auto* sim = app.add_subcommand("simulate", "simulate trajectories to CSV files");
  AddCommon(sim, common, true);
  sim->add_option("OUT_DIR", out_path, "output directory")->required();

  auto* idf = app.add_subcommand("identify", "fit a sparse model to trajectory CSVs");
  AddCommon(idf, common, true);
  idf->add_option("OUT_MODEL", out_path, "model JSON to write")->required();
  idf->add_option("INPUTS", inputs, "trajectory CSV files")->required();

  auto* ev = app.add_subcommand("evaluate", "score a model against the game's equations");
  AddCommon(ev, common, true);
  ev->add_option("--game", game_id, "built-in game id overriding the config");
  ev->add_option("MODEL", in_path, "model JSON")->required();
  ev->add_option("OUT_REPORT", out_path, "report JSON to write")->required();

  auto* sw = app.add_subcommand("sweep", "run a grid of identify+evaluate experiments");
  AddCommon(sw, common, true);
  sw->add_option("OUT_CSV", out_path, "results table")->required();

  auto* pl = app.add_subcommand("plot", "ternary plot of a 3-strategy trajectory");
  AddCommon(pl, common, false);
  pl->add_option("--game", game_id, "built-in game id for vertex labels");
  pl->add_option("INPUT", in_path, "trajectory CSV")->required();
  pl->add_option("OUT_SVG", out_path, "SVG to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return Simulate(common, out_path);
    if (*idf) return Identify(common, out_path, inputs);
    if (*ev) return Evaluate(common, game_id, in_path, out_path);
    if (*sw) return Sweep(common, out_path);
    if (*pl) return Plot(common, game_id, in_path, out_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
