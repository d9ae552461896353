#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "vidmem/config.hpp"
#include "vidmem/gating.hpp"
#include "vidmem/membank.hpp"
#include "vidmem/metrics.hpp"
#include "vidmem/simworld.hpp"
#include "vidmem/trajectory.hpp"

namespace fs = std::filesystem;
using namespace vidmem;

namespace {

// Relative output paths resolve under VIDMEM_OUT_DIR when it is set.
fs::path out_path(const std::string& p) {
  fs::path path(p);
  const char* base = std::getenv("VIDMEM_OUT_DIR");
  if (base && *base && path.is_relative()) return fs::path(base) / path;
  return path;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write: " + path.string());
}

Trajectory load_trajectory(const fs::path& path) {
  return trajectory_from_json(json::parse(read_text(path)));
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

json training_pairs_to_json(const PseudoLoop& loop) {
  json j;
  j["version"] = 1;
  j["frame_order"] = loop.frame_order;
  json pairs = json::array();
  for (const TrainingPair& pair : loop.pairs) {
    json jp;
    jp["history"] = pair.history ? json(*pair.history) : json(nullptr);
    jp["target"] = pair.target;
    jp["stride"] = pair.stride;
    pairs.push_back(std::move(jp));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

ConsistencyReport evaluate_episode_dir(const fs::path& dir, double tolerance) {
  const EpisodeRecord episode = load_episode(dir);
  const RevisitPairing pairing = pair_revisits(episode.poses, tolerance);
  ConsistencyReport report = evaluate(episode, pairing);
  report.episode_id = dir.string();
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-gated video rollout toolkit"};
  app.require_subcommand(1);

  // traj
  auto* traj = app.add_subcommand("traj", "trajectory generation and formats");
  traj->require_subcommand(1);

  auto* traj_gen = traj->add_subcommand("gen", "generate a stress trajectory");
  std::string kind = "panoramic", gen_out;
  PatternParams params;
  std::uint64_t seed = 0;
  traj_gen->add_option("--kind", kind, "panoramic|revisit|loops|offset");
  traj_gen->add_option("--frames", params.frames, "frame count");
  traj_gen->add_option("--seed", seed, "generator seed");
  traj_gen->add_option("--cycles", params.cycles, "revisit cycles");
  traj_gen->add_option("--yaw", params.yaw_amplitude_deg, "revisit amplitude, degrees");
  traj_gen->add_option("--offset", params.offset, "offset-return displacement");
  traj_gen->add_option("--step", params.step, "forward step, scene units");
  traj_gen->add_option("-o,--out", gen_out, "output trajectory JSON")->required();
  traj_gen->callback([&] {
    const Trajectory t = gen_pattern(pattern_kind_from_string(kind), params, seed);
    write_text(out_path(gen_out), trajectory_to_json(t).dump(2) + "\n");
  });

  auto* traj_import = traj->add_subcommand("import-re10k", "ingest a camera file");
  std::string import_in, import_out;
  traj_import->add_option("input", import_in, "RealEstate10K camera txt")->required();
  traj_import->add_option("-o,--out", import_out, "output trajectory JSON")->required();
  traj_import->callback([&] {
    const Trajectory t = import_re10k(read_text(import_in));
    write_text(out_path(import_out), trajectory_to_json(t).dump(2) + "\n");
  });

  auto* traj_export = traj->add_subcommand("export-re10k", "emit a camera file");
  std::string export_in, export_out;
  traj_export->add_option("input", export_in, "trajectory JSON")->required();
  traj_export->add_option("-o,--out", export_out, "output txt (default stdout)");
  traj_export->callback([&] {
    const std::string text = export_re10k(load_trajectory(export_in));
    if (export_out.empty())
      std::cout << text;
    else
      write_text(out_path(export_out), text);
  });

  // gates
  auto* gates = app.add_subcommand("gates", "camera-aware gating");
  gates->require_subcommand(1);
  auto* gates_compute = gates->add_subcommand("compute", "gate a trajectory against a bank");
  std::string gc_traj, gc_history, gc_config, gc_out;
  gates_compute->add_option("--traj", gc_traj, "trajectory JSON")->required();
  gates_compute->add_option("--history", gc_history, "memory bank directory")->required();
  gates_compute->add_option("--config", gc_config, "run config JSON");
  gates_compute->add_option("-o,--out", gc_out, "output trace")->required();
  gates_compute->callback([&] {
    const RunConfig cfg = config_or_default(gc_config);
    const Trajectory t = load_trajectory(gc_traj);
    const MemoryBank bank = MemoryBank::load(gc_history);
    std::vector<GateDecision> decisions =
        compute_gates(t.poses, bank.poses(), cfg.gating);
    for (GateDecision& d : decisions)
      if (d.matched) d.matched = static_cast<int>(bank.at(*d.matched).frame_index);
    write_text(out_path(gc_out), format_gate_trace(decisions));
  });

  // synth
  auto* synth = app.add_subcommand("synth", "training-data synthesis");
  synth->require_subcommand(1);
  auto* synth_loop = synth->add_subcommand("pseudo-loop", "forward-backward training pairs");
  int sl_frames = 49, sl_stride = 1;
  double sl_dropout = 0.0;
  std::uint64_t sl_seed = 0;
  std::string sl_out;
  synth_loop->add_option("--frames", sl_frames, "video length")->required();
  synth_loop->add_option("--stride", sl_stride, "temporal stride")->required();
  synth_loop->add_option("--dropout", sl_dropout, "history dropout rate");
  synth_loop->add_option("--seed", sl_seed, "dropout seed");
  synth_loop->add_option("-o,--out", sl_out, "output pairs JSON")->required();
  synth_loop->callback([&] {
    PseudoLoop loop = synth_pseudo_loop(sl_frames, sl_stride);
    loop.pairs = apply_history_dropout(loop.pairs, sl_dropout, sl_seed);
    write_text(out_path(sl_out), training_pairs_to_json(loop).dump(2) + "\n");
  });

  // sim
  auto* sim = app.add_subcommand("sim", "episode simulation");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "run a memory-conditioned episode");
  std::string sr_traj, sr_config, sr_out;
  bool sr_no_memory = false;
  bool sr_seed_set = false;
  std::uint64_t sr_seed = 0;
  sim_run->add_option("--traj", sr_traj, "trajectory JSON")->required();
  sim_run->add_option("--config", sr_config, "run config JSON");
  sim_run->add_option("--out", sr_out, "episode output directory")->required();
  sim_run->add_flag("--no-memory", sr_no_memory, "force all gates to 0");
  sim_run->add_option("--seed", sr_seed, "episode seed (default: config seed)")
      ->each([&](const std::string&) { sr_seed_set = true; });
  sim_run->callback([&] {
    const RunConfig cfg = config_or_default(sr_config);
    const Trajectory t = load_trajectory(sr_traj);
    const EpisodeRecord episode =
        run_episode(cfg.scene, t, cfg.episode_config(!sr_no_memory),
                    sr_seed_set ? sr_seed : cfg.seed);
    save_episode(episode, out_path(sr_out));
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "consistency evaluation");
  eval_cmd->require_subcommand(1);
  auto* eval_cons = eval_cmd->add_subcommand("consistency", "revisit-consistency report");
  std::string ec_episode, ec_out, ec_csv, ec_table;
  double ec_tolerance = 1e-6;
  eval_cons->add_option("--episode", ec_episode, "episode directory")->required();
  eval_cons->add_option("--tolerance", ec_tolerance, "revisit pose tolerance");
  eval_cons->add_option("-o,--out", ec_out, "report JSON")->required();
  eval_cons->add_option("--csv", ec_csv, "per-pair CSV");
  eval_cons->add_option("--table", ec_table, "aligned text table");
  eval_cons->callback([&] {
    const ConsistencyReport report =
        evaluate_episode_dir(ec_episode, ec_tolerance);
    write_text(out_path(ec_out), report_to_json(report).dump(2) + "\n");
    if (!ec_csv.empty()) write_text(out_path(ec_csv), report_csv(report));
    if (!ec_table.empty()) write_text(out_path(ec_table), report_table(report));
  });

  // report
  auto* report = app.add_subcommand("report", "reporting");
  report->require_subcommand(1);
  auto* report_cmp = report->add_subcommand("compare", "paired-run delta table");
  std::string rc_a, rc_b, rc_out;
  double rc_tolerance = 1e-6;
  report_cmp->add_option("--a", rc_a, "episode directory A")->required();
  report_cmp->add_option("--b", rc_b, "episode directory B")->required();
  report_cmp->add_option("--tolerance", rc_tolerance, "revisit pose tolerance");
  report_cmp->add_option("-o,--out", rc_out, "output table")->required();
  report_cmp->callback([&] {
    const ConsistencyReport a = evaluate_episode_dir(rc_a, rc_tolerance);
    const ConsistencyReport b = evaluate_episode_dir(rc_b, rc_tolerance);
    write_text(out_path(rc_out), compare_table(a, b));
  });

  // config
  auto* config = app.add_subcommand("config", "configuration");
  config->require_subcommand(1);
  auto* config_defaults = config->add_subcommand("defaults", "print built-in defaults");
  config_defaults->callback(
      [] { std::cout << run_config_to_json(RunConfig{}).dump(2) << "\n"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
