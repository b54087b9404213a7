// Command-line front end: track | genbench | eval | flow.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "meshtrack/config.hpp"
#include "meshtrack/errors.hpp"
#include "meshtrack/evaluation.hpp"
#include "meshtrack/flow_io.hpp"
#include "meshtrack/image_io.hpp"
#include "meshtrack/mesh.hpp"
#include "meshtrack/parallel.hpp"
#include "meshtrack/patches.hpp"
#include "meshtrack/pipeline.hpp"
#include "meshtrack/sequence.hpp"
#include "meshtrack/synth.hpp"

namespace fs = std::filesystem;
using namespace meshtrack;

namespace {

std::string frame_name(const char* stem, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, index, ext);
  return buf;
}

void log_line(const std::string& msg) { std::cout << "[meshtrack] " << msg << "\n"; }

// Registers every config key as "--key" (plus a dashed alias) so any value
// from the config file can be overridden on the command line.
template <typename Config>
void add_config_options(CLI::App* cmd, std::map<std::string, std::string>& overrides,
                        const Config& defaults) {
  for (const auto& [key, value] : defaults.to_key_values()) {
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {
      std::string dashed = key;
      for (char& c : dashed)
        if (c == '_') c = '-';
      names += ",--" + dashed;
    }
    cmd->add_option_function<std::string>(
           names, [&overrides, k = key](const std::string& v) { overrides[k] = v; },
           "config key (default: " + (value.empty() ? std::string("<empty>") : value) + ")")
        ->type_name("VALUE");
  }
}

template <typename Config>
Config resolve_config(const std::string& config_path,
                      const std::map<std::string, std::string>& overrides) {
  Config config;
  if (!config_path.empty()) config.apply(read_key_value_file(config_path));
  for (const auto& [k, v] : overrides) config.set(k, v);
  config.validate();
  return config;
}

std::string env_cache_dir() {
  const char* env = std::getenv("MESHTRACK_CACHE_DIR");
  return env ? env : "";
}

void write_manifest(const KeyValueList& entries, const fs::path& dir) {
  write_key_value_file(entries, (dir / "manifest.txt").string());
}

int cmd_track(const std::string& sequence_dir, const std::string& mesh_path,
              const std::string& out_dir, PipelineConfig config, const std::string& pattern,
              bool dump_patches, bool overlays) {
  if (config.cache_dir.empty()) config.cache_dir = env_cache_dir();

  const SequenceHandle seq = load_sequence(sequence_dir, pattern);
  const TriangleMesh mesh = load_mesh(mesh_path);
  log_line("sequence: " + std::to_string(seq.frame_count()) + " frames, reference " +
           std::to_string(seq.reference_index));

  const int workers = config.workers > 0 ? config.workers : default_workers();
  const std::vector<Image> frames = load_all_frames(seq, workers);
  const FlowChainCache cache =
      build_flow_cache(frames, config.solver, config.cache_dir, workers, log_line);

  const TrackResult result =
      track_sequence(frames, seq.reference_index, mesh, cache, config, log_line);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  for (int f = 0; f < seq.frame_count(); ++f) {
    save_mesh(result.tracked.meshes[f], (out / frame_name("mesh", f, "txt")).string());
    write_provenance_csv(result.tracked.provenance[f],
                         (out / frame_name("provenance", f, "csv")).string());
  }
  write_partition_report(result.partition, (out / "clips.txt").string());
  if (!result.scores.empty())
    write_score_csv(result.scores, (out / "general_scores.csv").string());
  if (dump_patches && !result.patches.empty())
    write_patch_csv(result.patches, (out / "patches.csv").string());
  if (overlays)
    for (int f = 0; f < seq.frame_count(); ++f)
      render_overlay(frames[f], result.tracked.meshes[f],
                     (out / frame_name("overlay", f, "png")).string());

  KeyValueList manifest = config.to_key_values();
  manifest.emplace_back("command", "track");
  manifest.emplace_back("sequence_dir", sequence_dir);
  manifest.emplace_back("mesh_path", mesh_path);
  manifest.emplace_back("frame_count", std::to_string(seq.frame_count()));
  manifest.emplace_back("reference_index", std::to_string(seq.reference_index));
  manifest.emplace_back("eta_effective", std::to_string(result.eta_effective));
  write_manifest(manifest, out);

  log_line("tracked meshes written to " + out_dir);
  return 0;
}

int cmd_genbench(const std::string& out_dir, GeneratorConfig config) {
  const int workers = default_workers();
  const Image texture = config.texture_path.empty()
                            ? procedural_texture(config.width, config.height, config.seed)
                            : load_image(config.texture_path);

  const DeformationModel model =
      DeformationModel::random(config.width, config.height, config.return_interval, config.modes,
                               config.amplitude, config.grid_cols, config.grid_rows, config.seed);
  SequenceArtifacts art = generate_sequence(texture, model, config.frames, config.annotation_cols,
                                            config.annotation_rows, config.margin, workers);

  if (config.degradation().mode != DegradationSpec::Mode::None)
    art.frames = degrade(art.frames, config.degradation(), config.seed, workers);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  for (int f = 0; f < config.frames; ++f) {
    save_png_gray(art.frames[f], (out / frame_name("frame", f, "png")).string());
    write_ground_truth_csv(art.ground_truth.positions[f],
                           (out / frame_name("gt", f, "csv")).string());
  }
  save_mesh(art.mesh, (out / "mesh.txt").string());

  KeyValueList manifest = config.to_key_values();
  manifest.emplace_back("command", "genbench");
  manifest.emplace_back("annotation_points",
                        std::to_string(config.annotation_cols * config.annotation_rows));
  write_manifest(manifest, out);

  log_line("benchmark written to " + out_dir + " (" + std::to_string(config.frames) +
           " frames, " + std::to_string(config.annotation_cols * config.annotation_rows) +
           " ground-truth points)");
  return 0;
}

std::vector<std::vector<Vec2>> load_tracked_dir(const std::string& dir, int* frame_count) {
  std::vector<std::vector<Vec2>> tracked;
  for (int f = 0;; ++f) {
    const fs::path p = fs::path(dir) / frame_name("mesh", f, "txt");
    if (!fs::exists(p)) break;
    tracked.push_back(load_mesh(p.string()).vertices);
  }
  if (tracked.empty()) throw InputError("no mesh_%04d.txt files in " + dir);
  if (frame_count) *frame_count = int(tracked.size());
  return tracked;
}

std::vector<std::vector<Vec2>> load_gt_dir(const std::string& dir) {
  std::vector<std::vector<Vec2>> gt;
  for (int f = 0;; ++f) {
    const fs::path p = fs::path(dir) / frame_name("gt", f, "csv");
    if (!fs::exists(p)) break;
    gt.push_back(read_ground_truth_csv(p.string()));
  }
  if (gt.empty()) throw InputError("no gt_%04d.csv files in " + dir);
  return gt;
}

int cmd_eval(const std::vector<std::string>& runs, const std::string& gt_dir,
             const std::string& out_dir, const std::string& sequence_name, int first_k) {
  const auto gt = load_gt_dir(gt_dir);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<SummaryRow> rows;
  for (const std::string& spec : runs) {
    // "name=dir" or a bare directory.
    std::string name = spec, dir = spec;
    if (const auto eq = spec.find('='); eq != std::string::npos) {
      name = spec.substr(0, eq);
      dir = spec.substr(eq + 1);
    } else {
      name = fs::path(spec).filename().string();
    }
    const auto tracked = load_tracked_dir(dir, nullptr);
    EvaluationOptions options;
    options.first_k = first_k;
    const EvaluationReport report = evaluate_run(tracked, gt, options);
    write_report_csv(report, (out / ("report_" + name + ".csv")).string());
    rows.push_back({name, sequence_name, report.aee, report.aee_first_k});
    char line[160];
    std::snprintf(line, sizeof(line), "%s: AEE %.4f px, first-%d AEE %.4f px", name.c_str(),
                  report.aee, first_k, report.aee_first_k);
    log_line(line);
  }
  write_summary_csv(rows, (out / "summary.csv").string());
  return 0;
}

int cmd_flow(const std::string& sequence_dir, const std::string& cache_dir,
             PipelineConfig config, const std::string& pattern) {
  const SequenceHandle seq = load_sequence(sequence_dir, pattern);
  const int workers = config.workers > 0 ? config.workers : default_workers();
  const std::vector<Image> frames = load_all_frames(seq, workers);
  fs::create_directories(cache_dir);
  build_flow_cache(frames, config.solver, cache_dir, workers, log_line);
  log_line("flow cache complete in " + cache_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-sequence non-rigid mesh tracking with anchor-based drift correction"};
  app.require_subcommand(1);

  // track
  auto* track = app.add_subcommand("track", "Track a mesh through an image sequence");
  std::string track_seq, track_mesh, track_out, track_config, track_pattern;
  bool dump_patches = false, overlays = false;
  std::map<std::string, std::string> track_overrides;
  track->add_option("--sequence", track_seq, "frame directory")->required();
  track->add_option("--mesh", track_mesh, "reference mesh file")->required();
  track->add_option("--out", track_out, "output directory")->required();
  track->add_option("--config", track_config, "key = value config file");
  track->add_option("--pattern", track_pattern, "frame filename pattern, e.g. frame_%04d.png");
  track->add_flag("--dump-patches", dump_patches, "write patches.csv");
  track->add_flag("--overlays", overlays, "write overlay_%04d.png wireframes");
  add_config_options(track, track_overrides, PipelineConfig{});

  // genbench
  auto* gen = app.add_subcommand("genbench", "Generate a synthetic benchmark sequence");
  std::string gen_out, gen_config;
  std::map<std::string, std::string> gen_overrides;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--config", gen_config, "key = value config file");
  add_config_options(gen, gen_overrides, GeneratorConfig{});

  // eval
  auto* eval = app.add_subcommand("eval", "Endpoint-error evaluation against ground truth");
  std::vector<std::string> eval_runs;
  std::string eval_gt, eval_out, eval_sequence = "sequence";
  int eval_first_k = 30;
  eval->add_option("--tracked", eval_runs, "tracked run dir, or name=dir (repeatable)")
      ->required();
  eval->add_option("--gt", eval_gt, "ground-truth directory")->required();
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--sequence-name", eval_sequence, "label used in summary.csv");
  eval->add_option("--first-k", eval_first_k, "frames in the short-range AEE (default 30)");

  // flow
  auto* flow = app.add_subcommand("flow", "Estimate and cache pairwise flow fields only");
  std::string flow_seq, flow_out, flow_config, flow_pattern;
  std::map<std::string, std::string> flow_overrides;
  flow->add_option("--sequence", flow_seq, "frame directory")->required();
  flow->add_option("--out", flow_out, "cache directory for .flo files")->required();
  flow->add_option("--config", flow_config, "key = value config file");
  flow->add_option("--pattern", flow_pattern, "frame filename pattern");
  add_config_options(flow, flow_overrides, PipelineConfig{});

  CLI11_PARSE(app, argc, argv);

  try {
    if (track->parsed())
      return cmd_track(track_seq, track_mesh, track_out,
                       resolve_config<PipelineConfig>(track_config, track_overrides),
                       track_pattern, dump_patches, overlays);
    if (gen->parsed())
      return cmd_genbench(gen_out, resolve_config<GeneratorConfig>(gen_config, gen_overrides));
    if (eval->parsed()) return cmd_eval(eval_runs, eval_gt, eval_out, eval_sequence, eval_first_k);
    if (flow->parsed())
      return cmd_flow(flow_seq, flow_out,
                      resolve_config<PipelineConfig>(flow_config, flow_overrides), flow_pattern);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
