#include "meshtrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "meshtrack/errors.hpp"

namespace meshtrack {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects an unsigned integer, got '" + value +
                     "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValueList read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  KeyValueList entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

void write_key_value_file(const KeyValueList& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

void PipelineConfig::validate() const {
  if (mode != "baseline" && mode != "anchor-frames" && mode != "apo")
    throw InputError("config: mode must be baseline, anchor-frames or apo");
  if (feature_fraction < 0.0 || feature_fraction > 1.0)
    throw InputError("config: feature_fraction must be in [0,1]");
  if (!(tau > 0.0)) throw InputError("config: tau must be positive");
  if (!(eta > 0.0)) throw InputError("config: eta must be positive");
  if (!(match_ratio > 0.0 && match_ratio <= 1.0))
    throw InputError("config: match_ratio must be in (0,1]");
  if (workers < 0) throw InputError("config: workers must be >= 0");
  if (anchor_policy.min_spacing < 1) throw InputError("config: anchor_min_spacing must be >= 1");
  if (anchor_policy.min_matches < 1) throw InputError("config: anchor_min_matches must be >= 1");
  if (!(patch_search_radius > 0.0) || patch_max_search_radius < patch_search_radius)
    throw InputError("config: bad patch search radii");
  try {
    weights.validate();
    solver.validate();
  } catch (const std::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "mode") mode = value;
  else if (key == "no_anchor_frames") no_anchor_frames = to_bool(key, value);
  else if (key == "no_patches") no_patches = to_bool(key, value);
  else if (key == "feature_fraction") feature_fraction = to_double(key, value);
  else if (key == "pyramid_levels") solver.pyramid_levels = to_int(key, value);
  else if (key == "pyramid_scale") solver.pyramid_scale = to_double(key, value);
  else if (key == "solver_iterations") solver.iterations = to_int(key, value);
  else if (key == "solver_warps") solver.warps = to_int(key, value);
  else if (key == "solver_smoothness") solver.smoothness = to_double(key, value);
  else if (key == "solver_omega") solver.omega = to_double(key, value);
  else if (key == "detector_contrast") detector.contrast_threshold = to_double(key, value);
  else if (key == "detector_edge_ratio") detector.edge_threshold = to_double(key, value);
  else if (key == "match_ratio") match_ratio = to_double(key, value);
  else if (key == "tau") tau = to_double(key, value);
  else if (key == "alpha1") weights.alpha1 = to_double(key, value);
  else if (key == "alpha2") weights.alpha2 = to_double(key, value);
  else if (key == "alpha3") weights.alpha3 = to_double(key, value);
  else if (key == "eta") eta = to_double(key, value);
  else if (key == "eta_auto") eta_auto = to_bool(key, value);
  else if (key == "patch_search_radius") patch_search_radius = to_double(key, value);
  else if (key == "patch_max_search_radius") patch_max_search_radius = to_double(key, value);
  else if (key == "anchor_threshold_cap") anchor_policy.threshold_cap = to_double(key, value);
  else if (key == "anchor_percentile") anchor_policy.percentile = to_double(key, value);
  else if (key == "anchor_min_spacing") anchor_policy.min_spacing = to_int(key, value);
  else if (key == "anchor_min_matches") anchor_policy.min_matches = to_int(key, value);
  else if (key == "workers") workers = to_int(key, value);
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "cache_dir") cache_dir = value;
  else if (key == "feature_cache_dir") feature_cache_dir = value;
  else throw InputError("config: unknown key '" + key + "'");
}

void PipelineConfig::apply(const KeyValueList& entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

KeyValueList PipelineConfig::to_key_values() const {
  return {
      {"mode", mode},
      {"no_anchor_frames", no_anchor_frames ? "true" : "false"},
      {"no_patches", no_patches ? "true" : "false"},
      {"feature_fraction", fmt(feature_fraction)},
      {"pyramid_levels", std::to_string(solver.pyramid_levels)},
      {"pyramid_scale", fmt(solver.pyramid_scale)},
      {"solver_iterations", std::to_string(solver.iterations)},
      {"solver_warps", std::to_string(solver.warps)},
      {"solver_smoothness", fmt(solver.smoothness)},
      {"solver_omega", fmt(solver.omega)},
      {"detector_contrast", fmt(detector.contrast_threshold)},
      {"detector_edge_ratio", fmt(detector.edge_threshold)},
      {"match_ratio", fmt(match_ratio)},
      {"tau", fmt(tau)},
      {"alpha1", fmt(weights.alpha1)},
      {"alpha2", fmt(weights.alpha2)},
      {"alpha3", fmt(weights.alpha3)},
      {"eta", fmt(eta)},
      {"eta_auto", eta_auto ? "true" : "false"},
      {"patch_search_radius", fmt(patch_search_radius)},
      {"patch_max_search_radius", fmt(patch_max_search_radius)},
      {"anchor_threshold_cap", fmt(anchor_policy.threshold_cap)},
      {"anchor_percentile", fmt(anchor_policy.percentile)},
      {"anchor_min_spacing", std::to_string(anchor_policy.min_spacing)},
      {"anchor_min_matches", std::to_string(anchor_policy.min_matches)},
      {"workers", std::to_string(workers)},
      {"seed", std::to_string(seed)},
      {"cache_dir", cache_dir},
      {"feature_cache_dir", feature_cache_dir},
  };
}

void GeneratorConfig::validate() const {
  if (width < 32 || height < 32) throw InputError("genbench: frame size must be >= 32x32");
  if (frames < 2) throw InputError("genbench: need at least 2 frames");
  if (annotation_cols < 2 || annotation_rows < 2)
    throw InputError("genbench: annotation lattice must be at least 2x2");
  if (margin < 0 || 2 * margin >= std::min(width, height))
    throw InputError("genbench: bad margin");
  if (return_interval < 2) throw InputError("genbench: return_interval must be >= 2");
  if (modes < 1) throw InputError("genbench: modes must be >= 1");
  if (amplitude < 0) throw InputError("genbench: amplitude must be >= 0");
  if (grid_cols < 2 || grid_rows < 2) throw InputError("genbench: control grid at least 2x2");
  if (gaussian_sigma < 0) throw InputError("genbench: gaussian_sigma must be >= 0");
  if (sp_density < 0 || sp_density > 1) throw InputError("genbench: sp_density in [0,1]");
  if (occluder_size < 0) throw InputError("genbench: occluder_size must be >= 0");
  DegradationSpec::parse_mode(degrade_mode);
}

void GeneratorConfig::set(const std::string& key, const std::string& value) {
  if (key == "width") width = to_int(key, value);
  else if (key == "height") height = to_int(key, value);
  else if (key == "frames") frames = to_int(key, value);
  else if (key == "annotation_cols") annotation_cols = to_int(key, value);
  else if (key == "annotation_rows") annotation_rows = to_int(key, value);
  else if (key == "margin") margin = to_double(key, value);
  else if (key == "return_interval") return_interval = to_int(key, value);
  else if (key == "modes") modes = to_int(key, value);
  else if (key == "amplitude") amplitude = to_double(key, value);
  else if (key == "grid_cols") grid_cols = to_int(key, value);
  else if (key == "grid_rows") grid_rows = to_int(key, value);
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "texture_path") texture_path = value;
  else if (key == "degrade_mode") degrade_mode = value;
  else if (key == "gaussian_sigma") gaussian_sigma = to_double(key, value);
  else if (key == "sp_density") sp_density = to_double(key, value);
  else if (key == "occluder_size") occluder_size = to_int(key, value);
  else throw InputError("genbench config: unknown key '" + key + "'");
}

void GeneratorConfig::apply(const KeyValueList& entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

KeyValueList GeneratorConfig::to_key_values() const {
  return {
      {"width", std::to_string(width)},
      {"height", std::to_string(height)},
      {"frames", std::to_string(frames)},
      {"annotation_cols", std::to_string(annotation_cols)},
      {"annotation_rows", std::to_string(annotation_rows)},
      {"margin", fmt(margin)},
      {"return_interval", std::to_string(return_interval)},
      {"modes", std::to_string(modes)},
      {"amplitude", fmt(amplitude)},
      {"grid_cols", std::to_string(grid_cols)},
      {"grid_rows", std::to_string(grid_rows)},
      {"seed", std::to_string(seed)},
      {"texture_path", texture_path},
      {"degrade_mode", degrade_mode},
      {"gaussian_sigma", fmt(gaussian_sigma)},
      {"sp_density", fmt(sp_density)},
      {"occluder_size", std::to_string(occluder_size)},
  };
}

DegradationSpec GeneratorConfig::degradation() const {
  DegradationSpec spec;
  spec.mode = DegradationSpec::parse_mode(degrade_mode);
  spec.gaussian_sigma = gaussian_sigma;
  spec.sp_density = sp_density;
  spec.occluder_width = occluder_size;
  spec.occluder_height = occluder_size;
  return spec;
}

}  // namespace meshtrack
