#include "meshtrack/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <regex>

#include "meshtrack/errors.hpp"
#include "meshtrack/image_io.hpp"
#include "meshtrack/parallel.hpp"

namespace fs = std::filesystem;

namespace meshtrack {

namespace {

// Turns "frame_%04d.png" into a regex capturing the frame number.
std::regex pattern_to_regex(const std::string& pattern) {
  std::string re;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '%') {
      std::size_t j = i + 1;
      while (j < pattern.size() && (std::isdigit((unsigned char)pattern[j]) || pattern[j] == '0'))
        ++j;
      if (j < pattern.size() && pattern[j] == 'd') {
        re += "([0-9]+)";
        i = j;
        continue;
      }
      throw InputError("unsupported frame pattern: " + pattern);
    }
    if (std::strchr(".^$|()[]{}*+?\\", c)) re += '\\';
    re += c;
  }
  return std::regex(re);
}

}  // namespace

SequenceHandle load_sequence(const std::string& directory, const std::string& pattern,
                             int reference_index) {
  if (!fs::is_directory(directory))
    throw InputError("sequence directory not found: " + directory);

  const std::regex re = pattern.empty()
                            ? std::regex(R"(.*?([0-9]+)\.(png|pgm))")
                            : pattern_to_regex(pattern);

  std::vector<std::pair<long, std::string>> found;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, re))
      found.emplace_back(std::stol(m[1].str()), entry.path().string());
  }
  std::sort(found.begin(), found.end());

  SequenceHandle seq;
  for (auto& [idx, path] : found) seq.frame_paths.push_back(path);
  if (seq.frame_count() < 2)
    throw InputError("sequence needs at least 2 frames, found " +
                     std::to_string(seq.frame_count()) + " in " + directory);
  if (reference_index < 0 || reference_index >= seq.frame_count())
    throw InputError("reference index out of range");
  seq.reference_index = reference_index;

  const auto [w0, h0] = probe_image_size(seq.frame_paths[0]);
  for (int i = 1; i < seq.frame_count(); ++i) {
    const auto [w, h] = probe_image_size(seq.frame_paths[i]);
    if (w != w0 || h != h0)
      throw InputError("frame dimension mismatch: " + seq.frame_paths[i] + " is " +
                       std::to_string(w) + "x" + std::to_string(h) + ", expected " +
                       std::to_string(w0) + "x" + std::to_string(h0));
  }
  return seq;
}

Image load_frame(const SequenceHandle& seq, int index) {
  return load_image(seq.frame_paths.at(index));
}

std::vector<Image> load_all_frames(const SequenceHandle& seq, int workers) {
  std::vector<Image> frames(seq.frame_count());
  parallel_for(frames.size(), workers,
               [&](std::size_t i) { frames[i] = load_frame(seq, int(i)); });
  for (int i = 1; i < seq.frame_count(); ++i) {
    if (!frames[i].same_size(frames[0]))
      throw InputError("frame dimension mismatch: " + seq.frame_paths[i] + " is " +
                       std::to_string(frames[i].width()) + "x" +
                       std::to_string(frames[i].height()) + ", expected " +
                       std::to_string(frames[0].width()) + "x" +
                       std::to_string(frames[0].height()));
  }
  return frames;
}

}  // namespace meshtrack
