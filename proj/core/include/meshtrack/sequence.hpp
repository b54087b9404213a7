#pragma once

#include <string>
#include <vector>

#include "meshtrack/image.hpp"

namespace meshtrack {

// An ordered view of the frame files of one sequence. Frames are ordered by
// the numeric index embedded in their filename; frame 0 is the reference
// unless overridden.
struct SequenceHandle {
  std::vector<std::string> frame_paths;
  int reference_index = 0;

  int frame_count() const { return int(frame_paths.size()); }
};

// Scans `directory` for frames matching `pattern` (a printf-style name such
// as "frame_%04d.png"; empty picks up any .png/.pgm with a trailing number).
// Requires at least two frames, all with identical dimensions; the dimension
// check decodes every frame header once.
SequenceHandle load_sequence(const std::string& directory, const std::string& pattern = "",
                             int reference_index = 0);

Image load_frame(const SequenceHandle& seq, int index);

// Eagerly loads every frame (in parallel). Frames are immutable afterwards
// and shared read-only by all pipeline stages.
std::vector<Image> load_all_frames(const SequenceHandle& seq, int workers);

}  // namespace meshtrack
