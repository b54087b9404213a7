#include "meshtrack/flow_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "meshtrack/errors.hpp"

namespace meshtrack {

// On-disk layout is little-endian; this code assumes a little-endian host
// (checked once at runtime).
namespace {
bool host_is_little_endian() {
  const std::uint16_t probe = 0x0001;
  std::uint8_t byte;
  std::memcpy(&byte, &probe, 1);
  return byte == 1;
}
}  // namespace

void write_flo(const FlowField& field, const std::string& path) {
  if (!host_is_little_endian()) throw std::runtime_error("write_flo: big-endian host unsupported");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write flow file: " + path);
  const float magic = kFloMagic;
  const std::int32_t w = field.width();
  const std::int32_t h = field.height();
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(field.raw().data()),
            std::streamsize(field.raw().size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write: " + path);
}

FlowField read_flo(const std::string& path) {
  if (!host_is_little_endian()) throw std::runtime_error("read_flo: big-endian host unsupported");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open flow file: " + path);
  float magic = 0.0f;
  std::int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || magic != kFloMagic)
    throw InputError("not a .flo file (bad magic): " + path);
  if (w < 1 || h < 1 || w > 1 << 20 || h > 1 << 20)
    throw InputError("implausible .flo dimensions: " + path);
  FlowField field(w, h);
  in.read(reinterpret_cast<char*>(field.raw().data()),
          std::streamsize(field.raw().size() * sizeof(float)));
  if (!in) throw InputError("truncated .flo file: " + path);
  return field;
}

std::string flo_cache_name(bool forward, int pair_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "flow_%c_%04d.flo", forward ? 'f' : 'b', pair_index);
  return buf;
}

}  // namespace meshtrack
