#pragma once

#include <string>

#include "meshtrack/flow_field.hpp"

namespace meshtrack {

// Middlebury .flo: little-endian float32 magic 202021.25, int32 width,
// int32 height, then row-major interleaved float32 (u, v) pairs.
constexpr float kFloMagic = 202021.25f;

void write_flo(const FlowField& field, const std::string& path);
FlowField read_flo(const std::string& path);

// Cache naming: pair index i covers frames (i, i+1); the forward file holds
// w_{i->i+1} and the backward file holds w_{i+1->i}.
std::string flo_cache_name(bool forward, int pair_index);

}  // namespace meshtrack
