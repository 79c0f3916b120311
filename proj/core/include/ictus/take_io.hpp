#pragma once

// Take files.
//
// Layout (little-endian):
//   "ICTK"            4-byte magic
//   u32               format version (1)
//   u64 + bytes       JSON metadata: subject_id, tempo_factor, rate_hz,
//                     keypoints {names, dims}, mirrored, frame_count,
//                     bar_count, beat_count, end_time
//   f64[frames * c]   normalized positions, frame-major, c = coord_count
//   (i32, f64)[frames] labels: bar, phase
//   f64[beat_count]   beat times
//   f64[bar_count]    bar start times
//
// Velocities and accelerations are recomputed from the positions on read,
// which reproduces them exactly.

#include <filesystem>
#include <vector>

#include "ictus/synth.hpp"

namespace ictus {

inline constexpr std::uint32_t kTakeFormatVersion = 1;

void write_take(const Take& take, const std::filesystem::path& path);

/// Throws Errc::format (bad magic or metadata), Errc::version_mismatch,
/// Errc::truncated, or Errc::invariant when the content is inconsistent.
Take read_take(const std::filesystem::path& path);

/// Checks the stored-take invariants; throws Errc::invariant.
void validate_take(const Take& take);

/// All *.take files under `dir`, sorted by file name.
std::vector<std::filesystem::path> list_takes(const std::filesystem::path& dir);
std::vector<Take> read_takes(const std::filesystem::path& dir);

}  // namespace ictus
