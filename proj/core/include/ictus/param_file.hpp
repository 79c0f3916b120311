#pragma once

// Versioned parameter container shared by LSTM checkpoints and Kalman models.
//
// Layout (little-endian): "ICTP", u32 version, u64 + bytes kind,
// u64 + bytes JSON metadata, u64 count, f64[count] values.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ictus {

inline constexpr std::uint32_t kParamFormatVersion = 1;

struct ParamFile {
  std::string kind;       // "lstm" or "kalman"
  nlohmann::json meta;    // architecture / shapes
  std::vector<double> values;
};

void write_params(const ParamFile& file, const std::filesystem::path& path);
ParamFile read_params(const std::filesystem::path& path);

/// Peeks at the kind tag without reading the values.
std::string param_kind(const std::filesystem::path& path);

}  // namespace ictus
