#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "yatt/model.hpp"

namespace yatt {

// Each failure mode gets its own type so callers (and tests) can tell a stale
// format from a damaged file from the wrong model kind.
struct CheckpointVersionError : DataError {
  using DataError::DataError;
};
struct CheckpointTruncatedError : DataError {
  using DataError::DataError;
};
struct CheckpointChecksumError : DataError {
  using DataError::DataError;
};
struct CheckpointKindError : ConfigError {
  using ConfigError::ConfigError;
};

struct Checkpoint {
  ModelConfig config;
  ModelWeights weights;
  Scaler scaler;
  std::uint64_t seed = 0;  // run seed; lets evaluate rebuild the exact split
};

/// Single-file format: "YATT1" magic, a text header (config, scaler, seed,
/// parameter count, payload checksum), then the parameters as little-endian
/// 64-bit floats in serialization order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expect_kind = std::nullopt);

}  // namespace yatt
