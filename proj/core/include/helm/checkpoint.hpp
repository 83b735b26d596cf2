#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "helm/mlp.hpp"

namespace helm {

/// Everything needed to resume training or evaluate a policy.
///
/// Binary layout (little-endian, version 1):
///   magic "HELMCKPT" | u32 version | u32 iteration | i64 global_step
///   | string rng_state | net actor | net critic | adam actor | adam critic
/// string: u64 length + bytes. net: u32 layer count, per layer the weight
/// (u32 rows, u32 cols, row-major f64) and bias (u32 rows, u32 1, f64), then
/// log_std as (u32 rows, u32 1, f64). adam: i64 step, f64 beta1, beta2,
/// epsilon, then first and second moments as nets.
struct Checkpoint {
  std::uint32_t iteration = 0;
  std::int64_t global_step = 0;
  std::string rng_state;
  MlpParams actor;
  MlpParams critic;
  AdamState actor_adam;
  AdamState critic_adam;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws InvalidParameter when the file is missing or malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace helm
