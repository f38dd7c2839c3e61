#pragma once

#include <filesystem>

#include "kgi/training.hpp"

namespace kgi {

// Binary container:
//   "KGICKPT\n" | u32 format version | u64 header length | JSON header |
//   W1 b1 W2 b2 W3 b3, Adam m (same order), Adam v (same order)
// Integers and tensors are little-endian; tensors are row-major IEEE-754
// doubles, so save/load is bit-exact. The header holds both configs, the
// Adam step, completed epochs and the loss history.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path);
TrainingState load_checkpoint(const std::filesystem::path& path);

}  // namespace kgi
