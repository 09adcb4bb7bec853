#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "osmcaa/model.hpp"

namespace osmcaa {

// Tagged binary snapshot of a training run: magic "OSMCAA1", dimensions,
// every parameter tensor and optimizer velocity as little-endian 64-bit
// floats, the epoch counter and an echo of the run's flat config. The
// round trip is bit-exact, which is what makes resume deterministic.
struct Checkpoint {
  ModelDims dims;
  std::uint64_t next_epoch = 0;
  double lr = 0.001;
  double momentum = 0.9;
  ModelParams params;
  ParamTensors velocity;
  std::string config_echo;
};

inline constexpr char kCheckpointMagic[8] = {'O', 'S', 'M', 'C', 'A', 'A', '1', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace osmcaa
