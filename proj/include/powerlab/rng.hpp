#pragma once

#include <cstdint>
#include <random>

namespace powerlab {

using Rng = std::mt19937_64;

// Independent per-purpose streams derived from one master seed. Each stream is
// keyed by purpose, so adding draws to one never shifts another.
enum class Stream : std::uint32_t {
  Channel = 1,
  Exploration = 2,
  Replay = 3,
  Init = 4,
  Policy = 5,
  Evaluation = 6,
  OracleCheck = 7,
};

Rng make_stream(std::uint64_t master_seed, Stream purpose);

struct RngStreams {
  explicit RngStreams(std::uint64_t master_seed);

  Rng channel;
  Rng exploration;
  Rng replay;
  Rng init;
  Rng policy;
  Rng evaluation;
};

}  // namespace powerlab
