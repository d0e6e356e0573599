#include "powerlab/rng.hpp"

namespace powerlab {

Rng make_stream(std::uint64_t master_seed, Stream purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(purpose), 0x9e3779b9u};
  return Rng(seq);
}

RngStreams::RngStreams(std::uint64_t master_seed)
    : channel(make_stream(master_seed, Stream::Channel)),
      exploration(make_stream(master_seed, Stream::Exploration)),
      replay(make_stream(master_seed, Stream::Replay)),
      init(make_stream(master_seed, Stream::Init)),
      policy(make_stream(master_seed, Stream::Policy)),
      evaluation(make_stream(master_seed, Stream::Evaluation)) {}

}  // namespace powerlab
