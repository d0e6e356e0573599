#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "powerlab/errors.hpp"
#include "powerlab/neural.hpp"

namespace powerlab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'P', 'W', 'L', 'A', 'B', 'Q', 'N', '\0'};
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint64_t kMaxWidth = 1u << 20;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigError("checkpoint: truncated file");
  return value;
}

}  // namespace

void write_checkpoint(const MlpNetwork& net, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_dims().size()));
  for (std::size_t d : net.layer_dims()) put<std::uint64_t>(out, d);
  const auto values = net.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw ConfigError("checkpoint: write failed");
}

MlpNetwork read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("checkpoint: bad magic header");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in);
  if (count < 2 || count > kMaxLayers) throw ConfigError("checkpoint: bad layer count");
  std::vector<std::size_t> dims(count);
  for (auto& d : dims) {
    const auto w = get<std::uint64_t>(in);
    if (w == 0 || w > kMaxWidth) throw ConfigError("checkpoint: bad layer width");
    d = static_cast<std::size_t>(w);
  }
  MlpNetwork net(dims);
  auto values = net.values();
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw ConfigError("checkpoint: truncated parameter block");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ConfigError("checkpoint: trailing bytes after parameter block");
  }
  return net;
}

void save_checkpoint(const MlpNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(net, out);
}

MlpNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace powerlab
