#include "shew/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shew {

const char* stream_tag_name(StreamTag tag) {
  switch (tag) {
    case StreamTag::W1: return "W1";
    case StreamTag::W2: return "W2";
    case StreamTag::Aux: return "AUX";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_key(const SeedSpec& stream, std::int64_t step_index) {
  std::uint64_t state = stream.master_seed;
  std::uint64_t key = splitmix64(state);
  state = key ^ static_cast<std::uint64_t>(stream.replica_id);
  key = splitmix64(state);
  state = key ^ static_cast<std::uint64_t>(stream.tag);
  key = splitmix64(state);
  state = key ^ static_cast<std::uint64_t>(step_index);
  return splitmix64(state);
}

GaussianStream::GaussianStream(std::uint64_t key) {
  // xoshiro256++ seeded from four splitmix64 outputs, as its authors recommend.
  for (auto& s : s_) s = splitmix64(key);
}

std::uint64_t GaussianStream::next_u64() {
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double GaussianStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianStream::standard_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Marsaglia polar method.
  for (;;) {
    double u = 2.0 * uniform() - 1.0;
    double v = 2.0 * uniform() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      double factor = std::sqrt(-2.0 * std::log(s) / s);
      cached_ = v * factor;
      has_cached_ = true;
      return u * factor;
    }
  }
}

void GaussianStream::fill_standard_normal(Vec& out) {
  for (int i = 0; i < out.size(); ++i) out[i] = standard_normal();
}

NoiseIncrement sample_increment(const CircleGrid& grid, double dt, const SeedSpec& stream,
                                std::int64_t step_index) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
  NoiseIncrement inc{grid, dt, Vec(grid.n_x)};
  GaussianStream g(derive_stream_key(stream, step_index));
  g.fill_standard_normal(inc.values);
  inc.values *= std::sqrt(grid.dx * dt);
  return inc;
}

double white_noise_pairing(const NoiseIncrement& increment, const Field& field) {
  require_same_grid(increment.grid, field.grid, "white_noise_pairing");
  return (increment.values * field.values).sum();
}

std::string SeedManifest::to_json() const {
  std::ostringstream os;
  os << "{\"master_seed\":" << master_seed << ",\"replicas\":" << replicas
     << ",\"stream_tags\":[";
  for (size_t i = 0; i < stream_tags.size(); ++i)
    os << (i ? "," : "") << '"' << stream_tags[i] << '"';
  os << "]}";
  return os.str();
}

}  // namespace shew
