#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shew/circle_domain.hpp"

namespace shew {

enum class StreamTag : std::uint64_t { W1 = 1, W2 = 2, Aux = 3 };

const char* stream_tag_name(StreamTag tag);

/// Identifies one independent noise stream. Identical triples reproduce the
/// same draws bit-exactly; distinct (replica_id, tag) pairs decorrelate.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::int32_t replica_id = 0;
  StreamTag tag = StreamTag::W1;

  SeedSpec with_tag(StreamTag t) const { return SeedSpec{master_seed, replica_id, t}; }
  SeedSpec with_replica(std::int32_t r) const { return SeedSpec{master_seed, r, tag}; }

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// One time-slice of Brownian-sheet cell increments: values[i] ~ N(0, dx*dt), iid.
struct NoiseIncrement {
  CircleGrid grid;
  double dt = 0.0;
  Vec values;
};

// splitmix64 finalizer; the standard 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t& state);

/// Counter-based key for one (stream, step) slot.
std::uint64_t derive_stream_key(const SeedSpec& stream, std::int64_t step_index);

/// xoshiro256++ with Marsaglia polar Gaussians. Self-contained so draws are
/// bit-identical across platforms and standard-library versions.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key);

  double uniform();          // [0,1)
  double standard_normal();  // N(0,1)
  void fill_standard_normal(Vec& out);

 private:
  std::uint64_t next_u64();
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// n_x independent N(0, dx*dt) draws, fully determined by (stream, step_index).
NoiseIncrement sample_increment(const CircleGrid& grid, double dt, const SeedSpec& stream,
                                std::int64_t step_index);

/// One-step discrete stochastic integral sum_i field_i * dW_i (the increment
/// already carries the cell measure, so no dx factor).
double white_noise_pairing(const NoiseIncrement& increment, const Field& field);

/// Seed manifest emitted alongside every experiment.
struct SeedManifest {
  std::uint64_t master_seed = 0;
  int replicas = 1;
  std::vector<std::string> stream_tags{"W1", "W2", "AUX"};

  std::string to_json() const;
  friend bool operator==(const SeedManifest&, const SeedManifest&) = default;
};

}  // namespace shew
