// Counter-based Gaussian streams.
//
// Philox4x32-10 keyed by the 64-bit base seed. A stream is addressed by two
// 32-bit words (e.g. epsilon index and sample index), so every trajectory of
// an ensemble owns an independent sequence that does not depend on the order
// or the thread in which trajectories are run.

#ifndef LLB_RNG_HPP
#define LLB_RNG_HPP

#include <array>
#include <cstdint>

namespace llb {

struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t major = 0;
  std::uint32_t minor = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class RngStream {
 public:
  explicit RngStream(StreamId id) : id_(id) {}
  RngStream(std::uint64_t seed, std::uint32_t major, std::uint32_t minor)
      : id_{seed, major, minor} {}

  /// Uniform double in (0, 1], 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller; consumes uniforms in pairs.
  double normal();

  const StreamId& id() const { return id_; }
  std::uint64_t position() const { return block_; }

 private:
  std::uint64_t next_u64();

  StreamId id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace llb

#endif  // LLB_RNG_HPP
