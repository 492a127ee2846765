#ifndef MF2A_RNG_HPP
#define MF2A_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace mf2a {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Splittable counter-based generator (splitmix64 core). A stream is fully
// determined by (seed, stream_id); replaying a stream reproduces the draw
// sequence bit-for-bit on any platform and under any thread layout, since
// the state is a pure counter and every variate is generated by portable
// arithmetic (no libstdc++ distribution objects).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                     mix64(stream_id + 0xd1b54a32d192ed03ULL))),
        seed_(seed),
        stream_id_(stream_id) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // uniform on (0,1]; never returns 0 so log(u) is always finite
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Independent child stream for the same seed; used to key per-(chain,
  // iteration, cluster, block) work so parallel updates stay deterministic.
  RngStream substream(std::uint64_t tag) const {
    return RngStream(seed_, derive_id({stream_id_, tag}));
  }

  static std::uint64_t derive_id(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (std::uint64_t x : parts) h = mix64(h ^ mix64(x + 0x9e3779b97f4a7c15ULL));
    return h;
  }

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace mf2a

#endif
