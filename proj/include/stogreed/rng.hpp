#ifndef STOGREED_RNG_HPP
#define STOGREED_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace stogreed {

/// Seeded random stream with portable draw semantics.
///
/// All randomness in the library flows through this class so that a fixed
/// (seed, stream) pair reproduces the exact same sequence of doubles on any
/// platform. The raw generator is mt19937_64; uniform and Gaussian variates
/// are derived by explicit arithmetic rather than the implementation-defined
/// std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Independent stream derived from (seed, stream_id), e.g. one per trial.
  static Rng derive(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(derive_seed(seed, stream_id));
  }

  /// The raw seed value behind derive(); usable to seed nested components.
  static std::uint64_t derive_seed(std::uint64_t seed,
                                   std::uint64_t stream_id) {
    return mix(mix(seed ^ 0x9e3779b97f4a7c15ull) + stream_id);
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * n) % n;
  }

  /// Standard normal via the polar Box-Muller transform.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double r = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * r;
    have_spare_ = true;
    return u * r;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace stogreed

#endif  // STOGREED_RNG_HPP
