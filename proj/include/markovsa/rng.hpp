#pragma once

#include <cstdint>
#include <random>

namespace markovsa {

// splitmix64 finalizer. Derives independent stream seeds from
// (master_seed, index) pairs; results are portable across machines.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Deterministic random stream. mt19937_64 is fully specified by the
// standard; the variate transforms are hand-rolled because the std::
// distributions are implementation-defined and would break
// bit-reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer on [0, n), n > 0; rejection keeps it bias-free
  std::int64_t uniform_int(std::int64_t n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % un);
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  // standard normal, Marsaglia polar method
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace markovsa
