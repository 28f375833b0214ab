#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cplx1 {

// Errors are mapped to CLI exit codes: validation=1, budget=2, certification=3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>(static_cast<__int128>(a) * b % m);
}

inline std::int64_t pow_mod(std::int64_t a, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1 % m;
  a %= m;
  if (a < 0) a += m;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

// canonical residue in [0, m)
inline std::int64_t mod_pos(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// centered representative in (-m/2, m/2]
inline std::int64_t mod_centered(std::int64_t a, std::int64_t m) {
  std::int64_t r = mod_pos(a, m);
  return 2 * r > m ? r - m : r;
}

// Compensated (Kahan) accumulator for long sums of O(log N)-sized terms.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

// Deterministic, platform-independent generator (splitmix64 core).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace cplx1
