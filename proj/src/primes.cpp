#include "cplx1/primes.hpp"

#include <algorithm>

#include "cplx1/numeric.hpp"

namespace cplx1 {

std::vector<std::int64_t> primes_upto(std::int64_t n) {
  std::vector<std::int64_t> ps;
  if (n < 2) return ps;
  std::vector<bool> comp(static_cast<std::size_t>(n) + 1, false);
  for (std::int64_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    ps.push_back(i);
    for (std::int64_t j = i * i; j <= n; j += i) comp[j] = true;
  }
  return ps;
}

std::vector<std::int32_t> lpf_table(std::int64_t n) {
  std::vector<std::int32_t> lpf(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 2; i <= n; ++i) {
    if (lpf[i] != 0) continue;
    for (std::int64_t j = i; j <= n; j += i)
      if (lpf[j] == 0) lpf[j] = static_cast<std::int32_t>(i);
  }
  return lpf;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  std::int64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  // Sinclair's deterministic witness set for 64-bit integers.
  for (std::int64_t a : {2, 325, 9375, 28178, 450775, 9780504, 1795265022}) {
    std::int64_t x = pow_mod(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

std::int64_t prime_in_range(std::int64_t lo, std::int64_t hi) {
  for (std::int64_t p = lo + 1; p <= hi; ++p)
    if (is_prime(p)) return p;
  return 0;
}

BigInt primorial(double omega) {
  BigInt w = 1;
  if (omega >= 2) {
    for (std::int64_t p : primes_upto(static_cast<std::int64_t>(omega))) w *= p;
  }
  return w;
}

BigInt primorial_phi(double omega) {
  BigInt phi = 1;
  if (omega >= 2) {
    for (std::int64_t p : primes_upto(static_cast<std::int64_t>(omega))) phi *= (p - 1);
  }
  return phi;
}

std::vector<std::int64_t> distinct_prime_factors(std::int64_t v,
                                                 const std::vector<std::int32_t>& lpf,
                                                 std::int64_t trial_budget) {
  std::vector<std::int64_t> ps;
  if (v < 1) throw ValidationError("factorization argument must be >= 1");
  while (v > 1 && v < static_cast<std::int64_t>(lpf.size())) {
    std::int64_t p = lpf[v];
    ps.push_back(p);
    while (v % p == 0) v /= p;
  }
  std::int64_t d = 2, used = 0;
  while (v > 1) {
    if (d * d > v) {
      ps.push_back(v);
      break;
    }
    if (++used > trial_budget) throw BudgetError("factorization budget exceeded");
    if (v % d == 0) {
      ps.push_back(d);
      while (v % d == 0) v /= d;
    }
    ++d;
  }
  std::sort(ps.begin(), ps.end());
  return ps;
}

}  // namespace cplx1
