#pragma once

#include <cstdint>
#include <vector>

#include "cplx1/rational.hpp"

namespace cplx1 {

// Primes up to n (inclusive), simple sieve of Eratosthenes.
std::vector<std::int64_t> primes_upto(std::int64_t n);

// Least-prime-factor table for [0, n]; lpf[0] = lpf[1] = 0.
std::vector<std::int32_t> lpf_table(std::int64_t n);

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime(std::int64_t n);

// Smallest prime p with lo < p <= hi, or 0 if none.
std::int64_t prime_in_range(std::int64_t lo, std::int64_t hi);

// Product of all primes <= omega (empty product = 1).
BigInt primorial(double omega);

// Euler phi of a squarefree primorial W = prod_{p <= omega} p.
BigInt primorial_phi(double omega);

// Distinct prime factors of v >= 1, using an LPF table where it applies and
// trial division beyond it. Throws BudgetError when v cannot be factored
// within `trial_budget` divisions.
std::vector<std::int64_t> distinct_prime_factors(std::int64_t v,
                                                 const std::vector<std::int32_t>& lpf,
                                                 std::int64_t trial_budget = 1'000'000);

}  // namespace cplx1
