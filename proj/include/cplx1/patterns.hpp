#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cplx1/cyclic.hpp"
#include "cplx1/linsys.hpp"

namespace cplx1 {
namespace patterns {

// Real function on Z with explicit bounded support.
struct IntFn {
  std::int64_t lo = 0, hi = -1;
  std::vector<double> v;

  IntFn() = default;
  IntFn(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_), v(static_cast<std::size_t>(hi_ - lo_ + 1), 0.0) {}
  double at(std::int64_t x) const { return (x < lo || x > hi) ? 0.0 : v[static_cast<std::size_t>(x - lo)]; }
  double& ref(std::int64_t x) { return v[static_cast<std::size_t>(x - lo)]; }
  // wraparound onto Z_M via the centered window [-M/2, M/2]
  cyclic::CyclicFn wrap(std::int64_t M) const;
};

struct PatternCountResult {
  double value = 0;
  std::string method;  // brute | kernel | fourier
  std::int64_t cost = 0;
};

enum class TMethod { automatic, brute, kernel, fourier };

// E_{n in Z_M^d} prod_i f_i(theta_i(n)) for a surjective linear system theta
// onto Ker_{Z_M}(V). The kernel and fourier routes use V directly.
PatternCountResult t_operator(const linsys::LinearSystem& theta, const linsys::IntMatrix& V,
                              const std::vector<cyclic::CyclicFn>& fs, TMethod method = TMethod::automatic,
                              std::int64_t budget = 20'000'000);

// M^{-(t-r)} sum over integer solutions in [-2N, 2N]^t of Vy = 0 of the
// product; requires M > 2 |V| N.
double t_over_z(const linsys::IntMatrix& V, const std::vector<IntFn>& fs, std::int64_t N, std::int64_t M);

// exact solution counts over a finite set A
std::int64_t count_solutions(const linsys::IntMatrix& V, const std::vector<std::int64_t>& A,
                             std::int64_t budget = 2'000'000'000);
std::int64_t count_distinct_solutions(const linsys::IntMatrix& V, const std::vector<std::int64_t>& A,
                                      std::int64_t budget = 2'000'000'000);

// nested system of regular Bohr sets with recorded ratios
struct BohrChain {
  std::vector<cyclic::BohrSet> sets;  // B_0, ..., B_q
  std::vector<double> rho;            // rho_i with B_i <= B_{i-1 | rho_i}
};

// Build a chain of regular nested dilates under B0 with ratios in
// [rho/2, rho], q additional levels.
BohrChain make_chain(const cyclic::BohrSet& B0, int q, double rho);

struct TBohrResult {
  double value = 0;
  double ci95 = 0;  // half-width; 0 in exact mode
  bool exact = true;
  std::int64_t cost = 0;
};

// E_{x0 in B0, ..., xq in Bq} prod_i f_i(phi_i(x)) where phi_i = x0 + psi_i(x).
TBohrResult t_bohr(const linsys::LinearSystem& psi, const BohrChain& chain,
                   const std::vector<const cyclic::CyclicFn*>& fs, std::int64_t budget = 100'000'000,
                   std::uint64_t seed = 1, std::int64_t samples = 200'000);

// exact count of tuples x in B1 x ... x Bq, x0 in B0 with all phi_i(x) in A
std::int64_t count_bohr_configs(const linsys::LinearSystem& psi, const BohrChain& chain,
                                const std::vector<std::int64_t>& A_elems, std::int64_t M,
                                std::int64_t budget = 400'000'000);

// newline-separated set files
std::vector<std::int64_t> parse_set(const std::string& text);
std::string format_set(const std::vector<std::int64_t>& A);

}  // namespace patterns
}  // namespace cplx1
