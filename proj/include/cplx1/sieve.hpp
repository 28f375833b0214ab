#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "cplx1/linsys.hpp"
#include "cplx1/rational.hpp"

namespace cplx1 {
namespace sieve {

struct WTrickContext {
  std::int64_t N = 0;
  double omega = 0;
  BigInt W = 1;
  std::int64_t b = 1;
  std::int64_t w64 = 1;     // W, range-checked
  double phi_over_w = 1.0;  // prod_{p <= omega} (1 - 1/p)
};

WTrickContext make_context(std::int64_t N, double omega, std::int64_t b);

struct GpyConfig {
  double eta = 0.05;
  double R = 2.0;       // N^eta
  double L = 30.0;      // truncation of the xi-integrals
  int order = 12;       // quadrature order per panel
  double logR() const;
};

GpyConfig make_config(std::int64_t N, double eta, double L = 30.0);

// cutoff and its closed-form derivative
double chi(double x);
double chi_derivative(double x);

// rho(m) = chi(log m / log R); supported on [1, R], rho(1) = 1
double rho(std::int64_t m, const GpyConfig& cfg);

// Fourier-side weight: the transform of e^x chi(x), normalized so that
// chi(x) = \int phi(xi) e^{-(1+i xi) x} dxi on [-1, 1].
std::complex<double> phi_transform(double xi);

// measure of W-tricked primes
double lambda_bw(std::int64_t n, const WTrickContext& ctx);

// Divisor-sum weight and its renormalization. Holds the small prime list and
// the sieve-factor constant; weights are exact closed forms otherwise.
struct GpyEvaluator {
  WTrickContext ctx;
  GpyConfig cfg;
  double h = 0;       // (phi(W)/W) log R
  double c_chi2 = 1;  // derivative-route sieve factor
  std::vector<std::int64_t> small_primes;  // primes <= R

  GpyEvaluator(const WTrickContext& c, const GpyConfig& g);
  double mobius_rho_sum(std::int64_t v) const;  // sum_{m | v squarefree} mu(m) rho(m)
  double weight(std::int64_t n) const;          // h * (mobius_rho_sum(Wn+b))^2
  double nu(std::int64_t n) const;              // weight / c_chi2
};

struct MajorizationReport {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double worst_ratio = 0;  // max over sample of lambda / (eta^{-1} Lambda)
  bool regime_flag = false;
};

MajorizationReport majorization_check(const WTrickContext& ctx, const GpyConfig& cfg,
                                      const std::vector<std::int64_t>& sample);

// Local divisibility probabilities alpha(p, B) for B a subset of
// Omega = [t] x [2]; only the set of touched forms matters, so the table is
// indexed by form subsets.
struct LocalFactorTable {
  std::int64_t p = 0;
  int t = 0;
  std::vector<BigRat> by_forms;  // 2^t entries, by form-subset mask

  // B given as a mask over Omega, bit (i, j) at position 2i + j
  BigRat alpha(unsigned omega_mask) const;
};

LocalFactorTable local_factor_table(std::int64_t p, const linsys::LinearSystem& psi,
                                    const WTrickContext& ctx, std::int64_t budget = 60'000'000);

BigRat local_alpha(std::int64_t p, unsigned omega_mask, const linsys::LinearSystem& psi,
                   const WTrickContext& ctx);

bool is_vertical(unsigned omega_mask, int t);

// E_{p, xi} = sum_B (-1)^{|B|} alpha(p, B) p^{-sum z_ij}, z = (1 + i xi)/log R
std::complex<double> euler_factor(const LocalFactorTable& table, const std::vector<double>& xi,
                                  const GpyConfig& cfg);

struct EulerProductResult {
  std::complex<double> product;        // prod_{p <= pmax} E_{p, xi}
  std::complex<double> approximation;  // h^{-t} prod_{B vertical} (sum_B (1 + i xi))^{-(-1)^{|B|}}
  std::complex<double> ratio;
  bool truncation_regime = false;      // 1 <= L <= log R / log omega
};

EulerProductResult euler_product(const std::vector<double>& xi, const linsys::LinearSystem& psi,
                                 const WTrickContext& ctx, const GpyConfig& cfg, std::int64_t pmax);

struct SieveFactor {
  double quadrature = 0;  // double xi-integral route
  double derivative = 0;  // int_0^infty |chi'|^2 route
  double difference = 0;
};

// Both evaluations of the sieve factor; `panels` controls the resolution of
// the double integral (the derivative route converges much earlier). Throws
// BudgetError when two resolutions disagree beyond tol.
SieveFactor sieve_factor_c2(int panels = 420, double tol = 1e-4);

struct UnfoldingResult {
  double lhs = 0;            // h^{-t} sum_{n in [P]^d} prod Lambda(psi_i(n))
  double rhs = 0;            // P^d sum' alpha(m) prod mu rho
  double boundary_bound = 0; // R^{2|Omega|} P^{d-1}
};

UnfoldingResult unfolding_oracle(const linsys::LinearSystem& psi, const WTrickContext& ctx,
                                 const GpyConfig& cfg, std::int64_t P, std::int64_t budget = 20'000'000);

struct HarnessResult {
  double mean = 0;
  double stderr_ = 0;
  double deviation = 0;  // |mean - 1|
  std::int64_t samples = 0;
  bool exhaustive = false;
};

// Monte Carlo (or exhaustive) estimate of E_{n in [P]^d} prod_i nu(psi_i(n)).
HarnessResult correlation_harness(const linsys::LinearSystem& psi, std::int64_t P,
                                  const GpyEvaluator& ev, std::int64_t max_samples = 200'000,
                                  std::uint64_t seed = 1);

}  // namespace sieve
}  // namespace cplx1
