#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "cplx1/numeric.hpp"

namespace cplx1 {
namespace cyclic {

// Real-valued function on Z_M, M prime.
struct CyclicFn {
  std::int64_t M = 0;
  std::vector<double> v;

  CyclicFn() = default;
  explicit CyclicFn(std::int64_t m, double fill = 0.0);
  double at(std::int64_t x) const { return v[static_cast<std::size_t>(mod_pos(x, M))]; }
  double& at(std::int64_t x) { return v[static_cast<std::size_t>(mod_pos(x, M))]; }
  double mean() const;
};

// Expectation-normalized transform: c[r] = E_x f(x) e(-xr/M), so that
// c[0] = E f, Parseval reads sum_r |c[r]|^2 = E |f|^2, and the U^2 norm is
// (sum_r |c[r]|^4)^{1/4}.
struct Spectrum {
  std::int64_t M = 0;
  std::vector<std::complex<double>> c;
};

Spectrum dft(const CyclicFn& f);
CyclicFn idft(const Spectrum& s);
Spectrum dft_direct(const CyclicFn& f);  // O(M^2) validation oracle

// (f * g)(x) = E_y f(y) g(x - y); transform side multiplies.
CyclicFn convolve(const CyclicFn& f, const CyclicFn& g);

double u2_norm(const CyclicFn& f);
// Direct Gowers norm of order k (degree-2^k average); O(M^2) for k = 2,
// O(M^{k+1}) beyond, intended for small M.
double uk_norm(const CyclicFn& f, int k, std::int64_t budget = 200'000'000);

// ---- Bohr sets ----

struct BohrSet {
  std::int64_t M = 0;
  std::vector<std::int64_t> gamma;  // sorted distinct frequencies
  double delta = 0;
  int dim = 0;
  std::vector<std::int64_t> elems;  // members as centered integers, sorted
  // max_r |x r / M|_T scores, shared across dilates of the same frequency set
  std::shared_ptr<const std::vector<std::int64_t>> scores;         // indexed by residue
  std::shared_ptr<const std::vector<std::int64_t>> sorted_scores;  // ascending

  std::int64_t size() const { return static_cast<std::int64_t>(elems.size()); }
  bool contains(std::int64_t x) const;
  std::int64_t threshold() const;                    // member iff score <= threshold
  std::int64_t size_at_radius(double radius) const;  // |B(gamma, radius)|
};

BohrSet bohr(std::int64_t M, std::vector<std::int64_t> gamma, double delta);
BohrSet dilate(const BohrSet& B, double rho);
bool is_regular(const BohrSet& B);
// Regular dilate B_{|c} with c in [1/2, 1]; throws CertificationError if the
// scan fails (the existence statement would be violated).
BohrSet find_regular_dilate(const BohrSet& B);

// ---- box norms over X1 x X2 (tables are row-major |X1| x |X2|) ----

struct BoxFamily {
  std::size_t n1 = 0, n2 = 0;
  std::vector<double> h00, h01, h10, h11;
};

double box_inner(const BoxFamily& fam);
double box_norm4(const std::vector<double>& h, std::size_t n1, std::size_t n2);
double box_norm(const std::vector<double>& h, std::size_t n1, std::size_t n2);

struct InequalityCheck {
  double lhs = 0, rhs = 0;
  bool holds(double tol = 1e-12) const { return lhs <= rhs + tol; }
};

// |E h b1 b2| <= ||h||_box
InequalityCheck box_vdc_check(const std::vector<double>& h, const std::vector<double>& b1,
                              const std::vector<double>& b2, std::size_t n1, std::size_t n2);
// |<(h_w)>_box| <= prod ||h_w||_box
InequalityCheck gcs_check(const BoxFamily& fam);

// (a,b)-twisted U^2 norm of g over X1 x X2
double twisted_u2(const CyclicFn& g, std::int64_t a, std::int64_t b,
                  const std::vector<std::int64_t>& X1, const std::vector<std::int64_t>& X2);

// local Gowers norm: (E_{x0 in X0} ||f(x0 + .)||^4_box(X1 x X2))^{1/4}
double local_u2(const CyclicFn& f, const std::vector<std::int64_t>& X0,
                const std::vector<std::int64_t>& X1, const std::vector<std::int64_t>& X2);

// E_{u0 in X0} ||f(u0 + a . + b .)||^4 over X1 x X2 (the quantity driving the
// density-increment search); fourth power, not the root.
double local_twisted_u2_pow4(const CyclicFn& f, std::int64_t a, std::int64_t b,
                             const std::vector<std::int64_t>& X0, const std::vector<std::int64_t>& X1,
                             const std::vector<std::int64_t>& X2);

struct RegularityResiduals {
  double translate = 0;  // |E_{x'+B} f - E_B f|
  double smoothing = 0;  // |E_B f - E_{x in B, x' in X'} f(x + x')|
  double shrink = 0;     // |E_B 1(x in B_{1-rho}) f - E_B f|
};

RegularityResiduals regularity_calculus_check(const CyclicFn& f, const BohrSet& B,
                                              const std::vector<std::int64_t>& Xprime,
                                              std::int64_t xprime, double rho);

// CSV (index,value) serialization of a cyclic function.
std::string to_csv(const CyclicFn& f);
CyclicFn from_csv(const std::string& text);

}  // namespace cyclic
}  // namespace cplx1
