#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cplx1/cyclic.hpp"
#include "cplx1/linsys.hpp"
#include "cplx1/patterns.hpp"
#include "cplx1/sieve.hpp"

namespace cplx1 {
namespace increment {

// Every unnamed constant of the iteration lives here; the sources leave all
// of them unspecified, so they are configuration with checked-in defaults.
// Runtime certification, not trust in these values, carries correctness.
struct Constants {
  double case1_fraction = 0.25;    // many-patterns threshold: alpha^t * this
  double chain_rho = 0.25;         // base nesting ratio for chains
  double chain_rho_min = 1e-4;
  double locate_fraction = 0.5;    // norm >= locate_fraction * eta^4
  double untwist_kappa = 0.5;      // conclusion >= kappa * premise
  double inverse_c = 1e-4;         // increment >= inverse_c * eta^12
  double delta_exponent = 16.0;    // delta' >= (alpha/d)^K delta
  double incr_c = 1e-4;            // alpha' >= (1 + incr_c alpha^{12t-1}) alpha
  double step_budget_scale = 4.0;  // step cap: scale * alpha^{-12t+1}
  std::int64_t max_steps = 64;     // hard safety cap on top of the budget
  double regularity_K = 512.0;
  double badbox_K = 8.0;           // bad-box fraction <= K / sqrt(M)
  double majorization_C = 256.0;   // wrapped measure <= C * wrapped weight
  std::int64_t tbohr_budget = 100'000'000;
  std::int64_t locate_budget = 1'500'000'000;
  std::int64_t count_budget = 2'000'000'000;
  std::uint64_t seed = 1;
};

Constants load_constants(const std::string& text);  // key = value lines
std::string format_constants(const Constants& c);

// ---- transference building blocks ----

struct ExtendReport {
  cyclic::CyclicFn nu;  // wraparound weight on Z_M
  double mean = 0;
  std::vector<double> lf_averages;  // sampled linear-forms averages
  double worst_lf_deviation = 0;
  double majorization_worst = 0;  // max of wrapped measure / wrapped weight
  bool majorization_ok = true;
  double bad_box_fraction = 0;
  double bad_box_bound = 0;
};

// Wraparound extension of the divisor-sum weight together with its empirical
// pseudorandomness diagnostics over the given probe systems.
ExtendReport extend_weight(const sieve::GpyEvaluator& ev, std::int64_t M,
                           const std::vector<linsys::LinearSystem>& probes, const Constants& consts);

// nu' = (nu + nu * mu_B) / 2; mean-preserving smoothing of a weight
cyclic::CyclicFn average_weight(const cyclic::CyclicFn& nu, const cyclic::BohrSet& B);

struct GvnResult {
  double lhs = 0;  // |T(f_1, ..., f_t)|^{2^{s+1}}
  double rhs = 0;  // ||f_i||_{U^{s+1}}^{2^{s+1}}
  bool bounded_case = false;
};

// Pattern-average bound by the Gowers norm of the selected factor. theta must
// be in exact s-normal form at i; with nu absent and |f_j| <= 1 the
// inequality is exact (zero slack).
GvnResult gvn_check(const linsys::LinearSystem& theta, const linsys::IntMatrix& V,
                    const std::optional<cyclic::CyclicFn>& nu, const std::vector<cyclic::CyclicFn>& fs,
                    int i, int s = 1);

struct SmoothingResult {
  std::vector<std::int64_t> gamma;  // large spectrum, 1 adjoined
  cyclic::BohrSet B;
  cyclic::CyclicFn smoothed;
  double mean_before = 0, mean_after = 0;
  bool support_ok = false;     // smoothed function supported in [-2N, 2N]
  double spectrum_bound = 0;   // delta^{-4} sum_r |hat|^4
  double u2_distance = 0;      // || original - smoothed ||_U2
};

SmoothingResult build_smoothing(const cyclic::CyclicFn& lambda_A, double delta, double eps, std::int64_t N);

struct LevelSetResult {
  std::vector<std::int64_t> elems;  // centered representatives
  double density = 0;
  double moment4 = 0, moment6 = 0, moment8 = 0;
};

LevelSetResult level_set(const cyclic::CyclicFn& smoothed, double alpha, double fraction = 0.5);

struct MultilinearOutcome {
  bool many_patterns = false;
  double T_indicator = 0;       // T_B(1_A, ..., 1_A)
  double threshold = 0;         // case1_fraction * alpha^t
  double identity_residual = 0; // |T(1_A..) - sum of expansion terms|
  // case-2 payload
  std::vector<int> star_pattern;  // 1 marks the balanced function
  int witness_index = -1;
  double witness_value = 0;
  double pigeonhole_floor = 0;  // alpha^t / (2 (2^t - 1))
};

MultilinearOutcome multilinear_expand(const std::vector<std::int64_t>& A_elems,
                                      const patterns::BohrChain& chain, const linsys::LinearSystem& psi,
                                      const Constants& consts);

struct LocateResult {
  int k = 0, l = 0;
  std::int64_t a = 0, b = 0;
  double value = 0;      // E_{u0} || f(u0 + a. + b.) ||^4 over (B_k, B_l)
  double threshold = 0;  // locate_fraction * eta^4
};

LocateResult locate_large_norm(const cyclic::CyclicFn& f_A, const patterns::BohrChain& chain,
                               const linsys::LinearSystem& psi,
                               const std::vector<std::vector<int>>& witnesses, int i, double eta,
                               const Constants& consts);

struct UntwistResult {
  cyclic::BohrSet B1t, B2t;  // the shrunken factor sets
  double value = 0;          // E_{u0} || f(u0 + ab .) ||^4 over them
  double threshold = 0;      // kappa * premise
  bool certified = false;
};

UntwistResult untwist(const cyclic::CyclicFn& f, std::int64_t a, std::int64_t b, const cyclic::BohrSet& B0,
                      const cyclic::BohrSet& B1, const cyclic::BohrSet& B2, double premise,
                      const Constants& consts);

struct InverseResult {
  std::int64_t u = 0;
  cyclic::BohrSet B3;
  double increment = 0;        // E_{u + m B3} f
  double threshold = 0;        // inverse_c * eta^12
  std::int64_t frequency = 0;  // adjoined frequency (0 when none needed)
};

// Constructive local inverse for the degree-2 norm: finds a translate of a
// refined Bohr set on which the balanced function has positive mean. The
// postcondition (containment, dimension, radius, increment) is re-verified
// before returning; failure raises CertificationError.
InverseResult local_inverse_u2(const cyclic::CyclicFn& f, const cyclic::BohrSet& B0,
                               const cyclic::BohrSet& B1, const cyclic::BohrSet& B2, std::int64_t m,
                               double eta, const Constants& consts);

// ---- the driver ----

struct StepLog {
  int step = 0;
  double alpha = 0;
  int dim = 0;
  double delta = 0;
  std::int64_t set_size = 0, bohr_size = 0;
  std::string action;  // many-patterns | increment
  double T_indicator = 0;
  std::int64_t u = 0, m = 1;  // rescaling applied at this step (increment case)
};

struct IncrementRun {
  bool many_patterns = false;
  std::int64_t steps_taken = 0;
  double step_budget = 0;
  BigInt configs = 0;           // certified config count at termination
  BigInt mult_bound = 0;        // fiber multiplicity bound for the conversion
  BigInt solutions_bound = 0;   // certified lower bound on #{y in A^t : Vy = 0}
  double closedform_exponent = 0;  // E with configs ~ (alpha delta / d)^E N^{q+1}
  std::int64_t M = 0;
  std::int64_t u_total = 0, m_total = 1;
  std::vector<StepLog> steps;
};

// `trace`, when given, receives every step log as it is produced, so partial
// transcripts survive budget or certification failures.
IncrementRun run_increment(const linsys::IntMatrix& V, const std::vector<std::int64_t>& A, std::int64_t N,
                           const Constants& consts, std::vector<StepLog>* trace = nullptr);

// ---- the full pipeline over W-tricked primes ----

struct TransferenceReport {
  std::int64_t M = 0;
  double alpha = 0;
  double T_lambda = 0;           // T(lambda_A, ..., lambda_A)
  double T_smooth = 0;           // T(lambda'_A, ..., lambda'_A)
  double error_sum = 0;          // remaining 2^t - 1 terms
  double identity_residual = 0;  // multilinear identity defect
  double u2_distance = 0;
  double u2_budget = 0;  // eps^{1/4} + delta^{1/4}
  std::vector<double> error_terms;
  std::vector<double> gvn_rhs;  // Gowers-side bound per error term
  // first error term re-bounded under the averaged majorant, after the
  // rescaling that puts the functions below the weight
  double gvn_weighted_lhs = 0;
  double gvn_weighted_rhs = 0;
  double gvn_scale = 1;
  double levelset_density = 0;
  // the smoothing Bohr set, for serialization
  std::vector<std::int64_t> bohr_gamma;
  double bohr_delta = 0;
  std::int64_t bohr_size = 0;
  bool bohr_regular = false;
  IncrementRun mainterm;
  std::int64_t distinct_solutions = 0;
  std::int64_t solutions = 0;
  ExtendReport weight_report;
};

TransferenceReport transference_pipeline(const linsys::IntMatrix& V, const std::vector<std::int64_t>& A,
                                         const sieve::WTrickContext& ctx, const sieve::GpyConfig& cfg,
                                         double delta, double eps, const Constants& consts);

}  // namespace increment
}  // namespace cplx1
