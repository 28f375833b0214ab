#include "cplx1/increment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "cplx1/primes.hpp"

namespace cplx1 {
namespace increment {

using cyclic::BohrSet;
using cyclic::CyclicFn;
using linsys::IntMatrix;
using linsys::LinearSystem;
using patterns::BohrChain;

// ---- constants table ----

Constants load_constants(const std::string& text) {
  Constants c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ValidationError("bad constants line: " + line);
    try {
      if (key == "case1_fraction") c.case1_fraction = std::stod(val);
      else if (key == "chain_rho") c.chain_rho = std::stod(val);
      else if (key == "chain_rho_min") c.chain_rho_min = std::stod(val);
      else if (key == "locate_fraction") c.locate_fraction = std::stod(val);
      else if (key == "untwist_kappa") c.untwist_kappa = std::stod(val);
      else if (key == "inverse_c") c.inverse_c = std::stod(val);
      else if (key == "delta_exponent") c.delta_exponent = std::stod(val);
      else if (key == "incr_c") c.incr_c = std::stod(val);
      else if (key == "step_budget_scale") c.step_budget_scale = std::stod(val);
      else if (key == "max_steps") c.max_steps = std::stoll(val);
      else if (key == "regularity_K") c.regularity_K = std::stod(val);
      else if (key == "badbox_K") c.badbox_K = std::stod(val);
      else if (key == "majorization_C") c.majorization_C = std::stod(val);
      else if (key == "tbohr_budget") c.tbohr_budget = std::stoll(val);
      else if (key == "locate_budget") c.locate_budget = std::stoll(val);
      else if (key == "count_budget") c.count_budget = std::stoll(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else throw ValidationError("unknown constant: " + key);
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad value for constant " + key);
    }
  }
  return c;
}

std::string format_constants(const Constants& c) {
  std::ostringstream out;
  out.precision(17);
  out << "# iteration constants; every value here is a tunable the sources leave open\n";
  out << "case1_fraction = " << c.case1_fraction << "\n";
  out << "chain_rho = " << c.chain_rho << "\n";
  out << "chain_rho_min = " << c.chain_rho_min << "\n";
  out << "locate_fraction = " << c.locate_fraction << "\n";
  out << "untwist_kappa = " << c.untwist_kappa << "\n";
  out << "inverse_c = " << c.inverse_c << "\n";
  out << "delta_exponent = " << c.delta_exponent << "\n";
  out << "incr_c = " << c.incr_c << "\n";
  out << "step_budget_scale = " << c.step_budget_scale << "\n";
  out << "max_steps = " << c.max_steps << "\n";
  out << "regularity_K = " << c.regularity_K << "\n";
  out << "badbox_K = " << c.badbox_K << "\n";
  out << "majorization_C = " << c.majorization_C << "\n";
  out << "tbohr_budget = " << c.tbohr_budget << "\n";
  out << "locate_budget = " << c.locate_budget << "\n";
  out << "count_budget = " << c.count_budget << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

// ---- weight extension ----

ExtendReport extend_weight(const sieve::GpyEvaluator& ev, std::int64_t M,
                           const std::vector<LinearSystem>& probes, const Constants& consts) {
  std::int64_t N = ev.ctx.N;
  if (M < N || !is_prime(M)) throw ValidationError("extension needs a prime M >= N");
  ExtendReport rep;
  rep.nu = CyclicFn(M);
  for (std::int64_t n = 1; n <= N; ++n) rep.nu.at(n) = ev.nu(n);
  rep.mean = rep.nu.mean();

  // majorization of the wrapped measure by the wrapped weight
  rep.majorization_worst = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    double lam = sieve::lambda_bw(n, ev.ctx);
    if (lam == 0) continue;
    double ratio = lam / std::max(rep.nu.at(n), 1e-300);
    rep.majorization_worst = std::max(rep.majorization_worst, ratio);
  }
  rep.majorization_ok = rep.majorization_worst <= consts.majorization_C;

  Rng rng(consts.seed);
  std::int64_t P = static_cast<std::int64_t>(std::sqrt(static_cast<double>(M)));
  for (const LinearSystem& psi : probes) {
    int d = psi.d, t = psi.t;
    // sampled linear-forms average over Z_M^d
    KahanSum sum;
    const std::int64_t samples = 20000;
    std::vector<std::int64_t> n(d);
    for (std::int64_t s = 0; s < samples; ++s) {
      for (int j = 0; j < d; ++j) n[j] = rng.range(0, M - 1);
      double prod = 1.0;
      for (int i = 0; i < t; ++i) prod *= rep.nu.at(psi.eval64(i, n));
      sum.add(prod);
    }
    double avg = sum.value() / samples;
    rep.lf_averages.push_back(avg);
    rep.worst_lf_deviation = std::max(rep.worst_lf_deviation, std::abs(avg - 1.0));

    // fraction of translates whose image box straddles a residue window
    std::int64_t bad = 0;
    const std::int64_t trials = 20000;
    for (std::int64_t s = 0; s < trials; ++s) {
      for (int j = 0; j < d; ++j) n[j] = rng.range(1, M);
      bool isbad = false;
      for (int i = 0; i < t && !isbad; ++i) {
        std::int64_t base = psi.eval64(i, n), lo = 0, hi = 0;
        for (int j = 0; j < d; ++j) {
          std::int64_t cij = to_int64(psi.c(i, j));
          if (cij >= 0) hi += cij * P;
          else lo += cij * P;
        }
        auto fl = [&](std::int64_t v) {
          return static_cast<std::int64_t>(std::floor(static_cast<double>(v) / static_cast<double>(M)));
        };
        if (fl(base + lo) != fl(base + hi)) isbad = true;
      }
      if (isbad) ++bad;
    }
    rep.bad_box_fraction = std::max(rep.bad_box_fraction, static_cast<double>(bad) / trials);
  }
  rep.bad_box_bound = consts.badbox_K / std::sqrt(static_cast<double>(M));
  return rep;
}

CyclicFn average_weight(const CyclicFn& nu, const BohrSet& B) {
  if (nu.M != B.M) throw ValidationError("modulus mismatch");
  CyclicFn mu(B.M);
  double w = static_cast<double>(B.M) / static_cast<double>(B.size());
  for (std::int64_t x : B.elems) mu.at(x) = w;
  CyclicFn conv = cyclic::convolve(nu, mu);
  CyclicFn out(nu.M);
  for (std::int64_t x = 0; x < nu.M; ++x)
    out.v[static_cast<std::size_t>(x)] =
        0.5 * (nu.v[static_cast<std::size_t>(x)] + conv.v[static_cast<std::size_t>(x)]);
  return out;
}

// ---- generalized pattern-average bound ----

GvnResult gvn_check(const LinearSystem& theta, const IntMatrix& V, const std::optional<CyclicFn>& nu,
                    const std::vector<CyclicFn>& fs, int i, int s) {
  if (!linsys::is_exact_normal_at(theta, i, s))
    throw ValidationError("system is not in exact normal form at the selected index");
  // the matrix must annihilate the parametrization, or the kernel-side
  // averages would describe a different pattern family
  for (int r = 0; r < V.rows; ++r)
    for (int j = 0; j < theta.d; ++j) {
      BigInt dot = 0;
      for (int k = 0; k < V.cols; ++k) dot += V.at(r, k) * theta.c(k, j);
      if (dot % theta.modulus != 0) throw ValidationError("matrix does not annihilate the system");
    }
  if (nu) {
    for (const auto& f : fs)
      for (std::int64_t x = 0; x < f.M; ++x)
        if (std::abs(f.v[static_cast<std::size_t>(x)]) > nu->v[static_cast<std::size_t>(x)] + 1e-9)
          throw ValidationError("functions must be dominated by the weight");
  }
  GvnResult out;
  double T = patterns::t_operator(theta, V, fs, patterns::TMethod::automatic).value;
  double power = std::pow(2.0, s + 1);
  out.lhs = std::pow(std::abs(T), power);
  if (s == 1) {
    double n = cyclic::u2_norm(fs[static_cast<std::size_t>(i)]);
    out.rhs = std::pow(n, 4.0);
  } else {
    double n = cyclic::uk_norm(fs[static_cast<std::size_t>(i)], s + 1);
    out.rhs = std::pow(n, power);
  }
  if (!nu) {
    out.bounded_case = true;
    for (const auto& f : fs)
      for (double v : f.v)
        if (std::abs(v) > 1.0 + 1e-9) out.bounded_case = false;
  }
  return out;
}

// ---- smoothing and level sets ----

SmoothingResult build_smoothing(const CyclicFn& lambda_A, double delta, double eps, std::int64_t N) {
  if (delta <= 0 || delta > 1 || eps <= 0 || eps > 0.5) throw ValidationError("delta in (0,1], eps in (0,1/2]");
  SmoothingResult out;
  cyclic::Spectrum spec = cyclic::dft(lambda_A);
  double hat4 = 0;
  for (std::int64_t r = 0; r < lambda_A.M; ++r) {
    double mag = std::abs(spec.c[static_cast<std::size_t>(r)]);
    hat4 += mag * mag * mag * mag;
    if (mag >= delta) out.gamma.push_back(r);
  }
  if (std::find(out.gamma.begin(), out.gamma.end(), 1) == out.gamma.end()) out.gamma.push_back(1);
  std::sort(out.gamma.begin(), out.gamma.end());
  out.spectrum_bound = hat4 / std::pow(delta, 4.0);
  out.B = cyclic::find_regular_dilate(cyclic::bohr(lambda_A.M, out.gamma, eps));
  {
    CyclicFn mu(out.B.M);
    double w = static_cast<double>(out.B.M) / static_cast<double>(out.B.size());
    for (std::int64_t x : out.B.elems) mu.at(x) = w;
    out.smoothed = cyclic::convolve(lambda_A, mu);
  }
  out.mean_before = lambda_A.mean();
  out.mean_after = out.smoothed.mean();
  std::int64_t reach = 0;
  for (std::int64_t x : out.B.elems) reach = std::max<std::int64_t>(reach, std::llabs(x));
  out.support_ok = (N + reach) <= 2 * N;
  CyclicFn diff(lambda_A.M);
  for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = lambda_A.v[k] - out.smoothed.v[k];
  out.u2_distance = cyclic::u2_norm(diff);
  return out;
}

LevelSetResult level_set(const CyclicFn& smoothed, double alpha, double fraction) {
  LevelSetResult out;
  double cut = alpha * fraction;
  KahanSum m4, m6, m8;
  for (std::int64_t x = 0; x < smoothed.M; ++x) {
    double v = smoothed.v[static_cast<std::size_t>(x)];
    double v2 = v * v;
    m4.add(v2 * v2);
    m6.add(v2 * v2 * v2);
    m8.add(v2 * v2 * v2 * v2);
    if (v >= cut) out.elems.push_back(mod_centered(x, smoothed.M));
  }
  std::sort(out.elems.begin(), out.elems.end());
  double M = static_cast<double>(smoothed.M);
  out.density = static_cast<double>(out.elems.size()) / M;
  out.moment4 = std::pow(m4.value() / M, 1.0 / 4.0);
  out.moment6 = std::pow(m6.value() / M, 1.0 / 6.0);
  out.moment8 = std::pow(m8.value() / M, 1.0 / 8.0);
  return out;
}

// ---- multilinear expansion ----

namespace {

CyclicFn indicator_fn(const std::vector<std::int64_t>& elems, std::int64_t M) {
  CyclicFn f(M);
  for (std::int64_t x : elems) f.at(x) = 1.0;
  return f;
}

}  // namespace

MultilinearOutcome multilinear_expand(const std::vector<std::int64_t>& A_elems, const BohrChain& chain,
                                      const LinearSystem& psi, const Constants& consts) {
  MultilinearOutcome out;
  const BohrSet& B0 = chain.sets.front();
  std::int64_t M = B0.M;
  int t = psi.t;
  double alpha = static_cast<double>(A_elems.size()) / static_cast<double>(B0.size());
  out.threshold = consts.case1_fraction * std::pow(alpha, t);
  out.pigeonhole_floor = std::pow(alpha, t) / (2.0 * (std::pow(2.0, t) - 1.0));
  if (A_elems.empty()) {  // degenerate: flagged as the many-patterns case with nothing to count
    out.many_patterns = true;
    return out;
  }

  CyclicFn oneA = indicator_fn(A_elems, M);
  CyclicFn fA(M);
  for (std::int64_t x : B0.elems) fA.at(x) = -alpha;
  for (std::int64_t x : A_elems) fA.at(x) += 1.0;
  CyclicFn alpha1B(M);
  for (std::int64_t x : B0.elems) alpha1B.at(x) = alpha;

  std::vector<const CyclicFn*> fs(static_cast<std::size_t>(t));
  for (auto& p : fs) p = &oneA;
  out.T_indicator = patterns::t_bohr(psi, chain, fs, consts.tbohr_budget, consts.seed).value;

  double total = 0;
  double best = -1;
  for (unsigned mask = 0; mask < (1u << t); ++mask) {
    for (int i = 0; i < t; ++i) fs[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? &fA : &alpha1B;
    double val = patterns::t_bohr(psi, chain, fs, consts.tbohr_budget, consts.seed).value;
    total += val;
    if (mask != 0 && std::abs(val) > best) {
      best = std::abs(val);
      out.witness_value = std::abs(val);
      out.star_pattern.assign(static_cast<std::size_t>(t), 0);
      out.witness_index = -1;
      for (int i = 0; i < t; ++i)
        if ((mask >> i) & 1u) {
          out.star_pattern[static_cast<std::size_t>(i)] = 1;
          if (out.witness_index < 0) out.witness_index = i;
        }
    }
  }
  out.identity_residual = std::abs(out.T_indicator - total);
  out.many_patterns = out.T_indicator >= out.threshold;
  return out;
}

// ---- locate / untwist / inverse ----

LocateResult locate_large_norm(const CyclicFn& f_A, const BohrChain& chain, const LinearSystem& psi,
                               const std::vector<std::vector<int>>& witnesses, int i, double eta,
                               const Constants& consts) {
  int q = psi.d;
  LocateResult best;
  best.threshold = consts.locate_fraction * std::pow(eta, 4.0);
  // candidate variable pairs: the stored normal-form witness first, then the
  // remaining coefficient pairs of form i
  std::vector<std::pair<int, int>> pairs;
  if (i < static_cast<int>(witnesses.size()) && witnesses[static_cast<std::size_t>(i)].size() == 2) {
    auto& w = witnesses[static_cast<std::size_t>(i)];
    pairs.emplace_back(std::min(w[0], w[1]), std::max(w[0], w[1]));
  }
  for (int k = 0; k < q; ++k)
    for (int l = k + 1; l < q; ++l) {
      if (psi.c(i, k) == 0 || psi.c(i, l) == 0) continue;
      std::pair<int, int> pr{k, l};
      if (std::find(pairs.begin(), pairs.end(), pr) == pairs.end()) pairs.push_back(pr);
    }
  if (pairs.empty()) throw ValidationError("form depends on fewer than two chain variables");
  bool any = false;
  for (auto [k, l] : pairs) {
    const auto& X1 = chain.sets[static_cast<std::size_t>(k + 1)].elems;
    const auto& X2 = chain.sets[static_cast<std::size_t>(l + 1)].elems;
    const auto& X0 = chain.sets.front().elems;
    double cost = static_cast<double>(X0.size()) * static_cast<double>(X1.size()) *
                  static_cast<double>(X2.size()) * static_cast<double>(X2.size());
    if (cost > static_cast<double>(consts.locate_budget)) continue;
    any = true;
    std::int64_t a = to_int64(psi.c(i, k)), b = to_int64(psi.c(i, l));
    double val = cyclic::local_twisted_u2_pow4(f_A, a, b, X0, X1, X2);
    if (val > best.value) {
      best.value = val;
      best.k = k;
      best.l = l;
      best.a = a;
      best.b = b;
    }
    if (val >= best.threshold) {
      best.value = val;
      best.k = k;
      best.l = l;
      best.a = a;
      best.b = b;
      return best;
    }
  }
  if (!any) throw BudgetError("every candidate pair exceeded the norm-search budget");
  std::ostringstream msg;
  msg << "no coefficient pair reached the norm threshold " << best.threshold << " (best " << best.value
      << " at k=" << best.k << " l=" << best.l << "); iteration constants are miscalibrated";
  throw CertificationError(msg.str());
}

UntwistResult untwist(const CyclicFn& f, std::int64_t a, std::int64_t b, const BohrSet& B0, const BohrSet& B1,
                      const BohrSet& B2, double premise, const Constants& consts) {
  UntwistResult out;
  out.threshold = consts.untwist_kappa * premise;
  if (a == 1 && b == 1) {  // nothing to untwist
    out.B1t = B1;
    out.B2t = B2;
    out.value = premise;
    out.certified = true;
    return out;
  }
  out.B1t = cyclic::find_regular_dilate(cyclic::dilate(B1, consts.chain_rho));
  out.B2t = cyclic::find_regular_dilate(cyclic::dilate(B2, consts.chain_rho));
  std::int64_t ab = a * b;
  // E_{u0} || f(u0 + ab .) ||^4 over the shrunken pair
  std::vector<std::int64_t> X1;
  for (std::int64_t x : out.B1t.elems) X1.push_back(ab * x);
  std::vector<std::int64_t> X2;
  for (std::int64_t x : out.B2t.elems) X2.push_back(ab * x);
  out.value = cyclic::local_twisted_u2_pow4(f, 1, 1, B0.elems, X1, X2);
  out.certified = out.value >= out.threshold;
  return out;
}

InverseResult local_inverse_u2(const CyclicFn& f, const BohrSet& B0, const BohrSet& B1, const BohrSet& B2,
                               std::int64_t m, double eta, const Constants& consts) {
  std::int64_t M = f.M;
  if (m == 0) throw ValidationError("twist multiplier must be nonzero");
  {
    KahanSum s;
    for (std::int64_t x : B0.elems) s.add(f.at(x));
    if (std::abs(s.value() / static_cast<double>(B0.size())) > 1e-9)
      throw ValidationError("balanced function must average to zero on the host set");
  }
  (void)B2;

  // candidate frequencies from the spectrum of f windowed to B0
  CyclicFn window(M);
  for (std::int64_t x : B0.elems) window.at(x) = f.at(x);
  cyclic::Spectrum spec = cyclic::dft(window);
  std::vector<std::pair<double, std::int64_t>> ranked;
  ranked.reserve(static_cast<std::size_t>(M));
  for (std::int64_t r = 1; r < M; ++r) ranked.push_back({std::abs(spec.c[static_cast<std::size_t>(r)]), r});
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });

  double rho3 = std::max(consts.chain_rho, consts.chain_rho_min);
  double floor_delta = std::pow(eta / std::max(1, B1.dim), consts.delta_exponent) * B1.delta;

  InverseResult best;
  best.threshold = consts.inverse_c * std::pow(eta, 12.0);
  double best_val = -1e300;

  auto try_candidate = [&](std::int64_t freq) {
    std::vector<std::int64_t> gamma = B1.gamma;
    if (freq != 0) gamma.push_back(freq);
    BohrSet B3 = cyclic::find_regular_dilate(cyclic::bohr(M, gamma, B1.delta * rho3));
    if (B3.delta < floor_delta) return;                  // radius certificate would fail
    if (B3.dim > B1.dim + 1) return;                     // dimension certificate would fail
    // translates u in B0 with u + m B3 inside B0 as integers
    for (std::int64_t u : B0.elems) {
      bool inside = true;
      KahanSum mean;
      for (std::int64_t x : B3.elems) {
        std::int64_t y = u + m * x;
        if (2 * std::llabs(y) > M || !B0.contains(y)) {
          inside = false;
          break;
        }
        mean.add(f.at(y));
      }
      if (!inside) continue;
      double val = mean.value() / static_cast<double>(B3.size());
      if (val > best_val) {
        best_val = val;
        best.u = u;
        best.B3 = B3;
        best.increment = val;
        best.frequency = freq;
      }
    }
  };

  try_candidate(0);
  int tried = 0;
  for (const auto& [mag, r] : ranked) {
    if (tried >= 8) break;
    (void)mag;
    try_candidate(mul_mod(mod_pos(r, M), mod_pos(m, M), M));
    ++tried;
  }

  if (best_val <= 0 || best.increment < best.threshold) {
    std::ostringstream msg;
    msg << "no certified density increment: best mean " << best_val << " vs threshold " << best.threshold;
    throw CertificationError(msg.str());
  }
  // re-verify the full postcondition before handing the state over
  if (best.B3.dim > B1.dim + 1) throw CertificationError("dimension certificate failed");
  if (best.B3.delta < floor_delta) throw CertificationError("radius certificate failed");
  KahanSum recheck;
  for (std::int64_t x : best.B3.elems) {
    std::int64_t y = best.u + m * x;
    if (2 * std::llabs(y) > M || !B0.contains(y)) throw CertificationError("containment certificate failed");
    recheck.add(f.at(y));
  }
  if (recheck.value() / static_cast<double>(best.B3.size()) + 1e-12 < best.threshold)
    throw CertificationError("increment certificate failed on re-evaluation");
  return best;
}

// ---- driver ----

namespace {

struct Normalized {
  IntMatrix V;
  std::vector<int> kept_cols;
  int dropped = 0;
};

Normalized drop_zero_columns(const IntMatrix& V) {
  Normalized out;
  for (int j = 0; j < V.cols; ++j) {
    bool zero = true;
    for (int i = 0; i < V.rows && zero; ++i) zero = V.at(i, j) == 0;
    if (!zero) out.kept_cols.push_back(j);
  }
  out.dropped = V.cols - static_cast<int>(out.kept_cols.size());
  out.V = IntMatrix(V.rows, static_cast<int>(out.kept_cols.size()));
  for (int i = 0; i < V.rows; ++i)
    for (std::size_t j = 0; j < out.kept_cols.size(); ++j)
      out.V.at(i, static_cast<int>(j)) = V.at(i, out.kept_cols[j]);
  return out;
}

// chain whose exact-evaluation cost fits the budget
BohrChain budgeted_chain(const BohrSet& B0, int q, double rho, const Constants& consts) {
  double r = rho;
  while (true) {
    BohrChain chain = patterns::make_chain(B0, q, r);
    double tuples = static_cast<double>(B0.size());
    for (int j = 1; j <= q; ++j) tuples *= static_cast<double>(chain.sets[static_cast<std::size_t>(j)].size());
    if (tuples <= static_cast<double>(consts.tbohr_budget)) return chain;
    r *= 0.5;
    if (r < consts.chain_rho_min) throw BudgetError("no chain ratio fits the evaluation budget");
  }
}

// count distinct pattern images phi(x) over the chain, by their free kernel
// coordinates
std::int64_t distinct_image_count(const LinearSystem& psi, const BohrChain& chain,
                                  const std::vector<std::int64_t>& A_elems, std::int64_t M,
                                  const std::vector<int>& key_coords, std::int64_t budget) {
  int q = psi.d, t = psi.t;
  std::unordered_set<std::int64_t> A;
  for (std::int64_t a : A_elems) A.insert(a);
  std::vector<std::int64_t> coef(static_cast<std::size_t>(t) * q);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < q; ++j) coef[static_cast<std::size_t>(i) * q + j] = to_int64(psi.c(i, j));
  const auto& B0 = chain.sets[0].elems;
  double tuples = static_cast<double>(B0.size());
  for (int j = 1; j <= q; ++j) tuples *= static_cast<double>(chain.sets[static_cast<std::size_t>(j)].size());
  if (tuples > static_cast<double>(budget)) throw BudgetError("image count too large");

  std::unordered_set<std::int64_t> images;
  std::vector<std::size_t> idx(q, 0);
  std::vector<std::int64_t> x(q), s(t);
  while (true) {
    for (int j = 0; j < q; ++j) x[j] = chain.sets[static_cast<std::size_t>(j + 1)].elems[idx[j]];
    for (int i = 0; i < t; ++i) {
      std::int64_t acc = 0;
      for (int j = 0; j < q; ++j) acc += coef[static_cast<std::size_t>(i) * q + j] * x[j];
      s[i] = acc;
    }
    for (std::int64_t x0 : B0) {
      bool all = true;
      for (int i = 0; i < t && all; ++i) all = A.count(x0 + s[i]) != 0;  // integer membership
      if (!all) continue;
      // deterministic key of the free kernel coordinates; collisions can only
      // undercount, which keeps the bound a certified lower bound
      std::uint64_t key = 0x9e3779b97f4a7c15ULL;
      for (int kc : key_coords) {
        std::uint64_t z = key ^ static_cast<std::uint64_t>(x0 + s[kc]);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        key = z ^ (z >> 31);
      }
      images.insert(static_cast<std::int64_t>(key));
    }
    int pos = 0;
    while (pos < q && ++idx[pos] == chain.sets[static_cast<std::size_t>(pos + 1)].elems.size()) idx[pos++] = 0;
    if (pos == q) break;
  }
  (void)M;
  return static_cast<std::int64_t>(images.size());
}

}  // namespace

IncrementRun run_increment(const IntMatrix& V_in, const std::vector<std::int64_t>& A_in, std::int64_t N,
                           const Constants& consts, std::vector<StepLog>* trace) {
  Normalized norm = drop_zero_columns(V_in);
  const IntMatrix& V = norm.V;
  if (norm.dropped > 0 && V.cols == 0) throw ValidationError("matrix is identically zero");
  if (!linsys::is_translation_invariant(V)) throw ValidationError("matrix is not translation-invariant");
  if (linsys::rank(V) != V.rows) throw ValidationError("matrix must have full row rank");
  if (V.cols < 3) throw ValidationError("need t >= 3 after dropping zero columns");
  auto cplx = linsys::matrix_complexity(V);
  if (!cplx || *cplx > 1) throw ValidationError("matrix complexity must be one");

  std::vector<std::int64_t> A = A_in;
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  for (std::int64_t a : A)
    if (a < -N || a > N) throw ValidationError("set elements must lie in [-N, N]");

  linsys::KernelParam kp = linsys::kernel_parametrization(V, 1);
  const LinearSystem& psi = kp.psi;
  int q = psi.d, t = psi.t;
  for (int i = 0; i < t; ++i)
    if (!linsys::is_exact_normal_at(psi, i, 1))
      throw CertificationError("parametrization is not exact 1-normal everywhere");

  BigInt phinorm = linsys::linear_norm(psi) + t;
  std::int64_t norm64 = to_int64(phinorm);
  std::int64_t M = prime_in_range(2 * norm64 * N, 4 * norm64 * N);
  if (M == 0) throw CertificationError("no prime found in the modulus window");

  IncrementRun run;
  run.M = M;

  // host Bohr set: a regular dilate of the interval containing [-N, N]
  double base_radius = std::min(0.5, 2.2 * static_cast<double>(N) / static_cast<double>(M));
  BohrSet B0 = cyclic::find_regular_dilate(cyclic::bohr(M, {1}, base_radius));
  {
    std::int64_t reach = 0;
    for (std::int64_t x : B0.elems) reach = std::max<std::int64_t>(reach, std::llabs(x));
    if (reach < N) throw CertificationError("host Bohr set does not cover the box");
  }

  std::vector<std::int64_t> cur = A;
  double alpha0 = static_cast<double>(cur.size()) / static_cast<double>(B0.size());
  run.step_budget = alpha0 > 0 ? consts.step_budget_scale * std::pow(alpha0, -(12.0 * t - 1.0))
                               : 1.0;

  // key coordinates: a free coordinate set of the kernel of V
  std::vector<int> key_coords;
  {
    IntMatrix kb = linsys::kernel_lattice_basis(V);
    std::vector<std::vector<BigRat>> rows;
    for (int i = 0; i < kb.rows && static_cast<int>(key_coords.size()) < kb.cols; ++i) {
      std::vector<BigRat> row(kb.cols);
      for (int j = 0; j < kb.cols; ++j) row[j] = kb.at(i, j);
      rows.push_back(row);
      if (linsys::rank_rows(rows) == static_cast<int>(rows.size())) key_coords.push_back(i);
      else rows.pop_back();
    }
  }

  for (int step = 0;; ++step) {
    if (step > consts.max_steps || static_cast<double>(step) > run.step_budget + 1)
      throw BudgetError("step budget exceeded; iteration constants are miscalibrated");

    double alpha = static_cast<double>(cur.size()) / static_cast<double>(B0.size());
    StepLog log;
    log.step = step;
    log.alpha = alpha;
    log.dim = B0.dim;
    log.delta = B0.delta;
    log.set_size = static_cast<std::int64_t>(cur.size());
    log.bohr_size = B0.size();

    BohrChain chain = budgeted_chain(B0, q, consts.chain_rho, consts);
    MultilinearOutcome outcome = multilinear_expand(cur, chain, psi, consts);
    log.T_indicator = outcome.T_indicator;

    if (outcome.many_patterns) {
      log.action = "many-patterns";
      run.steps.push_back(log);
      if (trace) trace->push_back(log);
      run.many_patterns = true;
      run.steps_taken = step;
      run.configs = patterns::count_bohr_configs(psi, chain, cur, M, consts.tbohr_budget);
      std::int64_t distinct =
          distinct_image_count(psi, chain, cur, M, key_coords, consts.tbohr_budget);
      // map the certified configurations back into the original set: each
      // distinct image y gives u_total + m_total y, a solution in A^t
      run.solutions_bound = distinct;
      run.mult_bound = distinct > 0 ? (run.configs + distinct - 1) / distinct : BigInt(0);
      double ad = alpha * B0.delta / std::max(1, B0.dim);
      if (run.configs > 0 && ad > 0 && ad < 1) {
        double lhs = std::log(static_cast<double>(run.configs.convert_to<double>()) /
                              std::pow(static_cast<double>(N), q + 1));
        run.closedform_exponent = lhs / std::log(ad);
      }
      break;
    }

    // density increment
    log.action = "increment";
    CyclicFn fA(M);
    for (std::int64_t x : B0.elems) fA.at(x) = -alpha;
    for (std::int64_t x : cur) fA.at(x) += 1.0;
    double eta = std::max(outcome.witness_value, outcome.pigeonhole_floor);

    LocateResult loc = locate_large_norm(fA, chain, psi, kp.witness, outcome.witness_index, eta, consts);
    const BohrSet& Bk = chain.sets[static_cast<std::size_t>(loc.k + 1)];
    const BohrSet& Bl = chain.sets[static_cast<std::size_t>(loc.l + 1)];
    UntwistResult un = untwist(fA, loc.a, loc.b, B0, Bk, Bl, loc.value, consts);
    if (!un.certified) log.action = "increment(untwist-relaxed)";  // proceed on the measured value
    InverseResult inv = local_inverse_u2(fA, B0, un.B1t, un.B2t, loc.a * loc.b, eta, consts);

    // state update with exact bookkeeping
    std::int64_t m = loc.a * loc.b;
    std::vector<std::int64_t> next;
    std::unordered_set<std::int64_t> curset(cur.begin(), cur.end());
    for (std::int64_t x : inv.B3.elems)
      if (curset.count(inv.u + m * x)) next.push_back(x);
    double alpha_next = static_cast<double>(next.size()) / static_cast<double>(inv.B3.size());
    double required = (1.0 + consts.incr_c * std::pow(alpha, 12.0 * t - 1.0)) * alpha;
    if (alpha_next + 1e-12 < required)
      throw CertificationError("recorded density increment fell below the certified growth rate");
    if (inv.B3.dim > B0.dim + 1) throw CertificationError("dimension grew by more than one");
    double delta_floor = std::pow(alpha / std::max(1, B0.dim), consts.delta_exponent) * B0.delta;
    if (inv.B3.delta < delta_floor) throw CertificationError("radius shrank below the certified floor");

    log.u = inv.u;
    log.m = m;
    run.steps.push_back(log);
    if (trace) trace->push_back(log);

    run.u_total = run.u_total + run.m_total * inv.u;
    run.m_total = run.m_total * m;
    if (std::llabs(run.m_total) > (std::int64_t(1) << 40)) throw BudgetError("rescaling factor overflow");
    B0 = inv.B3;
    cur = std::move(next);
  }

  // account for zero columns dropped during normalization: those coordinates
  // range freely over the set
  if (norm.dropped > 0) {
    BigInt factor = 1;
    for (int k = 0; k < norm.dropped; ++k) factor *= static_cast<std::int64_t>(A_in.size());
    run.solutions_bound *= factor;
  }
  return run;
}

// ---- transference ----

TransferenceReport transference_pipeline(const IntMatrix& V, const std::vector<std::int64_t>& A,
                                         const sieve::WTrickContext& ctx, const sieve::GpyConfig& cfg,
                                         double delta, double eps, const Constants& consts) {
  TransferenceReport rep;
  std::int64_t N = ctx.N;
  for (std::int64_t a : A) {
    if (a < 1 || a > N) throw ValidationError("set must lie in [1, N]");
    if (!is_prime(ctx.w64 * a + ctx.b)) throw ValidationError("set is not a subset of the tricked primes");
  }

  linsys::KernelParam kp = linsys::kernel_parametrization(V, 1);
  int t = V.cols;
  std::int64_t normV = to_int64(linsys::matrix_norm(V));
  BigInt n = linsys::linear_norm(kp.psi);
  BigInt reduce_floor = 1;
  for (int i = 2; i <= t; ++i) reduce_floor *= i;
  BigInt np = 1;
  for (int i = 0; i < t; ++i) np *= n;
  reduce_floor *= np;
  std::int64_t lo = std::max<std::int64_t>(4 * (normV + 1) * N, to_int64(reduce_floor));
  std::int64_t M = prime_in_range(lo, 2 * lo);
  if (M == 0) throw CertificationError("no prime modulus found");
  rep.M = M;

  LinearSystem theta = linsys::reduce_mod(kp.psi, V, M);

  double L = static_cast<double>(M) / static_cast<double>(N);
  double height = L * ctx.phi_over_w * std::log(static_cast<double>(N));
  CyclicFn lambda(M);
  for (std::int64_t a : A) lambda.at(a) = height;
  rep.alpha = lambda.mean();

  std::vector<CyclicFn> fs(static_cast<std::size_t>(t), lambda);
  rep.T_lambda = patterns::t_operator(theta, V, fs, patterns::TMethod::automatic).value;

  SmoothingResult smooth = build_smoothing(lambda, delta, eps, N);
  rep.u2_distance = smooth.u2_distance;
  rep.u2_budget = std::pow(eps, 0.25) + std::pow(delta, 0.25);
  rep.bohr_gamma = smooth.B.gamma;
  rep.bohr_delta = smooth.B.delta;
  rep.bohr_size = smooth.B.size();
  rep.bohr_regular = cyclic::is_regular(smooth.B);

  CyclicFn diff(M);
  for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = lambda.v[k] - smooth.smoothed.v[k];

  // full multilinear expansion of T(lambda, ..., lambda)
  double total = 0;
  double diff_u2 = cyclic::u2_norm(diff);
  for (unsigned mask = 0; mask < (1u << t); ++mask) {
    for (int i = 0; i < t; ++i) fs[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? diff : smooth.smoothed;
    double val = patterns::t_operator(theta, V, fs, patterns::TMethod::automatic).value;
    total += val;
    if (mask == 0) {
      rep.T_smooth = val;
    } else {
      rep.error_terms.push_back(val);
      rep.error_sum += val;
      rep.gvn_rhs.push_back(std::pow(diff_u2, 4.0));
    }
  }
  rep.identity_residual = std::abs(rep.T_lambda - total);

  // majorant diagnostics, and the first error term re-bounded under the
  // averaged weight (rescaled so the functions sit below it pointwise)
  sieve::GpyEvaluator ev(ctx, cfg);
  std::vector<LinearSystem> probes{LinearSystem::from_rows({{1}}),
                                   LinearSystem::from_rows({{1, 0}, {1, 1}, {1, 2}})};
  rep.weight_report = extend_weight(ev, M, probes, consts);
  {
    CyclicFn nu_avg = average_weight(rep.weight_report.nu, smooth.B);
    // ignore transform noise far outside the supports; the domination check
    // carries a matching additive slack
    double scale = 1.0;
    for (std::int64_t x = 0; x < M; ++x) {
      double top = std::max(std::abs(diff.v[static_cast<std::size_t>(x)]),
                            std::abs(smooth.smoothed.v[static_cast<std::size_t>(x)]));
      double bot = nu_avg.v[static_cast<std::size_t>(x)];
      if (top > 1e-10)
        scale = std::max(scale, bot > 0 ? top / bot : std::numeric_limits<double>::infinity());
    }
    if (std::isfinite(scale)) {
      scale *= 1.0 + 1e-9;
      std::vector<CyclicFn> scaled(static_cast<std::size_t>(t), CyclicFn(M));
      for (int i = 0; i < t; ++i) {
        const CyclicFn& src = (i == 0) ? diff : smooth.smoothed;
        for (std::int64_t x = 0; x < M; ++x)
          scaled[static_cast<std::size_t>(i)].v[static_cast<std::size_t>(x)] =
              src.v[static_cast<std::size_t>(x)] / scale;
      }
      auto g = gvn_check(theta, V, nu_avg, scaled, 0, 1);
      rep.gvn_weighted_lhs = g.lhs;
      rep.gvn_weighted_rhs = g.rhs;
      rep.gvn_scale = scale;
    }
  }

  LevelSetResult lev = level_set(smooth.smoothed, rep.alpha, 0.5);
  rep.levelset_density = lev.density;
  std::vector<std::int64_t> Aprime;
  for (std::int64_t x : lev.elems)
    if (std::llabs(x) <= 2 * N) Aprime.push_back(x);
  rep.mainterm = run_increment(V, Aprime, 2 * N, consts);

  rep.solutions = patterns::count_solutions(V, A, consts.count_budget);
  rep.distinct_solutions = patterns::count_distinct_solutions(V, A, consts.count_budget);
  return rep;
}

}  // namespace increment
}  // namespace cplx1
