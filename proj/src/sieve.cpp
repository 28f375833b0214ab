#include "cplx1/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cplx1/numeric.hpp"
#include "cplx1/primes.hpp"
#include "cplx1/quadrature.hpp"

namespace cplx1 {
namespace sieve {

using linsys::LinearSystem;

WTrickContext make_context(std::int64_t N, double omega, std::int64_t b) {
  if (N < 1) throw ValidationError("scale N must be positive");
  WTrickContext ctx;
  ctx.N = N;
  ctx.omega = omega;
  ctx.W = primorial(omega);
  ctx.b = b;
  ctx.w64 = to_int64(ctx.W, "primorial W");
  if (boost::multiprecision::gcd(ctx.W, BigInt(b)) != 1) throw ValidationError("gcd(b, W) must be 1");
  ctx.phi_over_w = 1.0;
  for (std::int64_t p : primes_upto(static_cast<std::int64_t>(omega)))
    ctx.phi_over_w *= 1.0 - 1.0 / static_cast<double>(p);
  return ctx;
}

double GpyConfig::logR() const { return std::log(R); }

GpyConfig make_config(std::int64_t N, double eta, double L) {
  if (eta <= 0 || eta > 0.5) throw ValidationError("eta must lie in (0, 1/2]");
  GpyConfig cfg;
  cfg.eta = eta;
  cfg.R = std::pow(static_cast<double>(N), eta);
  cfg.L = L;
  return cfg;
}

double chi(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return std::exp(x + 1.0 - 1.0 / (1.0 - x * x));
}

double chi_derivative(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  double s = 1.0 - x * x;
  return chi(x) * (1.0 - 2.0 * x / (s * s));
}

double rho(std::int64_t m, const GpyConfig& cfg) {
  if (m < 1) throw ValidationError("rho argument must be >= 1");
  if (m == 1) return 1.0;
  if (static_cast<double>(m) > cfg.R) return 0.0;
  return chi(std::log(static_cast<double>(m)) / cfg.logR());
}

std::complex<double> phi_transform(double xi) {
  // resolve the e^{i xi x} oscillation: a handful of panels per period
  int panels = std::max(8, static_cast<int>(std::abs(xi) / 4.0) + 1);
  std::vector<double> xs, ws;
  composite_nodes(-1.0, 1.0, panels, 12, xs, ws);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double g = chi(xs[i]) * std::exp(xs[i]);
    acc += ws[i] * g * std::exp(std::complex<double>(0.0, xi * xs[i]));
  }
  return acc / (2.0 * M_PI);
}

double lambda_bw(std::int64_t n, const WTrickContext& ctx) {
  if (n < 1 || n > ctx.N) return 0.0;
  std::int64_t v = ctx.w64 * n + ctx.b;
  if (v < 2 || !is_prime(v)) return 0.0;
  return ctx.phi_over_w * std::log(static_cast<double>(ctx.N));
}

GpyEvaluator::GpyEvaluator(const WTrickContext& c, const GpyConfig& g) : ctx(c), cfg(g) {
  h = ctx.phi_over_w * cfg.logR();
  c_chi2 = integrate([](double x) { double d = chi_derivative(x); return d * d; }, 0.0, 1.0, 96, 12);
  small_primes = primes_upto(static_cast<std::int64_t>(cfg.R));
}

double GpyEvaluator::mobius_rho_sum(std::int64_t v) const {
  if (v < 1) throw ValidationError("weight argument must have Wn+b >= 1");
  std::vector<std::int64_t> ps;  // primes <= R dividing v; larger ones have rho = 0
  for (std::int64_t p : small_primes)
    if (v % p == 0) ps.push_back(p);
  double sum = 0.0;
  std::function<void(std::size_t, std::int64_t, int)> rec = [&](std::size_t idx, std::int64_t m, int sz) {
    sum += (sz % 2 == 0 ? 1.0 : -1.0) * rho(m, cfg);
    for (std::size_t k = idx; k < ps.size(); ++k) {
      if (static_cast<double>(m) * static_cast<double>(ps[k]) > cfg.R) continue;
      rec(k + 1, m * ps[k], sz + 1);
    }
  };
  rec(0, 1, 0);
  return sum;
}

double GpyEvaluator::weight(std::int64_t n) const {
  std::int64_t v = ctx.w64 * n + ctx.b;
  double s = mobius_rho_sum(v);
  return h * s * s;
}

double GpyEvaluator::nu(std::int64_t n) const { return weight(n) / c_chi2; }

MajorizationReport majorization_check(const WTrickContext& ctx, const GpyConfig& cfg,
                                      const std::vector<std::int64_t>& sample) {
  GpyEvaluator ev(ctx, cfg);
  MajorizationReport rep;
  rep.regime_flag = cfg.eta <= 0.5 * ctx.omega / std::log(static_cast<double>(ctx.N));
  for (std::int64_t n : sample) {
    double lam = lambda_bw(n, ctx);
    double bound = ev.weight(n) / cfg.eta;
    ++rep.checked;
    double ratio = bound > 0 ? lam / bound : (lam > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (lam > bound * (1 + 1e-12)) ++rep.violations;
  }
  return rep;
}

LocalFactorTable local_factor_table(std::int64_t p, const LinearSystem& psi, const WTrickContext& ctx,
                                    std::int64_t budget) {
  if (!is_prime(p)) throw ValidationError("local factors need a prime p");
  LocalFactorTable table;
  table.p = p;
  table.t = psi.t;
  int t = psi.t, d = psi.d;
  double points = std::pow(static_cast<double>(p), d);
  if (points * t > static_cast<double>(budget)) throw BudgetError("local probability enumeration too large");
  std::vector<std::int64_t> cmod(static_cast<std::size_t>(t) * d);
  std::vector<std::int64_t> kmod(t);
  std::int64_t wmod = to_int64(ctx.W % p);
  for (int i = 0; i < t; ++i) {
    kmod[i] = mod_pos(wmod * to_int64(psi.consts[i] % p) + ctx.b, p);
    for (int j = 0; j < d; ++j)
      cmod[static_cast<std::size_t>(i) * d + j] = mod_pos(wmod * to_int64(psi.c(i, j) % p), p);
  }
  // one pass over Z_p^d, tallying which form subsets vanish simultaneously
  std::vector<std::int64_t> vanish_count(std::size_t(1) << t, 0);
  std::vector<std::int64_t> n(d, 0);
  while (true) {
    unsigned mask = 0;
    for (int i = 0; i < t; ++i) {
      std::int64_t v = kmod[i];
      for (int j = 0; j < d; ++j) v += cmod[static_cast<std::size_t>(i) * d + j] * n[j];
      if (v % p == 0) mask |= 1u << i;
    }
    ++vanish_count[mask];
    int pos = 0;
    while (pos < d && ++n[pos] == p) n[pos++] = 0;
    if (pos == d) break;
  }
  BigInt total = 1;
  for (int j = 0; j < d; ++j) total *= p;
  table.by_forms.assign(std::size_t(1) << t, BigRat(0));
  for (unsigned S = 0; S < (1u << t); ++S) {
    BigInt cnt = 0;
    for (unsigned mask = 0; mask < (1u << t); ++mask)
      if ((mask & S) == S) cnt += vanish_count[mask];
    table.by_forms[S] = BigRat(cnt, total);
  }
  return table;
}

BigRat LocalFactorTable::alpha(unsigned omega_mask) const {
  unsigned forms = 0;
  for (int i = 0; i < t; ++i)
    if (omega_mask & (3u << (2 * i))) forms |= 1u << i;
  return by_forms[forms];
}

BigRat local_alpha(std::int64_t p, unsigned omega_mask, const LinearSystem& psi, const WTrickContext& ctx) {
  return local_factor_table(p, psi, ctx).alpha(omega_mask);
}

bool is_vertical(unsigned omega_mask, int t) {
  if (omega_mask == 0) return false;
  int touched = 0;
  for (int i = 0; i < t; ++i)
    if (omega_mask & (3u << (2 * i))) ++touched;
  return touched == 1;
}

std::complex<double> euler_factor(const LocalFactorTable& table, const std::vector<double>& xi,
                                  const GpyConfig& cfg) {
  int t = table.t;
  if (static_cast<int>(xi.size()) != 2 * t) throw ValidationError("xi must have 2t entries");
  double logR = cfg.logR();
  double logp = std::log(static_cast<double>(table.p));
  std::vector<std::complex<double>> pz(2 * t);
  for (int k = 0; k < 2 * t; ++k) {
    std::complex<double> z(1.0 / logR, xi[k] / logR);
    pz[k] = std::exp(-z * logp);
  }
  std::complex<double> acc = 0.0;
  for (unsigned B = 0; B < (1u << (2 * t)); ++B) {
    BigRat a = table.alpha(B);
    if (a == 0) continue;
    std::complex<double> term = to_double(a);
    int bits = 0;
    for (int k = 0; k < 2 * t; ++k)
      if (B & (1u << k)) {
        term *= pz[k];
        ++bits;
      }
    acc += (bits % 2 == 0) ? term : -term;
  }
  return acc;
}

EulerProductResult euler_product(const std::vector<double>& xi, const LinearSystem& psi,
                                 const WTrickContext& ctx, const GpyConfig& cfg, std::int64_t pmax) {
  EulerProductResult out;
  out.truncation_regime =
      cfg.L >= 1.0 && cfg.L * std::log(std::max(2.0, ctx.omega)) <= cfg.logR();
  out.product = 1.0;
  for (std::int64_t p : primes_upto(pmax)) out.product *= euler_factor(local_factor_table(p, psi, ctx), xi, cfg);

  int t = psi.t;
  double h = ctx.phi_over_w * cfg.logR();
  std::complex<double> approx = std::pow(h, -t);
  for (unsigned B = 1; B < (1u << (2 * t)); ++B) {
    if (!is_vertical(B, t)) continue;
    std::complex<double> s = 0.0;
    int bits = 0;
    for (int k = 0; k < 2 * t; ++k)
      if (B & (1u << k)) {
        s += std::complex<double>(1.0, xi[k]);
        ++bits;
      }
    // exponent -(-1)^{|B|}
    approx *= (bits % 2 == 0) ? 1.0 / s : s;
  }
  out.approximation = approx;
  out.ratio = out.product / approx;
  return out;
}

SieveFactor sieve_factor_c2(int panels, double tol) {
  SieveFactor out;
  out.derivative =
      integrate([](double x) { double dv = chi_derivative(x); return dv * dv; }, 0.0, 1.0, 96, 12);

  auto eval = [&](int pnl) {
    double L = 240.0;
    std::vector<double> xs, ws;
    composite_nodes(-L, L, pnl, 12, xs, ws);
    std::vector<std::complex<double>> phi(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) phi[i] = phi_transform(xs[i]);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::complex<double> zi(1.0, xs[i]);
      std::complex<double> wphi_i = ws[i] * phi[i] * zi;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        std::complex<double> zj(1.0, xs[j]);
        acc += wphi_i * ws[j] * phi[j] * zj / std::complex<double>(2.0, xs[i] + xs[j]);
      }
    }
    return acc.real();
  };
  double coarse = eval(panels * 2 / 3);
  out.quadrature = eval(panels);
  if (std::abs(out.quadrature - coarse) > tol)
    throw BudgetError("sieve factor quadrature did not converge at the requested resolution");
  out.difference = std::abs(out.quadrature - out.derivative);
  return out;
}

UnfoldingResult unfolding_oracle(const LinearSystem& psi, const WTrickContext& ctx, const GpyConfig& cfg,
                                 std::int64_t P, std::int64_t budget) {
  UnfoldingResult out;
  int d = psi.d, t = psi.t;
  double points = std::pow(static_cast<double>(P), d);
  if (points > static_cast<double>(budget)) throw BudgetError("unfolding oracle domain too large");

  GpyEvaluator ev(ctx, cfg);
  KahanSum lhs;
  std::vector<std::int64_t> n(d, 1);
  while (true) {
    double prod = 1.0;
    for (int i = 0; i < t; ++i) prod *= ev.weight(psi.eval64(i, n));
    lhs.add(prod);
    int pos = 0;
    while (pos < d && ++n[pos] > P) n[pos++] = 1;
    if (pos == d) break;
  }
  out.lhs = lhs.value() / std::pow(ev.h, t);

  // squarefree integers in [1, R] and the local tables of their prime factors
  std::vector<std::int64_t> sf;
  for (std::int64_t m = 1; static_cast<double>(m) <= cfg.R; ++m) {
    bool squarefree = true;
    for (std::int64_t p = 2; p * p <= m; ++p)
      if (m % (p * p) == 0) squarefree = false;
    if (squarefree) sf.push_back(m);
  }
  std::vector<std::int64_t> ps = primes_upto(static_cast<std::int64_t>(cfg.R));
  std::vector<LocalFactorTable> tables;
  tables.reserve(ps.size());
  for (std::int64_t p : ps) tables.push_back(local_factor_table(p, psi, ctx));

  int slots = 2 * t;
  std::vector<std::size_t> pick(slots, 0);
  KahanSum rhs;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < slots; ++k) {
      std::int64_t m = sf[pick[k]];
      int bits = 0;
      for (std::int64_t p : ps)
        if (m % p == 0) ++bits;
      w *= (bits % 2 == 0 ? 1.0 : -1.0) * rho(m, cfg);
    }
    if (w != 0.0) {
      BigRat alpha = 1;
      for (std::size_t pi = 0; pi < ps.size() && alpha != 0; ++pi) {
        unsigned mask = 0;
        for (int k = 0; k < slots; ++k)
          if (sf[pick[k]] % ps[pi] == 0) mask |= 1u << k;
        if (mask) alpha *= tables[pi].alpha(mask);
      }
      if (alpha != 0) rhs.add(to_double(alpha) * w);
    }
    int pos = 0;
    while (pos < slots && ++pick[pos] == sf.size()) pick[pos++] = 0;
    if (pos == slots) break;
  }
  out.rhs = rhs.value() * points;
  out.boundary_bound = std::pow(cfg.R, 2.0 * slots) * std::pow(static_cast<double>(P), d - 1);
  return out;
}

HarnessResult correlation_harness(const LinearSystem& psi, std::int64_t P, const GpyEvaluator& ev,
                                  std::int64_t max_samples, std::uint64_t seed) {
  if (max_samples < 1) throw ValidationError("harness needs a positive sample budget");
  if (P < 1) throw ValidationError("harness needs a positive box");
  HarnessResult out;
  int d = psi.d, t = psi.t;
  if (t == 0) {
    out.mean = 1.0;
    out.exhaustive = true;
    return out;
  }
  double points = std::pow(static_cast<double>(P), d);
  KahanSum sum, sumsq;
  std::int64_t count = 0;
  auto visit = [&](const std::vector<std::int64_t>& n) {
    double prod = 1.0;
    for (int i = 0; i < t; ++i) prod *= ev.nu(psi.eval64(i, n));
    sum.add(prod);
    sumsq.add(prod * prod);
    ++count;
  };
  if (points <= static_cast<double>(max_samples)) {
    out.exhaustive = true;
    std::vector<std::int64_t> n(d, 1);
    while (true) {
      visit(n);
      int pos = 0;
      while (pos < d && ++n[pos] > P) n[pos++] = 1;
      if (pos == d) break;
    }
  } else {
    Rng rng(seed);
    std::vector<std::int64_t> n(d);
    for (std::int64_t s = 0; s < max_samples; ++s) {
      for (int j = 0; j < d; ++j) n[j] = rng.range(1, P);
      visit(n);
    }
  }
  out.samples = count;
  out.mean = sum.value() / static_cast<double>(count);
  double var = std::max(0.0, sumsq.value() / count - out.mean * out.mean);
  out.stderr_ = out.exhaustive ? 0.0 : std::sqrt(var / static_cast<double>(count));
  out.deviation = std::abs(out.mean - 1.0);
  return out;
}

}  // namespace sieve
}  // namespace cplx1
