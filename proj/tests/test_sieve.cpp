#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cplx1/numeric.hpp"
#include "cplx1/primes.hpp"
#include "cplx1/quadrature.hpp"
#include "cplx1/sieve.hpp"

using namespace cplx1;
using namespace cplx1::sieve;

namespace {

linsys::LinearSystem threeap_psi() { return linsys::LinearSystem::from_rows({{1, 0}, {1, 1}, {1, 2}}); }
linsys::LinearSystem midpoints2() { return linsys::LinearSystem::from_rows({{1, 2, 0}, {1, 1, 1}, {1, 0, 2}}); }

// oracle: enumerate every divisor of Wn + b, with the multiplicative sign
// recomputed from scratch by trial factorization
double brute_weight(std::int64_t n, const GpyEvaluator& ev) {
  std::int64_t v = ev.ctx.w64 * n + ev.ctx.b;
  std::vector<std::int64_t> divisors;
  for (std::int64_t m = 1; m * m <= v; ++m) {
    if (v % m != 0) continue;
    divisors.push_back(m);
    if (m != v / m) divisors.push_back(v / m);
  }
  double sum = 0.0;
  for (std::int64_t m : divisors) {
    std::int64_t q = m;
    int bits = 0;
    bool squarefree = true;
    for (std::int64_t p = 2; p * p <= q && squarefree; ++p) {
      if (q % p) continue;
      q /= p;
      ++bits;
      if (q % p == 0) squarefree = false;
    }
    if (q > 1) ++bits;
    if (!squarefree) continue;
    sum += (bits % 2 == 0 ? 1.0 : -1.0) * rho(m, ev.cfg);
  }
  return ev.h * sum * sum;
}

}  // namespace

TEST_CASE("primorial") {
  CHECK(primorial(1) == 1);
  CHECK(primorial(5) == 30);
  CHECK(primorial(13) == 30030);
  CHECK(primorial_phi(5) == 8);
}

TEST_CASE("cutoff function") {
  CHECK(chi(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chi(1) == 0.0);
  CHECK(chi(-1) == 0.0);
  CHECK(chi(0.5) == doctest::Approx(std::exp(1.5) * std::exp(-4.0 / 3.0)).epsilon(1e-14));
  // derivative against central differences
  for (double x : {-0.7, -0.2, 0.1, 0.4, 0.8}) {
    double h = 1e-6;
    double num = (chi(x + h) - chi(x - h)) / (2 * h);
    CHECK(chi_derivative(x) == doctest::Approx(num).epsilon(1e-6));
  }
}

TEST_CASE("truncated weights") {
  auto cfg = make_config(100000, 0.05);
  CHECK(rho(1, cfg) == 1.0);
  CHECK(rho(100, cfg) == 0.0);
  auto cfg2 = make_config(10000, 0.5);  // R = 100
  CHECK(cfg2.R == doctest::Approx(100.0));
  CHECK(rho(10, cfg2) == doctest::Approx(chi(0.5)).epsilon(1e-12));
  // within [0, e^2]
  for (std::int64_t m = 1; m <= 100; ++m) {
    CHECK(rho(m, cfg2) >= 0.0);
    CHECK(rho(m, cfg2) <= std::exp(2.0));
  }
}

TEST_CASE("tricked-prime measure") {
  auto ctx = make_context(100, 2, 1);
  CHECK(ctx.w64 == 2);
  CHECK(lambda_bw(0, ctx) == 0.0);
  CHECK(lambda_bw(101, ctx) == 0.0);
  // 2*3 + 1 = 7 prime
  CHECK(lambda_bw(3, ctx) == doctest::Approx(0.5 * std::log(100.0)).epsilon(1e-14));
  // 2*4 + 1 = 9 composite
  CHECK(lambda_bw(4, ctx) == 0.0);
  CHECK_THROWS_AS(make_context(100, 3, 3), ValidationError);  // gcd(b, W) > 1
}

TEST_CASE("divisor-sum weight") {
  auto ctx = make_context(10000, 5, 1);
  auto cfg = make_config(10000, 0.5);  // R = 100: genuinely active truncation
  GpyEvaluator ev(ctx, cfg);
  // prime beyond R: only the unit divisor contributes
  // 30n + 1 prime and > R = 100, e.g. n = 5 -> 151
  CHECK(ev.weight(5) == doctest::Approx(ev.h).epsilon(1e-12));
  // brute-force equivalence on a spread of arguments
  for (std::int64_t n = 1; n <= 400; ++n)
    CHECK(ev.weight(n) == doctest::Approx(brute_weight(n, ev)).epsilon(1e-12));
  // renormalized variant
  CHECK(ev.nu(5) == doctest::Approx(ev.h / ev.c_chi2).epsilon(1e-12));
  for (std::int64_t n = 1; n <= 50; ++n) CHECK(ev.nu(n) >= 0.0);
}

TEST_CASE("majorization") {
  auto ctx = make_context(2000, 5, 1);
  auto cfg = make_config(2000, 0.05);
  std::vector<std::int64_t> sample;
  for (std::int64_t n = 1; n <= 2000; ++n) sample.push_back(n);
  auto rep = majorization_check(ctx, cfg, sample);
  CHECK(rep.checked == 2000);
  CHECK(rep.violations == 0);
  // equality at tricked primes beyond R: lambda = eta^{-1} Lambda exactly
  CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("local probabilities") {
  auto ctx = make_context(10000, 5, 1);
  auto psi = threeap_psi();
  // p <= omega: zero
  for (std::int64_t p : {2, 3, 5}) {
    auto tab = local_factor_table(p, psi, ctx);
    for (unsigned mask = 1; mask < 64; ++mask) CHECK(tab.alpha(mask) == 0);
  }
  // vertical: exactly 1/p
  for (std::int64_t p : {7, 11, 13, 101}) {
    auto tab = local_factor_table(p, psi, ctx);
    for (int i = 0; i < 3; ++i) {
      for (unsigned sub = 1; sub < 4; ++sub) {
        unsigned mask = sub << (2 * i);
        CHECK(tab.alpha(mask) == BigRat(1, p));
      }
    }
    // non-vertical pairs of independent forms: exactly 1/p^2
    unsigned mask13 = (1u << 0) | (1u << 4);  // forms 1 and 3
    CHECK(tab.alpha(mask13) == BigRat(1, p * p));
  }
  // the 1/49 case from the midpoints family too
  auto tabm = local_factor_table(7, midpoints2(), ctx);
  CHECK(tabm.alpha((1u << 0) | (1u << 4)) == BigRat(1, 49));
}

TEST_CASE("vertical identity") {
  for (int t = 1; t <= 6; ++t) {
    std::int64_t sum = 0;
    for (unsigned B = 1; B < (1u << (2 * t)); ++B)
      if (is_vertical(B, t)) sum += (__builtin_popcount(B) % 2 == 0) ? 1 : -1;
    CHECK(sum == -t);
  }
}

TEST_CASE("euler factors") {
  auto ctx = make_context(10000, 5, 1);
  auto cfg = make_config(10000, 0.3);
  auto single = linsys::LinearSystem::from_rows({{1}});
  std::vector<double> xi(2, 0.0);
  // p <= omega: all alpha vanish, factor is 1
  CHECK(std::abs(euler_factor(local_factor_table(3, single, ctx), xi, cfg) - 1.0) < 1e-15);
  // p > omega, t = 1, xi = 0: 1 - 2 p^{-1-1/logR} + p^{-1-2/logR}
  std::int64_t p = 11;
  auto tab = local_factor_table(p, single, ctx);
  double lr = cfg.logR();
  double expect = 1.0 - 2.0 * std::pow(static_cast<double>(p), -(1.0 + 1.0 / lr)) +
                  std::pow(static_cast<double>(p), -(1.0 + 2.0 / lr));
  CHECK(std::abs(euler_factor(tab, xi, cfg) - expect) < 1e-12);
  // triangle bound |E - 1| <= sum of nonempty alphas
  double slack = 0;
  for (unsigned B = 1; B < 4; ++B) slack += to_double(tab.alpha(B));
  CHECK(std::abs(euler_factor(tab, xi, cfg) - 1.0) <= slack + 1e-12);
}

TEST_CASE("euler product vs closed form") {
  auto ctx = make_context(100000, 5, 1);
  auto cfg = make_config(100000, 0.2);
  auto single = linsys::LinearSystem::from_rows({{1}});
  std::vector<double> xi(2, 0.0);
  // empty product
  CHECK(euler_product(xi, single, ctx, cfg, 1).product == std::complex<double>(1.0));
  // closed-form factor at xi = 0 for t = 1: h^{-1} * 1 * 1 * (1/2)
  auto res = euler_product(xi, single, ctx, cfg, 500);
  double h = ctx.phi_over_w * cfg.logR();
  CHECK(std::abs(res.approximation - 0.5 / h) < 1e-12);
  // the truncated product settles as the cutoff grows
  auto res2 = euler_product(xi, single, ctx, cfg, 2000);
  auto res3 = euler_product(xi, single, ctx, cfg, 8000);
  CHECK(std::abs(res3.product - res2.product) < std::abs(res2.product - res.product));

  // convergence study in the regime where the closed form is accurate: the
  // cutoff must clear R while the truncation stays long against the small
  // primes
  auto ctx13 = make_context(1000, 13, 1);
  GpyConfig wide;
  wide.eta = 0.3;
  wide.R = std::exp(6.0);
  auto near = euler_product(xi, single, ctx13, wide, 20000);
  auto far = euler_product(xi, single, ctx13, wide, 60000);
  CHECK(std::abs(far.ratio - 1.0) < std::abs(near.ratio - 1.0));
  CHECK(std::abs(far.ratio - 1.0) < 0.1);
}

TEST_CASE("sieve factor two ways") {
  auto sf = sieve_factor_c2();
  CHECK(sf.derivative > 0.0);
  CHECK(sf.difference < 1e-4);
  // the integrand of the derivative route vanishes beyond 1
  CHECK(chi_derivative(1.5) == 0.0);
  // second resolution agreement
  auto sf2 = sieve_factor_c2(560);
  CHECK(std::abs(sf.quadrature - sf2.quadrature) < 1e-5);
}

TEST_CASE("fourier truncation error shrinks with L") {
  auto cfg = make_config(10000, 0.5);  // R = 100
  // rho(m) against int_{-L}^{L} m^{-(1+i xi)/log R} phi(xi) d xi
  auto truncated = [&](std::int64_t m, double L) {
    std::vector<double> xs, ws;
    composite_nodes(-L, L, std::max(8, static_cast<int>(L)), 12, xs, ws);
    std::complex<double> acc = 0;
    double x = std::log(static_cast<double>(m)) / cfg.logR();
    for (std::size_t i = 0; i < xs.size(); ++i)
      acc += ws[i] * phi_transform(xs[i]) * std::exp(std::complex<double>(-x, -xs[i] * x));
    return acc.real();
  };
  for (std::int64_t m : {2, 5, 20, 80}) {
    double e1 = std::abs(rho(m, cfg) - truncated(m, 8));
    double e2 = std::abs(rho(m, cfg) - truncated(m, 20));
    double e3 = std::abs(rho(m, cfg) - truncated(m, 45));
    CHECK(e2 <= e1 + 1e-12);
    CHECK(e3 <= e2 + 1e-12);
    CHECK(e3 < 5e-3);
  }
}

TEST_CASE("unfolding oracle") {
  auto ctx = make_context(10000, 5, 1);
  // degenerate truncation: both sides collapse to the point count
  {
    auto cfg = make_config(10000, 0.01);  // R < 2
    auto res = unfolding_oracle(linsys::LinearSystem::from_rows({{1}}), ctx, cfg, 50);
    CHECK(res.lhs == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(res.rhs == doctest::Approx(50.0).epsilon(1e-12));
  }
  // active truncation, one form
  {
    GpyConfig cfg;
    cfg.eta = 0.2;
    cfg.R = 5.0;
    auto res = unfolding_oracle(linsys::LinearSystem::from_rows({{1}}), ctx, cfg, 50);
    CHECK(std::abs(res.lhs - res.rhs) <= res.boundary_bound);
  }
  // multiplicativity of the local density over coprime moduli: joint density
  // of (p | forms 1,2) and (q | forms 1,2) over Z_{pq}^2 splits by CRT
  {
    auto psi = threeap_psi();
    unsigned mask = (1u << 0) | (1u << 2);  // forms 1 and 2 touched
    for (std::int64_t p : {7, 11})
      for (std::int64_t q : {5, 13}) {
        if (q == 5) continue;  // p <= omega cases are identically zero
        auto tp = local_factor_table(p, psi, ctx);
        auto tq = local_factor_table(q, psi, ctx);
        BigInt count = 0;
        for (std::int64_t n1 = 0; n1 < p * q; ++n1)
          for (std::int64_t n2 = 0; n2 < p * q; ++n2) {
            std::vector<std::int64_t> n{n1, n2};
            bool all = true;
            for (int i = 0; i < 2 && all; ++i) {
              std::int64_t v = ctx.w64 * psi.eval64(i, n) + ctx.b;
              all = (mod_pos(v, p) == 0) && (mod_pos(v, q) == 0);
            }
            if (all) ++count;
          }
        BigRat joint(count, BigInt(p * q) * BigInt(p * q));
        CHECK(joint == tp.alpha(mask) * tq.alpha(mask));
      }
  }
}

TEST_CASE("correlation harness") {
  auto ctx = make_context(10000, 5, 1);
  auto cfg = make_config(10000, 0.05);
  GpyEvaluator ev(ctx, cfg);
  // empty product of forms
  linsys::LinearSystem empty(1, 1);
  empty.t = 0;
  empty.coeff.clear();
  empty.consts.clear();
  auto res0 = correlation_harness(empty, 100, ev);
  CHECK(res0.mean == 1.0);
  // determinism under a fixed seed
  auto a = correlation_harness(threeap_psi(), 10000, ev, 5000, 42);
  auto b = correlation_harness(threeap_psi(), 10000, ev, 5000, 42);
  CHECK(a.mean == b.mean);
  CHECK(a.samples == 5000);
  // exhaustive mode on a small box
  auto c = correlation_harness(linsys::LinearSystem::from_rows({{1}}), 300, ev, 5000, 1);
  CHECK(c.exhaustive);
  CHECK(c.stderr_ == 0.0);
  // degenerate budgets are rejected
  CHECK_THROWS_AS(correlation_harness(threeap_psi(), 10000, ev, 0, 1), ValidationError);
  CHECK_THROWS_AS(correlation_harness(threeap_psi(), 0, ev, 100, 1), ValidationError);
}
