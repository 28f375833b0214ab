#include "cplx1/cyclic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cplx1/primes.hpp"

namespace cplx1 {
namespace cyclic {

CyclicFn::CyclicFn(std::int64_t m, double fill) : M(m), v(static_cast<std::size_t>(m), fill) {
  if (m < 1) throw ValidationError("modulus must be positive");
  if (m > 1 && !is_prime(m)) throw ValidationError("cyclic functions live on Z_M with M prime");
}

double CyclicFn::mean() const {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(M);
}

// ---- transforms ----

namespace {

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

struct BluesteinPlan {
  std::int64_t M = 0;
  std::size_t L = 0;
  std::vector<std::complex<double>> chirp;  // exp(-i pi (x^2 mod 2M) / M)
  std::vector<std::complex<double>> bfft;
};

const BluesteinPlan& plan_for(std::int64_t M) {
  static thread_local std::map<std::int64_t, BluesteinPlan> cache;
  auto it = cache.find(M);
  if (it != cache.end()) return it->second;
  BluesteinPlan plan;
  plan.M = M;
  std::size_t L = 1;
  while (L < static_cast<std::size_t>(2 * M - 1)) L <<= 1;
  plan.L = L;
  plan.chirp.resize(static_cast<std::size_t>(M));
  for (std::int64_t x = 0; x < M; ++x) {
    std::int64_t e = mul_mod(x, x, 2 * M);
    double ang = -M_PI * static_cast<double>(e) / static_cast<double>(M);
    plan.chirp[static_cast<std::size_t>(x)] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> b(L, 0.0);
  for (std::int64_t y = 0; y < M; ++y) {
    std::complex<double> val = std::conj(plan.chirp[static_cast<std::size_t>(y)]);
    b[static_cast<std::size_t>(y)] = val;
    if (y > 0) b[L - static_cast<std::size_t>(y)] = val;
  }
  fft_pow2(b, false);
  plan.bfft = std::move(b);
  return cache.emplace(M, std::move(plan)).first->second;
}

// X_r = sum_x a_x e(-2 pi i x r / M), via the chirp factorization
// 2xr = x^2 + r^2 - (x - r)^2.
std::vector<std::complex<double>> bluestein(const std::vector<std::complex<double>>& a, std::int64_t M) {
  if (M == 1) return {a.empty() ? std::complex<double>(0) : a[0]};
  const BluesteinPlan& plan = plan_for(M);
  std::vector<std::complex<double>> A(plan.L, 0.0);
  for (std::int64_t x = 0; x < M; ++x)
    A[static_cast<std::size_t>(x)] = a[static_cast<std::size_t>(x)] * plan.chirp[static_cast<std::size_t>(x)];
  fft_pow2(A, false);
  for (std::size_t i = 0; i < plan.L; ++i) A[i] *= plan.bfft[i];
  fft_pow2(A, true);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(M));
  for (std::int64_t r = 0; r < M; ++r)
    out[static_cast<std::size_t>(r)] = plan.chirp[static_cast<std::size_t>(r)] * A[static_cast<std::size_t>(r)];
  return out;
}

}  // namespace

Spectrum dft(const CyclicFn& f) {
  std::vector<std::complex<double>> a(f.v.begin(), f.v.end());
  Spectrum s;
  s.M = f.M;
  s.c = bluestein(a, f.M);
  for (auto& x : s.c) x /= static_cast<double>(f.M);
  return s;
}

CyclicFn idft(const Spectrum& s) {
  if (static_cast<std::int64_t>(s.c.size()) != s.M) throw ValidationError("spectrum size mismatch");
  std::vector<std::complex<double>> a(s.c.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::conj(s.c[i]);
  auto X = bluestein(a, s.M);
  CyclicFn f(s.M);
  for (std::size_t i = 0; i < X.size(); ++i) f.v[i] = std::conj(X[i]).real();
  return f;
}

Spectrum dft_direct(const CyclicFn& f) {
  if (f.M > 4096) throw BudgetError("direct transform oracle limited to small M");
  Spectrum s;
  s.M = f.M;
  s.c.assign(static_cast<std::size_t>(f.M), 0.0);
  for (std::int64_t r = 0; r < f.M; ++r) {
    std::complex<double> acc = 0.0;
    for (std::int64_t x = 0; x < f.M; ++x) {
      double ang = -2.0 * M_PI * static_cast<double>(mul_mod(x, r, f.M)) / static_cast<double>(f.M);
      acc += f.v[static_cast<std::size_t>(x)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    s.c[static_cast<std::size_t>(r)] = acc / static_cast<double>(f.M);
  }
  return s;
}

CyclicFn convolve(const CyclicFn& f, const CyclicFn& g) {
  if (f.M != g.M) throw ValidationError("convolution needs matching moduli");
  Spectrum a = dft(f), b = dft(g);
  for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] *= b.c[i];
  return idft(a);
}

double u2_norm(const CyclicFn& f) {
  Spectrum s = dft(f);
  KahanSum acc;
  for (const auto& c : s.c) {
    double m2 = std::norm(c);
    acc.add(m2 * m2);
  }
  return std::pow(std::max(0.0, acc.value()), 0.25);
}

namespace {

// ||f||_{U^k}^{2^k} by the recursion over multiplicative derivatives.
double uk_pow(const CyclicFn& f, int k) {
  if (k == 1) {
    double m = f.mean();
    return m * m;
  }
  KahanSum acc;
  CyclicFn g(f.M);
  for (std::int64_t h = 0; h < f.M; ++h) {
    for (std::int64_t x = 0; x < f.M; ++x)
      g.v[static_cast<std::size_t>(x)] = f.v[static_cast<std::size_t>(x)] * f.at(x + h);
    acc.add(uk_pow(g, k - 1));
  }
  return acc.value() / static_cast<double>(f.M);
}

}  // namespace

double uk_norm(const CyclicFn& f, int k, std::int64_t budget) {
  if (k < 1) throw ValidationError("Gowers norm order must be >= 1");
  double cost = std::pow(static_cast<double>(f.M), k);
  if (cost > static_cast<double>(budget)) throw BudgetError("direct Gowers norm too large");
  double p = uk_pow(f, k);
  return std::pow(std::max(0.0, p), 1.0 / std::pow(2.0, k));
}

// ---- Bohr sets ----

namespace {

std::int64_t radius_threshold(double radius, std::int64_t M) {
  double bound = radius * static_cast<double>(M) + 1e-9;
  return static_cast<std::int64_t>(std::floor(bound));
}

std::vector<std::int64_t> members_at(const std::vector<std::int64_t>& scores, double radius, std::int64_t M) {
  std::int64_t T = radius_threshold(radius, M);
  std::vector<std::int64_t> out;
  for (std::int64_t x = 0; x < M; ++x)
    if (scores[static_cast<std::size_t>(x)] <= T) out.push_back(mod_centered(x, M));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool BohrSet::contains(std::int64_t x) const {
  return (*scores)[static_cast<std::size_t>(mod_pos(x, M))] <= threshold();
}

std::int64_t BohrSet::threshold() const { return radius_threshold(delta, M); }

std::int64_t BohrSet::size_at_radius(double radius) const {
  std::int64_t T = radius_threshold(radius, M);
  return std::upper_bound(sorted_scores->begin(), sorted_scores->end(), T) - sorted_scores->begin();
}

BohrSet bohr(std::int64_t M, std::vector<std::int64_t> gamma, double delta) {
  if (M < 2 || !is_prime(M)) throw ValidationError("Bohr sets need a prime modulus");
  if (delta <= 0 || delta > 0.5) throw ValidationError("Bohr radius must lie in (0, 1/2]");
  std::sort(gamma.begin(), gamma.end());
  gamma.erase(std::unique(gamma.begin(), gamma.end()), gamma.end());
  for (std::int64_t& r : gamma) r = mod_pos(r, M);
  std::sort(gamma.begin(), gamma.end());
  gamma.erase(std::unique(gamma.begin(), gamma.end()), gamma.end());
  if (gamma.empty()) gamma = {0};

  auto scores = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(M), 0);
  for (std::int64_t x = 0; x < M; ++x) {
    std::int64_t best = 0;
    for (std::int64_t r : gamma) {
      std::int64_t v = mul_mod(x, r, M);
      best = std::max(best, std::min(v, M - v));
    }
    (*scores)[static_cast<std::size_t>(x)] = best;
  }
  auto sorted = std::make_shared<std::vector<std::int64_t>>(*scores);
  std::sort(sorted->begin(), sorted->end());

  BohrSet B;
  B.M = M;
  B.gamma = std::move(gamma);
  B.delta = delta;
  B.dim = static_cast<int>(B.gamma.size());
  B.scores = scores;
  B.sorted_scores = sorted;
  B.elems = members_at(*scores, delta, M);
  return B;
}

BohrSet dilate(const BohrSet& B, double rho) {
  if (rho <= 0 || rho > 1) throw ValidationError("dilate factor must lie in (0, 1]");
  if (rho == 1.0) return B;
  BohrSet out = B;
  out.delta = B.delta * rho;
  out.elems = members_at(*B.scores, out.delta, B.M);
  return out;
}

namespace {

// Regularity decided from the sorted score list alone, so dilates can be
// scanned without materializing their elements. |B_{1 +- rho}| is a step
// function of rho; each step is checked at the rho where it binds hardest.
bool is_regular_radius(const std::vector<std::int64_t>& sorted_scores, int d, double delta, std::int64_t M) {
  if (d == 0) return true;
  double rho_max = std::pow(2.0, -6.0) / d;
  double dM = delta * static_cast<double>(M);
  auto cnt = [&](std::int64_t T) {
    return static_cast<double>(std::upper_bound(sorted_scores.begin(), sorted_scores.end(), T) -
                               sorted_scores.begin());
  };
  double n = cnt(radius_threshold(delta, M));
  if (n == 0) return false;
  std::int64_t t_hi = radius_threshold(delta, M);
  std::int64_t t_lo = radius_threshold(delta * (1 - rho_max), M);
  for (std::int64_t T = t_lo; T <= t_hi; ++T) {
    double rho_inf = std::max(0.0, (dM - static_cast<double>(T + 1)) / dM);
    if (rho_inf > rho_max) continue;
    if (cnt(T) < (1.0 - 64.0 * rho_inf * d) * n - 1e-9) return false;
  }
  std::int64_t t_top = radius_threshold(delta * (1 + rho_max), M);
  for (std::int64_t T = t_hi; T <= t_top; ++T) {
    double rho_lo = std::max(0.0, (static_cast<double>(T) - dM) / dM);
    if (rho_lo > rho_max) break;
    if (cnt(T) > (1.0 + 64.0 * rho_lo * d) * n + 1e-9) return false;
  }
  return true;
}

}  // namespace

bool is_regular(const BohrSet& B) { return is_regular_radius(*B.sorted_scores, B.dim, B.delta, B.M); }

BohrSet find_regular_dilate(const BohrSet& B) {
  const int grid = 512;
  for (int k = 0; k <= grid; ++k) {
    double c = 1.0 - 0.5 * static_cast<double>(k) / grid;
    if (B.size_at_radius(B.delta * c) == 0) continue;
    if (is_regular_radius(*B.sorted_scores, B.dim, B.delta * c, B.M)) return dilate(B, c);
  }
  throw CertificationError("no regular dilate found in [1/2, 1]");
}

// ---- box norms ----

double box_inner(const BoxFamily& fam) {
  const std::size_t n1 = fam.n1, n2 = fam.n2;
  if (n1 == 0 || n2 == 0) throw ValidationError("box norms need nonempty factor sets");
  KahanSum acc;
  for (std::size_t y0 = 0; y0 < n2; ++y0)
    for (std::size_t y1 = 0; y1 < n2; ++y1) {
      double inner0 = 0.0, inner1 = 0.0;
      for (std::size_t x = 0; x < n1; ++x) {
        inner0 += fam.h00[x * n2 + y0] * fam.h01[x * n2 + y1];
        inner1 += fam.h10[x * n2 + y0] * fam.h11[x * n2 + y1];
      }
      acc.add(inner0 * inner1);
    }
  double n1d = static_cast<double>(n1), n2d = static_cast<double>(n2);
  return acc.value() / (n1d * n1d * n2d * n2d);
}

double box_norm4(const std::vector<double>& h, std::size_t n1, std::size_t n2) {
  BoxFamily fam{n1, n2, h, h, h, h};
  double v = box_inner(fam);
  if (v < -1e-12) throw CertificationError("box norm fourth power came out negative");
  return std::max(0.0, v);
}

double box_norm(const std::vector<double>& h, std::size_t n1, std::size_t n2) {
  return std::pow(box_norm4(h, n1, n2), 0.25);
}

InequalityCheck box_vdc_check(const std::vector<double>& h, const std::vector<double>& b1,
                              const std::vector<double>& b2, std::size_t n1, std::size_t n2) {
  KahanSum acc;
  for (std::size_t x = 0; x < n1; ++x)
    for (std::size_t y = 0; y < n2; ++y) acc.add(h[x * n2 + y] * b1[x] * b2[y]);
  InequalityCheck out;
  out.lhs = std::abs(acc.value() / (static_cast<double>(n1) * static_cast<double>(n2)));
  out.rhs = box_norm(h, n1, n2);
  return out;
}

InequalityCheck gcs_check(const BoxFamily& fam) {
  InequalityCheck out;
  out.lhs = std::abs(box_inner(fam));
  out.rhs = box_norm(fam.h00, fam.n1, fam.n2) * box_norm(fam.h01, fam.n1, fam.n2) *
            box_norm(fam.h10, fam.n1, fam.n2) * box_norm(fam.h11, fam.n1, fam.n2);
  return out;
}

namespace {

std::vector<double> twist_table(const CyclicFn& g, std::int64_t u0, std::int64_t a, std::int64_t b,
                                const std::vector<std::int64_t>& X1, const std::vector<std::int64_t>& X2) {
  std::vector<double> h(X1.size() * X2.size());
  for (std::size_t i = 0; i < X1.size(); ++i) {
    std::int64_t base = u0 + a * X1[i];
    for (std::size_t j = 0; j < X2.size(); ++j) h[i * X2.size() + j] = g.at(base + b * X2[j]);
  }
  return h;
}

}  // namespace

double twisted_u2(const CyclicFn& g, std::int64_t a, std::int64_t b, const std::vector<std::int64_t>& X1,
                  const std::vector<std::int64_t>& X2) {
  if (mod_pos(a, g.M) == 0 || mod_pos(b, g.M) == 0) throw ValidationError("twists must be nonzero mod M");
  if (X1.empty() || X2.empty()) throw ValidationError("twisted norm needs nonempty factor sets");
  return std::pow(box_norm4(twist_table(g, 0, a, b, X1, X2), X1.size(), X2.size()), 0.25);
}

double local_twisted_u2_pow4(const CyclicFn& f, std::int64_t a, std::int64_t b,
                             const std::vector<std::int64_t>& X0, const std::vector<std::int64_t>& X1,
                             const std::vector<std::int64_t>& X2) {
  if (X0.empty() || X1.empty() || X2.empty()) throw ValidationError("local norm needs nonempty sets");
  KahanSum acc;
  for (std::int64_t u0 : X0) acc.add(box_norm4(twist_table(f, u0, a, b, X1, X2), X1.size(), X2.size()));
  return acc.value() / static_cast<double>(X0.size());
}

double local_u2(const CyclicFn& f, const std::vector<std::int64_t>& X0, const std::vector<std::int64_t>& X1,
                const std::vector<std::int64_t>& X2) {
  return std::pow(local_twisted_u2_pow4(f, 1, 1, X0, X1, X2), 0.25);
}

RegularityResiduals regularity_calculus_check(const CyclicFn& f, const BohrSet& B,
                                              const std::vector<std::int64_t>& Xprime, std::int64_t xprime,
                                              double rho) {
  if (B.size() == 0) throw ValidationError("empty Bohr set");
  RegularityResiduals out;
  double nB = static_cast<double>(B.size());
  KahanSum mean_s;
  for (std::int64_t x : B.elems) mean_s.add(f.at(x));
  double mean = mean_s.value() / nB;

  KahanSum tr;
  for (std::int64_t x : B.elems) tr.add(f.at(xprime + x));
  out.translate = std::abs(tr.value() / nB - mean);

  if (!Xprime.empty()) {
    KahanSum sm;
    for (std::int64_t x : B.elems)
      for (std::int64_t y : Xprime) sm.add(f.at(x + y));
    out.smoothing = std::abs(mean - sm.value() / (nB * static_cast<double>(Xprime.size())));
  }

  std::int64_t T = radius_threshold(B.delta * (1 - rho), B.M);
  KahanSum sh;
  for (std::int64_t x : B.elems)
    if ((*B.scores)[static_cast<std::size_t>(mod_pos(x, B.M))] <= T) sh.add(f.at(x));
  out.shrink = std::abs(sh.value() / nB - mean);
  return out;
}

std::string to_csv(const CyclicFn& f) {
  std::ostringstream out;
  out.precision(17);
  for (std::int64_t x = 0; x < f.M; ++x) out << x << ',' << f.v[static_cast<std::size_t>(x)] << '\n';
  return out.str();
}

CyclicFn from_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("csv rows must be index,value");
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  CyclicFn f(static_cast<std::int64_t>(vals.size()));
  f.v = std::move(vals);
  return f;
}

}  // namespace cyclic
}  // namespace cplx1
