#include "cplx1/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "cplx1/primes.hpp"

namespace cplx1 {
namespace patterns {

using cyclic::BohrSet;
using cyclic::CyclicFn;
using linsys::IntMatrix;
using linsys::LinearSystem;

cyclic::CyclicFn IntFn::wrap(std::int64_t M) const {
  CyclicFn f(M);
  for (std::int64_t x = lo; x <= hi; ++x) {
    std::int64_t c = mod_centered(mod_pos(x, M), M);
    if (c != x) throw ValidationError("support does not embed into the centered window of Z_M");
    f.at(x) += at(x);
  }
  return f;
}

namespace {

// basis of Ker_{Z_M}(V) by Gaussian elimination mod M (M prime)
std::vector<std::vector<std::int64_t>> kernel_mod(const IntMatrix& V, std::int64_t M) {
  int r = V.rows, t = V.cols;
  std::vector<std::vector<std::int64_t>> m(r, std::vector<std::int64_t>(t));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < t; ++j) m[i][j] = to_int64(V.at(i, j) % M);
  std::vector<int> pivcol;
  int rk = 0;
  for (int col = 0; col < t && rk < r; ++col) {
    int piv = -1;
    for (int i = rk; i < r; ++i)
      if (mod_pos(m[i][col], M) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rk], m[piv]);
    std::int64_t inv = pow_mod(m[rk][col], M - 2, M);
    for (int j = 0; j < t; ++j) m[rk][j] = mul_mod(mod_pos(m[rk][j], M), inv, M);
    for (int i = 0; i < r; ++i) {
      if (i == rk) continue;
      std::int64_t f = mod_pos(m[i][col], M);
      if (f == 0) continue;
      for (int j = 0; j < t; ++j) m[i][j] = mod_pos(m[i][j] - mul_mod(f, m[rk][j], M), M);
    }
    pivcol.push_back(col);
    ++rk;
  }
  std::vector<bool> is_piv(t, false);
  for (int c : pivcol) is_piv[c] = true;
  std::vector<std::vector<std::int64_t>> basis;
  for (int freec = 0; freec < t; ++freec) {
    if (is_piv[freec]) continue;
    std::vector<std::int64_t> v(t, 0);
    v[freec] = 1;
    for (int i = 0; i < rk; ++i) v[pivcol[i]] = mod_pos(-m[i][freec], M);
    basis.push_back(std::move(v));
  }
  return basis;
}

double t_brute(const LinearSystem& theta, const std::vector<CyclicFn>& fs, std::int64_t M,
               std::int64_t budget, std::int64_t& cost) {
  int d = theta.d, t = theta.t;
  double points = std::pow(static_cast<double>(M), d);
  if (points > static_cast<double>(budget)) throw BudgetError("brute-force pattern average too large");
  std::vector<std::int64_t> cf(static_cast<std::size_t>(t) * d);
  std::vector<std::int64_t> ct(t);
  for (int i = 0; i < t; ++i) {
    ct[i] = to_int64(theta.consts[i] % M);
    for (int j = 0; j < d; ++j) cf[static_cast<std::size_t>(i) * d + j] = to_int64(theta.c(i, j) % M);
  }
  KahanSum acc;
  std::vector<std::int64_t> n(d, 0);
  std::int64_t visited = 0;
  while (true) {
    double prod = 1.0;
    for (int i = 0; i < t && prod != 0.0; ++i) {
      std::int64_t y = ct[i];
      for (int j = 0; j < d; ++j) y += cf[static_cast<std::size_t>(i) * d + j] * n[j] % M;
      prod *= fs[static_cast<std::size_t>(i)].at(y);
    }
    acc.add(prod);
    ++visited;
    int pos = 0;
    while (pos < d && ++n[pos] == M) n[pos++] = 0;
    if (pos == d) break;
  }
  cost = visited;
  return acc.value() / points;
}

double t_kernel(const IntMatrix& V, const std::vector<CyclicFn>& fs, std::int64_t M, std::int64_t budget,
                std::int64_t& cost) {
  int t = V.cols;
  auto basis = kernel_mod(V, M);
  int k = static_cast<int>(basis.size());
  double points = std::pow(static_cast<double>(M), k);
  if (points > static_cast<double>(budget)) throw BudgetError("kernel enumeration too large");
  KahanSum acc;
  std::vector<std::int64_t> cvec(k, 0);
  std::int64_t visited = 0;
  while (true) {
    double prod = 1.0;
    for (int i = 0; i < t && prod != 0.0; ++i) {
      std::int64_t y = 0;
      for (int j = 0; j < k; ++j) y += mul_mod(cvec[j], basis[j][i], M);
      prod *= fs[static_cast<std::size_t>(i)].at(y);
    }
    acc.add(prod);
    ++visited;
    int pos = 0;
    while (pos < k && ++cvec[pos] == M) cvec[pos++] = 0;
    if (pos == k) break;
  }
  cost = visited;
  return acc.value() / points;
}

double t_fourier(const IntMatrix& V, const std::vector<CyclicFn>& fs, std::int64_t M, std::int64_t budget,
                 std::int64_t& cost) {
  // sum over the mod-M row space of V of prod_i hat f_i(rho_i): the kernel
  // average picks out exactly the frequencies orthogonal to the kernel
  int r = V.rows, t = V.cols;
  double points = std::pow(static_cast<double>(M), r);
  if (points * t > static_cast<double>(budget)) throw BudgetError("row-space summation too large");
  std::vector<cyclic::Spectrum> specs;
  specs.reserve(fs.size());
  for (const auto& f : fs) specs.push_back(cyclic::dft(f));
  std::vector<std::vector<std::int64_t>> rows(r, std::vector<std::int64_t>(t));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < t; ++j) rows[i][j] = mod_pos(to_int64(V.at(i, j) % M), M);
  // deduplicate row-space points when the rows are dependent mod M
  std::vector<std::vector<std::int64_t>> indep;
  for (auto& row : rows) {
    indep.push_back(row);
    IntMatrix sub(static_cast<int>(indep.size()), t);
    for (std::size_t i = 0; i < indep.size(); ++i)
      for (int j = 0; j < t; ++j) sub.at(static_cast<int>(i), j) = indep[i][j];
    if (static_cast<int>(indep.size()) != static_cast<int>(t - kernel_mod(sub, M).size())) indep.pop_back();
  }
  r = static_cast<int>(indep.size());
  KahanSum acc;
  std::vector<std::int64_t> mu(r, 0);
  std::int64_t visited = 0;
  while (true) {
    std::complex<double> prod = 1.0;
    for (int i = 0; i < t; ++i) {
      std::int64_t rho = 0;
      for (int j = 0; j < r; ++j) rho += mul_mod(mu[j], indep[j][i], M);
      // E_y prod f_i(y_i) picks hat f_i at +rho_i under this convention
      prod *= specs[static_cast<std::size_t>(i)].c[static_cast<std::size_t>(mod_pos(rho, M))];
    }
    // real input data: the row-space sum pairs conjugate frequencies
    acc.add(prod.real());
    ++visited;
    int pos = 0;
    while (pos < r && ++mu[pos] == M) mu[pos++] = 0;
    if (pos == r) break;
  }
  cost = visited * t;
  return acc.value();
}

}  // namespace

PatternCountResult t_operator(const LinearSystem& theta, const IntMatrix& V, const std::vector<CyclicFn>& fs,
                              TMethod method, std::int64_t budget) {
  if (theta.ambient != linsys::Ambient::cyclic) throw ValidationError("t_operator expects a cyclic system");
  if (static_cast<int>(fs.size()) != theta.t) throw ValidationError("need one function per form");
  std::int64_t M = to_int64(theta.modulus);
  for (const auto& f : fs)
    if (f.M != M) throw ValidationError("function modulus mismatch");
  PatternCountResult out;
  if (method == TMethod::automatic) {
    double brute_cost = std::pow(static_cast<double>(M), theta.d);
    double kernel_cost = std::pow(static_cast<double>(M), V.cols - V.rows);
    double fourier_cost = std::pow(static_cast<double>(M), V.rows) * theta.t + 3.0 * M * std::log2(M + 1.0);
    if (fourier_cost <= std::min(brute_cost, kernel_cost)) method = TMethod::fourier;
    else if (kernel_cost <= brute_cost) method = TMethod::kernel;
    else method = TMethod::brute;
  }
  switch (method) {
    case TMethod::brute:
      out.value = t_brute(theta, fs, M, budget, out.cost);
      out.method = "brute";
      break;
    case TMethod::kernel:
      out.value = t_kernel(V, fs, M, budget, out.cost);
      out.method = "kernel";
      break;
    default:
      out.value = t_fourier(V, fs, M, budget, out.cost);
      out.method = "fourier";
      break;
  }
  return out;
}

double t_over_z(const IntMatrix& V, const std::vector<IntFn>& fs, std::int64_t N, std::int64_t M) {
  if (static_cast<int>(fs.size()) != V.cols) throw ValidationError("need one function per coordinate");
  BigInt normV = linsys::matrix_norm(V);
  if (BigInt(M) <= 2 * normV * N) throw ValidationError("modulus too small: need M > 2 |V| N");
  for (const auto& f : fs)
    if (f.lo < -2 * N || f.hi > 2 * N) throw ValidationError("support must lie in [-2N, 2N]");
  IntMatrix basis = linsys::kernel_lattice_basis(V);
  KahanSum acc;
  linsys::enumerate_lattice_in_box(basis, -2 * N, 2 * N, [&](const std::vector<std::int64_t>& y) {
    double prod = 1.0;
    for (int i = 0; i < V.cols && prod != 0.0; ++i) prod *= fs[static_cast<std::size_t>(i)].at(y[i]);
    acc.add(prod);
  });
  return acc.value() / std::pow(static_cast<double>(M), V.cols - V.rows);
}

namespace {

struct SetCounter {
  const IntMatrix& V;
  std::vector<std::int64_t> A;
  std::unordered_set<std::int64_t> members;

  SetCounter(const IntMatrix& V_, const std::vector<std::int64_t>& A_) : V(V_), A(A_) {
    std::sort(A.begin(), A.end());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    members.insert(A.begin(), A.end());
  }

  std::int64_t count(bool distinct, std::int64_t budget) const {
    if (A.empty()) return 0;
    if (linsys::rank(V) != V.rows) throw ValidationError("matrix must have full row rank");
    IntMatrix basis = linsys::kernel_lattice_basis(V);
    int k = basis.cols, t = V.cols;
    double work = std::pow(static_cast<double>(A.size()), k);
    if (work > static_cast<double>(budget)) throw BudgetError("solution count enumeration too large");
    // free coordinates parametrize the kernel lattice; every solution with
    // all coordinates in A has its free coordinates in A
    std::int64_t lo = A.front(), hi = A.back();
    std::int64_t total = 0;
    linsys::enumerate_lattice_in_box(basis, lo, hi, [&](const std::vector<std::int64_t>& y) {
      for (int i = 0; i < t; ++i)
        if (!members.count(y[i])) return;
      if (distinct) {
        for (int i = 0; i < t; ++i)
          for (int j = i + 1; j < t; ++j)
            if (y[i] == y[j]) return;
      }
      ++total;
    });
    return total;
  }
};

}  // namespace

std::int64_t count_solutions(const IntMatrix& V, const std::vector<std::int64_t>& A, std::int64_t budget) {
  return SetCounter(V, A).count(false, budget);
}

std::int64_t count_distinct_solutions(const IntMatrix& V, const std::vector<std::int64_t>& A,
                                      std::int64_t budget) {
  return SetCounter(V, A).count(true, budget);
}

BohrChain make_chain(const cyclic::BohrSet& B0, int q, double rho) {
  if (rho <= 0 || rho > 1) throw ValidationError("chain ratio must lie in (0, 1]");
  BohrChain chain;
  chain.sets.push_back(B0);
  chain.rho.push_back(1.0);
  for (int i = 1; i <= q; ++i) {
    // regular dilate with effective ratio in [rho/2, rho]
    BohrSet next = cyclic::find_regular_dilate(cyclic::dilate(chain.sets.back(), rho));
    double eff = next.delta / chain.sets.back().delta;
    chain.sets.push_back(next);
    chain.rho.push_back(eff);
  }
  return chain;
}

TBohrResult t_bohr(const LinearSystem& psi, const BohrChain& chain, const std::vector<const CyclicFn*>& fs,
                   std::int64_t budget, std::uint64_t seed, std::int64_t samples) {
  int q = psi.d, t = psi.t;
  if (static_cast<int>(chain.sets.size()) != q + 1) throw ValidationError("chain length must be q + 1");
  if (static_cast<int>(fs.size()) != t) throw ValidationError("need one function per form");
  std::int64_t M = fs[0]->M;
  std::vector<std::int64_t> coef(static_cast<std::size_t>(t) * q);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < q; ++j) coef[static_cast<std::size_t>(i) * q + j] = to_int64(psi.c(i, j), "coefficient");

  const auto& B0 = chain.sets[0].elems;
  double tuples = 1.0;
  for (int j = 1; j <= q; ++j) tuples *= static_cast<double>(chain.sets[static_cast<std::size_t>(j)].size());
  TBohrResult out;

  auto eval_tuple = [&](const std::vector<std::int64_t>& x) {
    // inner average over the shift variable
    std::vector<std::int64_t> s(t);
    for (int i = 0; i < t; ++i) {
      std::int64_t acc = 0;
      for (int j = 0; j < q; ++j) acc += coef[static_cast<std::size_t>(i) * q + j] * x[j];
      s[i] = mod_pos(acc, M);
    }
    KahanSum inner;
    for (std::int64_t x0 : B0) {
      double prod = 1.0;
      for (int i = 0; i < t && prod != 0.0; ++i) prod *= fs[static_cast<std::size_t>(i)]->at(x0 + s[i]);
      inner.add(prod);
    }
    return inner.value() / static_cast<double>(B0.size());
  };

  if (tuples * static_cast<double>(B0.size()) <= static_cast<double>(budget)) {
    out.exact = true;
    KahanSum acc;
    std::vector<std::size_t> idx(q, 0);
    std::vector<std::int64_t> x(q);
    std::int64_t visited = 0;
    while (true) {
      for (int j = 0; j < q; ++j) x[j] = chain.sets[static_cast<std::size_t>(j + 1)].elems[idx[j]];
      acc.add(eval_tuple(x));
      ++visited;
      int pos = 0;
      while (pos < q && ++idx[pos] == chain.sets[static_cast<std::size_t>(pos + 1)].elems.size()) idx[pos++] = 0;
      if (pos == q) break;
    }
    out.value = acc.value() / static_cast<double>(visited);
    out.cost = visited * static_cast<std::int64_t>(B0.size());
  } else {
    out.exact = false;
    Rng rng(seed);
    KahanSum sum, sumsq;
    std::vector<std::int64_t> x(q);
    for (std::int64_t sidx = 0; sidx < samples; ++sidx) {
      for (int j = 0; j < q; ++j) {
        const auto& e = chain.sets[static_cast<std::size_t>(j + 1)].elems;
        x[j] = e[rng.below(e.size())];
      }
      double val = eval_tuple(x);
      sum.add(val);
      sumsq.add(val * val);
    }
    out.value = sum.value() / static_cast<double>(samples);
    double var = std::max(0.0, sumsq.value() / samples - out.value * out.value);
    out.ci95 = 1.96 * std::sqrt(var / static_cast<double>(samples));
    out.cost = samples * static_cast<std::int64_t>(B0.size());
  }
  return out;
}

std::int64_t count_bohr_configs(const LinearSystem& psi, const BohrChain& chain,
                                const std::vector<std::int64_t>& A_elems, std::int64_t M,
                                std::int64_t budget) {
  int q = psi.d, t = psi.t;
  std::unordered_set<std::int64_t> A;
  for (std::int64_t a : A_elems) A.insert(mod_pos(a, M));
  std::vector<std::int64_t> coef(static_cast<std::size_t>(t) * q);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < q; ++j) coef[static_cast<std::size_t>(i) * q + j] = to_int64(psi.c(i, j), "coefficient");
  const auto& B0 = chain.sets[0].elems;
  double tuples = static_cast<double>(B0.size());
  for (int j = 1; j <= q; ++j) tuples *= static_cast<double>(chain.sets[static_cast<std::size_t>(j)].size());
  if (tuples > static_cast<double>(budget)) throw BudgetError("config count too large");
  std::int64_t total = 0;
  std::vector<std::size_t> idx(q, 0);
  std::vector<std::int64_t> x(q);
  while (true) {
    for (int j = 0; j < q; ++j) x[j] = chain.sets[static_cast<std::size_t>(j + 1)].elems[idx[j]];
    std::vector<std::int64_t> s(t);
    for (int i = 0; i < t; ++i) {
      std::int64_t acc = 0;
      for (int j = 0; j < q; ++j) acc += coef[static_cast<std::size_t>(i) * q + j] * x[j];
      s[i] = acc;
    }
    for (std::int64_t x0 : B0) {
      bool all = true;
      for (int i = 0; i < t && all; ++i) all = A.count(mod_pos(x0 + s[i], M)) != 0;
      if (all) ++total;
    }
    int pos = 0;
    while (pos < q && ++idx[pos] == chain.sets[static_cast<std::size_t>(pos + 1)].elems.size()) idx[pos++] = 0;
    if (pos == q) break;
  }
  return total;
}

std::vector<std::int64_t> parse_set(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::int64_t> out;
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(std::stoll(tok));
    } catch (...) {
      throw ValidationError("set files hold one integer per line; got '" + tok + "'");
    }
  }
  return out;
}

std::string format_set(const std::vector<std::int64_t>& A) {
  std::ostringstream out;
  for (std::int64_t a : A) out << a << '\n';
  return out.str();
}

}  // namespace patterns
}  // namespace cplx1
