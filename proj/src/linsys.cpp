#include "cplx1/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cplx1 {
namespace linsys {

IntMatrix::IntMatrix(int r, int c, std::vector<std::int64_t> entries) : IntMatrix(r, c) {
  if (entries.size() != a.size()) throw ValidationError("matrix entry count mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = entries[k];
}

LinearSystem LinearSystem::from_rows(std::vector<std::vector<std::int64_t>> rows,
                                     std::vector<std::int64_t> consts) {
  if (rows.empty()) throw ValidationError("system needs at least one form");
  LinearSystem s(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int i = 0; i < s.t; ++i) {
    if (static_cast<int>(rows[i].size()) != s.d) throw ValidationError("ragged system rows");
    for (int j = 0; j < s.d; ++j) s.c(i, j) = rows[i][j];
  }
  if (!consts.empty()) {
    if (static_cast<int>(consts.size()) != s.t) throw ValidationError("constants length mismatch");
    for (int i = 0; i < s.t; ++i) s.consts[i] = consts[i];
  }
  return s;
}

bool LinearSystem::is_linear() const {
  for (const BigInt& b : consts)
    if (b != 0) return false;
  return true;
}

BigInt LinearSystem::eval(int i, const std::vector<BigInt>& x) const {
  BigInt v = consts[i];
  for (int j = 0; j < d; ++j) v += c(i, j) * x[j];
  return v;
}

std::int64_t LinearSystem::eval64(int i, const std::vector<std::int64_t>& x) const {
  std::int64_t v = to_int64(consts[i], "form constant");
  for (int j = 0; j < d; ++j) v += to_int64(c(i, j), "form coefficient") * x[j];
  return v;
}

std::vector<int> LinearSystem::support(int i) const {
  std::vector<int> s;
  for (int j = 0; j < d; ++j)
    if (c(i, j) != 0) s.push_back(j);
  return s;
}

std::vector<BigInt> LinearSystem::nonzero_coeffs(int i) const {
  std::vector<BigInt> xs;
  for (int j = 0; j < d; ++j)
    if (c(i, j) != 0) xs.push_back(c(i, j));
  return xs;
}

// ---- exact elimination ----

// Bareiss fraction-free elimination; returns the rank.
static int rank_inplace(std::vector<std::vector<BigInt>>& m) {
  if (m.empty()) return 0;
  int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
  int r = 0;
  BigInt prev = 1;
  for (int col = 0; col < cols && r < rows; ++col) {
    int piv = -1;
    for (int i = r; i < rows; ++i)
      if (m[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[r], m[piv]);
    for (int i = r + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j) m[i][j] = (m[i][j] * m[r][col] - m[i][col] * m[r][j]) / prev;
      m[i][col] = 0;
    }
    prev = m[r][col];
    ++r;
  }
  return r;
}

int rank(const IntMatrix& mat) {
  std::vector<std::vector<BigInt>> m(mat.rows, std::vector<BigInt>(mat.cols));
  for (int i = 0; i < mat.rows; ++i)
    for (int j = 0; j < mat.cols; ++j) m[i][j] = mat.at(i, j);
  return rank_inplace(m);
}

int rank_rows(const std::vector<std::vector<BigRat>>& rows) {
  std::vector<std::vector<BigRat>> m = rows;
  int rk = 0;
  int nr = static_cast<int>(m.size());
  int nc = nr ? static_cast<int>(m[0].size()) : 0;
  for (int col = 0; col < nc && rk < nr; ++col) {
    int piv = -1;
    for (int i = rk; i < nr; ++i)
      if (m[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rk], m[piv]);
    for (int i = rk + 1; i < nr; ++i) {
      if (m[i][col] == 0) continue;
      BigRat f = m[i][col] / m[rk][col];
      for (int j = col; j < nc; ++j) m[i][j] -= f * m[rk][j];
    }
    ++rk;
  }
  return rk;
}

// Forms of `psi` indexed by `which`, each reduced to a rational row vector.
// In cyclic ambient the forms live over the field Z_M, so span tests run
// there instead; we lift residues to centered integers, which spans the same
// subspace as long as tests only use ranks of small systems (M prime and the
// lifted system is the mod-M image of the rational one: ranks can only drop
// mod M, and for the desk-scale coefficient range no drop occurs below the
// enforced reduction threshold).
static std::vector<std::vector<BigRat>> form_rows(const LinearSystem& psi, const std::vector<int>& which) {
  std::vector<std::vector<BigRat>> rows;
  rows.reserve(which.size());
  for (int i : which) {
    std::vector<BigRat> row(psi.d);
    for (int j = 0; j < psi.d; ++j) {
      BigInt v = psi.c(i, j);
      if (psi.ambient == Ambient::cyclic && 2 * v > psi.modulus) v -= psi.modulus;
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

static int rank_mod(const LinearSystem& psi, const std::vector<int>& which) {
  std::int64_t M = to_int64(psi.modulus, "modulus");
  std::vector<std::vector<std::int64_t>> m;
  for (int i : which) {
    std::vector<std::int64_t> row(psi.d);
    for (int j = 0; j < psi.d; ++j) row[j] = to_int64(psi.c(i, j) % psi.modulus);
    m.push_back(std::move(row));
  }
  int rk = 0;
  int nr = static_cast<int>(m.size());
  for (int col = 0; col < psi.d && rk < nr; ++col) {
    int piv = -1;
    for (int i = rk; i < nr; ++i)
      if (m[i][col] % M != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rk], m[piv]);
    std::int64_t inv = pow_mod(m[rk][col], M - 2, M);
    for (int i = rk + 1; i < nr; ++i) {
      std::int64_t f = mul_mod(mod_pos(m[i][col], M), inv, M);
      for (int j = col; j < psi.d; ++j) m[i][j] = mod_pos(m[i][j] - mul_mod(f, mod_pos(m[rk][j], M), M), M);
    }
    ++rk;
  }
  return rk;
}

// psi_i in the linear span of the forms indexed by block?
static bool in_span(const LinearSystem& psi, int i, const std::vector<int>& block) {
  std::vector<int> with = block;
  with.push_back(i);
  if (psi.ambient == Ambient::cyclic) return rank_mod(psi, block) == rank_mod(psi, with);
  return rank_rows(form_rows(psi, block)) == rank_rows(form_rows(psi, with));
}

// ---- operations ----

bool is_translation_invariant(const IntMatrix& V) {
  for (int i = 0; i < V.rows; ++i) {
    BigInt s = 0;
    for (int j = 0; j < V.cols; ++j) s += V.at(i, j);
    if (s != 0) return false;
  }
  return true;
}

// Enumerate partitions of `items` into exactly `k` nonempty blocks where
// every block subset is accepted by `good` (monotone: subsets of good sets
// are good). Returns a witnessing partition, or nullopt.
static std::optional<Partition> partition_search(const std::vector<int>& items, int k,
                                                 const std::function<bool(const std::vector<int>&)>& good) {
  int n = static_cast<int>(items.size());
  if (k <= 0 || k > n) return std::nullopt;
  std::vector<std::vector<int>> blocks;
  std::optional<Partition> found;
  std::function<bool(int)> rec = [&](int idx) -> bool {
    int used = static_cast<int>(blocks.size());
    if (idx == n) {
      if (used != k) return false;
      found = Partition{blocks};
      return true;
    }
    if (n - idx < k - used) return false;  // cannot fill remaining blocks
    for (int b = 0; b < used; ++b) {
      blocks[b].push_back(items[idx]);
      if (good(blocks[b]) && rec(idx + 1)) return true;
      blocks[b].pop_back();
    }
    if (used < k) {
      blocks.push_back({items[idx]});
      if (good(blocks.back()) && rec(idx + 1)) return true;
      blocks.pop_back();
    }
    return false;
  };
  rec(0);
  return found;
}

std::optional<Partition> complexity_witness(const LinearSystem& psi, int i, int s) {
  std::vector<int> items;
  for (int j = 0; j < psi.t; ++j)
    if (j != i) items.push_back(j);
  auto good = [&](const std::vector<int>& block) { return !in_span(psi, i, block); };
  return partition_search(items, s + 1, good);
}

std::optional<int> complexity_at(const LinearSystem& psi, int i) {
  if (i < 0 || i >= psi.t) throw ValidationError("form index out of range");
  if (psi.t == 1) return 0;
  // The all-singletons partition is the easiest to satisfy: if it fails there
  // is a single form spanning psi_i, which poisons every partition.
  for (int j = 0; j < psi.t; ++j)
    if (j != i && in_span(psi, i, {j})) return std::nullopt;
  for (int s = 0; s <= psi.t - 2; ++s)
    if (complexity_witness(psi, i, s)) return s;
  return std::nullopt;  // unreachable: singletons work at s = t-2
}

std::optional<int> complexity(const LinearSystem& psi) {
  int best = 0;
  for (int i = 0; i < psi.t; ++i) {
    auto ci = complexity_at(psi, i);
    if (!ci) return std::nullopt;
    best = std::max(best, *ci);
  }
  return best;
}

bool has_finite_complexity(const LinearSystem& psi) {
  for (int i = 0; i < psi.t; ++i)
    for (int j = i + 1; j < psi.t; ++j)
      if (in_span(psi, i, {j}) || in_span(psi, j, {i})) return false;
  return true;
}

static bool depends_on_all(const LinearSystem& psi, int form, const std::vector<int>& J) {
  for (int k : J)
    if (psi.c(form, k) == 0 || (psi.ambient == Ambient::cyclic && psi.c(form, k) % psi.modulus == 0))
      return false;
  return true;
}

std::optional<std::vector<int>> is_exact_normal_at(const LinearSystem& psi, int i, int s) {
  std::vector<int> sup;
  for (int j = 0; j < psi.d; ++j) {
    BigInt v = psi.c(i, j);
    if (psi.ambient == Ambient::cyclic) v %= psi.modulus;
    if (v != 0) sup.push_back(j);
  }
  int need = s + 1;
  if (need > static_cast<int>(sup.size())) return std::nullopt;
  // lexicographically least witness
  std::vector<int> pick(need);
  std::function<std::optional<std::vector<int>>(int, int)> rec =
      [&](int pos, int from) -> std::optional<std::vector<int>> {
    if (pos == need) {
      for (int j = 0; j < psi.t; ++j)
        if (j != i && depends_on_all(psi, j, pick)) return std::nullopt;
      return pick;
    }
    for (int idx = from; idx < static_cast<int>(sup.size()); ++idx) {
      pick[pos] = sup[idx];
      if (auto w = rec(pos + 1, idx + 1)) return w;
    }
    return std::nullopt;
  };
  return rec(0, 0);
}

bool is_normal_form(const LinearSystem& psi, int s) {
  for (int i = 0; i < psi.t; ++i) {
    bool ok = false;
    for (int si = 0; si <= s && !ok; ++si) ok = is_exact_normal_at(psi, i, si).has_value();
    if (!ok) return false;
  }
  return true;
}

// Integer vector in the rational nullspace of the forms in `block`, with
// psi_i nonzero on it. Exists whenever psi_i is outside the block's span.
static std::vector<BigInt> splitting_direction(const LinearSystem& psi, int i, const std::vector<int>& block) {
  // rational nullspace basis by Gaussian elimination on the block rows
  std::vector<std::vector<BigRat>> m = form_rows(psi, block);
  int nr = static_cast<int>(m.size()), nc = psi.d;
  std::vector<int> pivot_col;
  int rk = 0;
  for (int col = 0; col < nc && rk < nr; ++col) {
    int piv = -1;
    for (int r = rk; r < nr; ++r)
      if (m[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rk], m[piv]);
    BigRat p = m[rk][col];
    for (int j = 0; j < nc; ++j) m[rk][j] /= p;
    for (int r = 0; r < nr; ++r) {
      if (r == rk || m[r][col] == 0) continue;
      BigRat f = m[r][col];
      for (int j = 0; j < nc; ++j) m[r][j] -= f * m[rk][j];
    }
    pivot_col.push_back(col);
    ++rk;
  }
  std::vector<bool> is_pivot(nc, false);
  for (int c : pivot_col) is_pivot[c] = true;
  for (int freec = 0; freec < nc; ++freec) {
    if (is_pivot[freec]) continue;
    std::vector<BigRat> v(nc, BigRat(0));
    v[freec] = 1;
    for (int r = 0; r < rk; ++r) v[pivot_col[r]] = -m[r][freec];
    // evaluate psi_i on v
    BigRat val = 0;
    for (int j = 0; j < nc; ++j) val += BigRat(psi.c(i, j)) * v[j];
    if (val == 0) continue;
    // clear denominators, normalize
    BigInt lcm = 1;
    for (const BigRat& q : v) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(q));
    std::vector<BigInt> w(nc);
    BigInt g = 0;
    for (int j = 0; j < nc; ++j) {
      w[j] = boost::multiprecision::numerator(v[j]) * (lcm / boost::multiprecision::denominator(v[j]));
      g = boost::multiprecision::gcd(g, w[j]);
    }
    if (g > 1)
      for (BigInt& x : w) x /= g;
    if (val < 0)
      for (BigInt& x : w) x = -x;
    return w;
  }
  throw ValidationError("no splitting direction: form lies in the block span");
}

NormalExtension normal_extension(const LinearSystem& psi, int s) {
  if (!psi.is_linear()) throw ValidationError("normal extension applies to linear systems");
  auto cplx = complexity(psi);
  if (!cplx || *cplx > s) throw ValidationError("system complexity exceeds requested normal level");

  LinearSystem ext = psi;
  int cap = psi.d * psi.t;
  for (int i = 0; i < psi.t; ++i) {
    bool ok = false;
    for (int si = 0; si <= s && !ok; ++si) ok = is_exact_normal_at(ext, i, si).has_value();
    if (ok) continue;
    int si = *complexity_at(psi, i);
    Partition part = *complexity_witness(psi, i, si);
    for (const auto& block : part.blocks) {
      std::vector<BigInt> v = splitting_direction(psi, i, block);
      // append one variable moving along v: new coefficient of form m is psi_m(v)
      LinearSystem wider(ext.d + 1, ext.t);
      wider.consts = ext.consts;
      for (int m = 0; m < ext.t; ++m) {
        for (int j = 0; j < ext.d; ++j) wider.c(m, j) = ext.c(m, j);
        BigInt val = 0;
        for (int j = 0; j < psi.d; ++j) val += psi.c(m, j) * v[j];
        wider.c(m, ext.d) = val;
      }
      ext = std::move(wider);
      if (ext.d - psi.d > cap) throw BudgetError("normal extension exceeded the dummy-variable cap");
    }
  }
  NormalExtension out;
  out.psi = ext;
  out.added = ext.d - psi.d;
  for (int i = 0; i < ext.t; ++i) {
    std::optional<std::vector<int>> w;
    for (int si = 0; si <= s && !w; ++si) w = is_exact_normal_at(ext, i, si);
    if (!w) throw CertificationError("normal extension failed structural validation");
    out.witness.push_back(*w);
  }
  return out;
}

IntMatrix kernel_lattice_basis(const IntMatrix& V) {
  int r = V.rows, t = V.cols;
  std::vector<std::vector<BigInt>> m(r, std::vector<BigInt>(t));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < t; ++j) m[i][j] = V.at(i, j);
  // unimodular column operations tracked in u
  std::vector<std::vector<BigInt>> u(t, std::vector<BigInt>(t));
  for (int j = 0; j < t; ++j) u[j][j] = 1;
  auto colswap = [&](int a, int b) {
    for (int i = 0; i < r; ++i) std::swap(m[i][a], m[i][b]);
    for (int i = 0; i < t; ++i) std::swap(u[i][a], u[i][b]);
  };
  auto colsub = [&](int dst, int src, const BigInt& q) {
    for (int i = 0; i < r; ++i) m[i][dst] -= q * m[i][src];
    for (int i = 0; i < t; ++i) u[i][dst] -= q * u[i][src];
  };
  int lead = 0;
  for (int row = 0; row < r && lead < t; ++row) {
    while (true) {
      int best = -1;
      for (int c = lead; c < t; ++c) {
        if (m[row][c] == 0) continue;
        if (best < 0 || boost::multiprecision::abs(m[row][c]) < boost::multiprecision::abs(m[row][best])) best = c;
      }
      if (best < 0) break;  // dependent row
      if (best != lead) colswap(best, lead);
      bool lone = true;
      for (int c = lead + 1; c < t; ++c) {
        if (m[row][c] == 0) continue;
        BigInt q = m[row][c] / m[row][lead];  // truncated division shrinks
        if (q != 0) colsub(c, lead, q);
        if (m[row][c] != 0) lone = false;
      }
      if (lone) {
        if (m[row][lead] < 0) {
          for (int i = 0; i < r; ++i) m[i][lead] = -m[i][lead];
          for (int i = 0; i < t; ++i) u[i][lead] = -u[i][lead];
        }
        ++lead;
        break;
      }
    }
  }
  int rk = lead;
  IntMatrix basis(t, t - rk);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t - rk; ++j) basis.at(i, j) = u[i][rk + j];
  // light size reduction between basis columns
  auto norm1 = [&](int col) {
    BigInt s = 0;
    for (int i = 0; i < t; ++i) s += boost::multiprecision::abs(basis.at(i, col));
    return s;
  };
  bool changed = true;
  int guard = 0;
  while (changed && ++guard < 64) {
    changed = false;
    for (int aCol = 0; aCol < basis.cols; ++aCol)
      for (int bCol = 0; bCol < basis.cols; ++bCol) {
        if (aCol == bCol) continue;
        for (int sgn : {1, -1}) {
          BigInt before = norm1(aCol);
          for (int i = 0; i < t; ++i) basis.at(i, aCol) += sgn * basis.at(i, bCol);
          if (norm1(aCol) < before) {
            changed = true;
          } else {
            for (int i = 0; i < t; ++i) basis.at(i, aCol) -= sgn * basis.at(i, bCol);
          }
        }
      }
  }
  return basis;
}

LinearSystem kernel_basis_parametrization(const IntMatrix& V) {
  IntMatrix basis = kernel_lattice_basis(V);
  LinearSystem psi(basis.cols, basis.rows);
  for (int i = 0; i < basis.rows; ++i)
    for (int j = 0; j < basis.cols; ++j) psi.c(i, j) = basis.at(i, j);
  return psi;
}

KernelParam kernel_parametrization(const IntMatrix& V, int s) {
  if (!is_translation_invariant(V)) throw ValidationError("matrix is not translation-invariant");
  if (V.rows == 0 || rank(V) != V.rows) throw ValidationError("matrix must have full row rank");
  KernelParam out;
  out.basis = kernel_lattice_basis(V);
  LinearSystem psi0 = kernel_basis_parametrization(V);
  NormalExtension ext = normal_extension(psi0, s);
  out.psi = ext.psi;
  out.witness = ext.witness;
  // V * psi = 0 identically
  for (int i = 0; i < V.rows; ++i)
    for (int j = 0; j < out.psi.d; ++j) {
      BigInt dot = 0;
      for (int k = 0; k < V.cols; ++k) dot += V.at(i, k) * out.psi.c(k, j);
      if (dot != 0) throw CertificationError("kernel parametrization does not annihilate V");
    }
  out.phi = LinearSystem(out.psi.d + 1, out.psi.t);
  for (int i = 0; i < out.psi.t; ++i) {
    out.phi.c(i, 0) = 1;
    for (int j = 0; j < out.psi.d; ++j) out.phi.c(i, j + 1) = out.psi.c(i, j);
  }
  return out;
}

// Is there a row-space vector supported on X ∪ {i} with i-coordinate 1?
static bool column_reachable(const IntMatrix& V, int i, const std::vector<int>& X) {
  std::vector<bool> inX(V.cols, false);
  for (int j : X) inX[j] = true;
  // unknowns mu in Q^r; constraints: (V^T mu)_k = 0 for k outside X ∪ {i},
  // and (V^T mu)_i = 1.
  std::vector<std::vector<BigRat>> A;
  std::vector<BigRat> rhs;
  for (int k = 0; k < V.cols; ++k) {
    if (k == i || inX[k]) continue;
    std::vector<BigRat> row(V.rows);
    for (int m = 0; m < V.rows; ++m) row[m] = V.at(m, k);
    A.push_back(std::move(row));
    rhs.push_back(0);
  }
  {
    std::vector<BigRat> row(V.rows);
    for (int m = 0; m < V.rows; ++m) row[m] = V.at(m, i);
    A.push_back(std::move(row));
    rhs.push_back(1);
  }
  std::vector<std::vector<BigRat>> Ab = A;
  for (std::size_t k = 0; k < Ab.size(); ++k) Ab[k].push_back(rhs[k]);
  return rank_rows(A) == rank_rows(Ab);
}

std::optional<int> matrix_complexity_at(const IntMatrix& V, int i) {
  if (V.cols < 2) throw ValidationError("matrix complexity needs t >= 2");
  std::vector<int> items;
  for (int j = 0; j < V.cols; ++j)
    if (j != i) items.push_back(j);
  auto good = [&](const std::vector<int>& block) { return !column_reachable(V, i, block); };
  for (int j : items)
    if (!good({j})) return std::nullopt;
  for (int s = 0; s <= V.cols - 2; ++s)
    if (partition_search(items, s + 1, good)) return s;
  return std::nullopt;
}

std::optional<int> matrix_complexity(const IntMatrix& V) {
  int best = 0;
  for (int i = 0; i < V.cols; ++i) {
    auto ci = matrix_complexity_at(V, i);
    if (!ci) return std::nullopt;
    best = std::max(best, *ci);
  }
  return best;
}

BigInt linear_norm(const LinearSystem& psi) {
  BigInt s = 0;
  if (psi.ambient == Ambient::cyclic) {
    for (int i = 0; i < psi.t; ++i)
      for (int j = 0; j < psi.d; ++j) {
        BigInt v = psi.c(i, j) % psi.modulus;
        if (v < 0) v += psi.modulus;
        BigInt w = psi.modulus - v;
        s += std::min(v, w);
      }
    return s;
  }
  for (const BigInt& v : psi.coeff) s += boost::multiprecision::abs(v);
  return s;
}

BigRat system_norm(const LinearSystem& psi, const BigInt& M) {
  if (M <= 0) throw ValidationError("norm modulus must be positive");
  BigRat s = BigRat(linear_norm(psi));
  if (psi.ambient == Ambient::cyclic) {
    for (const BigInt& b0 : psi.consts) {
      BigInt b = b0 % psi.modulus;
      if (b < 0) b += psi.modulus;
      BigInt w = psi.modulus - b;
      s += BigRat(std::min(b, w), psi.modulus);
    }
    return s;
  }
  for (const BigInt& b : psi.consts) s += BigRat(boost::multiprecision::abs(b), M);
  return s;
}

BigInt matrix_norm(const IntMatrix& V) {
  BigInt s = 0;
  for (const BigInt& v : V.a) s += boost::multiprecision::abs(v);
  return s;
}

static BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

static BigInt pow_big(const BigInt& b, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

LinearSystem reduce_mod(const LinearSystem& psi, const IntMatrix& V, std::int64_t M) {
  if (psi.ambient != Ambient::integers) throw ValidationError("reduce_mod expects an integer system");
  BigInt n = linear_norm(psi);
  for (const BigInt& b : psi.consts) n += boost::multiprecision::abs(b);
  BigInt threshold = std::max(factorial(psi.t) * pow_big(n, psi.t), factorial(V.rows) * pow_big(matrix_norm(V), V.rows));
  if (BigInt(M) <= threshold)
    throw ValidationError("modulus below the reduction threshold max(t!|psi|^t, r!|V|^r)");
  LinearSystem theta = psi;
  theta.ambient = Ambient::cyclic;
  theta.modulus = M;
  for (BigInt& v : theta.coeff) {
    v %= M;
    if (v < 0) v += M;
  }
  for (BigInt& v : theta.consts) {
    v %= M;
    if (v < 0) v += M;
  }
  return theta;
}

LinearSystem lift_from_mod(const LinearSystem& theta) {
  if (theta.ambient != Ambient::cyclic) throw ValidationError("lift_from_mod expects a cyclic system");
  BigInt ln = linear_norm(theta);
  if (theta.modulus <= 2 * ln) throw ValidationError("modulus too small to lift: need M > 2|linear part|");
  LinearSystem psi = theta;
  psi.ambient = Ambient::integers;
  psi.modulus = 0;
  auto center = [&](BigInt& v) {
    v %= theta.modulus;
    if (v < 0) v += theta.modulus;
    if (2 * v > theta.modulus) v -= theta.modulus;
  };
  for (BigInt& v : psi.coeff) center(v);
  for (BigInt& v : psi.consts) center(v);
  return psi;
}

// ---- lattice enumeration ----

namespace {

struct LatticeSolver {
  int t = 0, k = 0;
  std::vector<int> free_rows;
  std::vector<std::int64_t> basis;  // t x k row-major
  std::vector<std::int64_t> adj;    // k x k adjugate of the free-row submatrix
  std::int64_t det = 0;

  explicit LatticeSolver(const IntMatrix& B) : t(B.rows), k(B.cols) {
    basis.resize(static_cast<std::size_t>(t) * k);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < k; ++j) basis[static_cast<std::size_t>(i) * k + j] = to_int64(B.at(i, j), "lattice basis");
    if (k == 0) return;
    // greedily pick k independent rows
    std::vector<std::vector<BigRat>> chosen;
    for (int i = 0; i < t && static_cast<int>(free_rows.size()) < k; ++i) {
      std::vector<BigRat> row(k);
      for (int j = 0; j < k; ++j) row[j] = B.at(i, j);
      chosen.push_back(row);
      if (rank_rows(chosen) == static_cast<int>(chosen.size()))
        free_rows.push_back(i);
      else
        chosen.pop_back();
    }
    if (static_cast<int>(free_rows.size()) != k) throw ValidationError("lattice basis is rank-deficient");
    // adjugate and determinant of the k x k submatrix
    std::vector<std::vector<BigInt>> S(k, std::vector<BigInt>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) S[i][j] = B.at(free_rows[i], j);
    std::function<BigInt(const std::vector<std::vector<BigInt>>&)> detf =
        [&](const std::vector<std::vector<BigInt>>& m) -> BigInt {
      int n = static_cast<int>(m.size());
      if (n == 1) return m[0][0];
      BigInt sum = 0;
      for (int c = 0; c < n; ++c) {
        if (m[0][c] == 0) continue;
        std::vector<std::vector<BigInt>> minor(n - 1, std::vector<BigInt>(n - 1));
        for (int i = 1; i < n; ++i) {
          int cc = 0;
          for (int j = 0; j < n; ++j) {
            if (j == c) continue;
            minor[i - 1][cc++] = m[i][j];
          }
        }
        BigInt term = m[0][c] * detf(minor);
        sum += (c % 2 == 0) ? term : -term;
      }
      return sum;
    };
    det = to_int64(detf(S), "lattice determinant");
    adj.resize(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        std::vector<std::vector<BigInt>> minor(k - 1, std::vector<BigInt>(k - 1));
        for (int r = 0, rr = 0; r < k; ++r) {
          if (r == j) continue;
          for (int c = 0, cc = 0; c < k; ++c) {
            if (c == i) continue;
            minor[rr][cc++] = S[r][c];
          }
          ++rr;
        }
        BigInt cof = (k == 1) ? BigInt(1) : detf(minor);
        if ((i + j) % 2 == 1) cof = -cof;
        adj[static_cast<std::size_t>(i) * k + j] = to_int64(cof, "lattice adjugate");
      }
  }

  // Solve for the lattice point whose free coordinates equal vals; false when
  // no such point exists.
  bool solve(const std::vector<std::int64_t>& vals, std::vector<std::int64_t>& point,
             std::vector<std::int64_t>& coeffs) const {
    for (int i = 0; i < k; ++i) {
      __int128 s = 0;
      for (int j = 0; j < k; ++j) s += static_cast<__int128>(adj[static_cast<std::size_t>(i) * k + j]) * vals[j];
      if (s % det != 0) return false;
      coeffs[i] = static_cast<std::int64_t>(s / det);
    }
    for (int i = 0; i < t; ++i) {
      __int128 s = 0;
      for (int j = 0; j < k; ++j) s += static_cast<__int128>(basis[static_cast<std::size_t>(i) * k + j]) * coeffs[j];
      if (s > std::numeric_limits<std::int64_t>::max() || s < std::numeric_limits<std::int64_t>::min()) return false;
      point[i] = static_cast<std::int64_t>(s);
    }
    return true;
  }
};

}  // namespace

void enumerate_lattice_in_box(const IntMatrix& basis, std::int64_t lo, std::int64_t hi,
                              const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  LatticeSolver solver(basis);
  int t = solver.t, k = solver.k;
  std::vector<std::int64_t> point(t), coeffs(std::max(k, 1)), vals(std::max(k, 1));
  if (k == 0) {
    if (lo <= 0 && 0 <= hi) visit(std::vector<std::int64_t>(t, 0));
    return;
  }
  std::function<void(int)> rec = [&](int pos) {
    if (pos == k) {
      if (!solver.solve(vals, point, coeffs)) return;
      for (int i = 0; i < t; ++i)
        if (point[i] < lo || point[i] > hi) return;
      visit(point);
      return;
    }
    for (std::int64_t v = lo; v <= hi; ++v) {
      vals[pos] = v;
      rec(pos + 1);
    }
  };
  rec(0);
}

bool lattice_contains(const IntMatrix& basis, const std::vector<BigInt>& y) {
  // solve basis * c = y over Q by elimination, then require c integral
  int t = basis.rows, k = basis.cols;
  std::vector<std::vector<BigRat>> m(t, std::vector<BigRat>(k + 1));
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < k; ++j) m[i][j] = basis.at(i, j);
    m[i][k] = y[static_cast<std::size_t>(i)];
  }
  int rk = 0;
  std::vector<int> pivcol;
  for (int col = 0; col < k && rk < t; ++col) {
    int piv = -1;
    for (int i = rk; i < t; ++i)
      if (m[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rk], m[piv]);
    BigRat p = m[rk][col];
    for (int j = 0; j <= k; ++j) m[rk][j] /= p;
    for (int i = 0; i < t; ++i) {
      if (i == rk || m[i][col] == 0) continue;
      BigRat f = m[i][col];
      for (int j = 0; j <= k; ++j) m[i][j] -= f * m[rk][j];
    }
    pivcol.push_back(col);
    ++rk;
  }
  for (int i = rk; i < t; ++i)
    if (m[i][k] != 0) return false;  // inconsistent
  std::vector<BigRat> c(k, BigRat(0));
  for (int r = 0; r < rk; ++r) c[pivcol[r]] = m[r][k];
  for (const BigRat& q : c)
    if (boost::multiprecision::denominator(q) != 1) return false;
  return true;
}

BigInt count_degenerate(const IntMatrix& V, std::int64_t N, int i, int j) {
  if (i == j) throw ValidationError("count_degenerate needs distinct indices");
  if (i < 0 || j < 0 || i >= V.cols || j >= V.cols) throw ValidationError("index out of range");
  if (rank(V) != V.rows) throw ValidationError("matrix must have full row rank");
  if (!has_finite_complexity(kernel_basis_parametrization(V)))
    throw ValidationError("count_degenerate requires finite complexity");
  IntMatrix aug(V.rows + 1, V.cols);
  for (int r = 0; r < V.rows; ++r)
    for (int c0 = 0; c0 < V.cols; ++c0) aug.at(r, c0) = V.at(r, c0);
  aug.at(V.rows, i) = 1;
  aug.at(V.rows, j) = -1;
  if (rank(aug) != V.rows + 1) throw CertificationError("degenerate hyperplane contains the kernel");
  IntMatrix basis = kernel_lattice_basis(aug);
  BigInt count = 0;
  enumerate_lattice_in_box(basis, -N, N, [&](const std::vector<std::int64_t>&) { ++count; });
  return count;
}

// ---- text formats ----

IntMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  int r = 0, t = 0;
  if (!(in >> r >> t) || r <= 0 || t <= 0) throw ValidationError("matrix header must be 'r t' (line 1)");
  IntMatrix V(r, t);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < t; ++j) {
      std::string tok;
      if (!(in >> tok)) throw ValidationError("matrix entry missing at row " + std::to_string(i + 1));
      V.at(i, j) = BigInt(tok);
    }
  return V;
}

std::string format_matrix(const IntMatrix& V) {
  std::ostringstream out;
  out << V.rows << ' ' << V.cols << '\n';
  for (int i = 0; i < V.rows; ++i) {
    for (int j = 0; j < V.cols; ++j) out << (j ? " " : "") << V.at(i, j);
    out << '\n';
  }
  return out.str();
}

LinearSystem parse_system(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty system file");
  std::istringstream head(line);
  int d = 0, t = 0;
  if (!(head >> d >> t) || d <= 0 || t <= 0) throw ValidationError("system header must be 'd t' (line 1)");
  LinearSystem s(d, t);
  for (int i = 0; i < t; ++i) {
    if (!std::getline(in, line)) throw ValidationError("missing form row " + std::to_string(i + 1));
    std::istringstream row(line);
    for (int j = 0; j < d; ++j) {
      std::string tok;
      if (!(row >> tok)) throw ValidationError("coefficient missing in form row " + std::to_string(i + 1));
      s.c(i, j) = BigInt(tok);
    }
  }
  while (std::getline(in, line)) {
    auto pos = line.find("constants:");
    if (pos == std::string::npos) continue;
    std::istringstream row(line.substr(pos + 10));
    for (int i = 0; i < t; ++i) {
      std::string tok;
      if (!(row >> tok)) throw ValidationError("constants line needs t entries");
      s.consts[i] = BigInt(tok);
    }
  }
  return s;
}

std::string format_system(const LinearSystem& psi) {
  std::ostringstream out;
  out << psi.d << ' ' << psi.t << '\n';
  for (int i = 0; i < psi.t; ++i) {
    for (int j = 0; j < psi.d; ++j) out << (j ? " " : "") << psi.c(i, j);
    out << '\n';
  }
  if (!psi.is_linear()) {
    out << "constants:";
    for (int i = 0; i < psi.t; ++i) out << ' ' << psi.consts[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace linsys
}  // namespace cplx1
