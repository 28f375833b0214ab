#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cplx1/rational.hpp"

namespace cplx1 {
namespace linsys {

// Ambient ring for a system of forms: the integers, or Z_M with M prime.
enum class Ambient { integers, cyclic };

struct IntMatrix {
  int rows = 0, cols = 0;
  std::vector<BigInt> a;  // row-major

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
  IntMatrix(int r, int c, std::vector<std::int64_t> entries);

  BigInt& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const BigInt& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

// Affine system of t forms in d variables: row i holds the coefficients of
// form i, consts[i] the affine part. Over cyclic ambient, entries are
// residues in [0, M).
struct LinearSystem {
  int d = 0, t = 0;
  std::vector<BigInt> coeff;   // t x d row-major
  std::vector<BigInt> consts;  // length t
  Ambient ambient = Ambient::integers;
  BigInt modulus = 0;

  LinearSystem() = default;
  LinearSystem(int d_, int t_) : d(d_), t(t_), coeff(static_cast<std::size_t>(t_) * d_), consts(t_) {}
  static LinearSystem from_rows(std::vector<std::vector<std::int64_t>> rows,
                                std::vector<std::int64_t> consts = {});

  BigInt& c(int i, int j) { return coeff[static_cast<std::size_t>(i) * d + j]; }
  const BigInt& c(int i, int j) const { return coeff[static_cast<std::size_t>(i) * d + j]; }

  bool is_linear() const;  // all constants zero
  // form i evaluated at an integer point
  BigInt eval(int i, const std::vector<BigInt>& x) const;
  std::int64_t eval64(int i, const std::vector<std::int64_t>& x) const;
  // indices j with nonzero coefficient in form i
  std::vector<int> support(int i) const;
  // nonzero coefficient multiset of form i (the set Xi_i)
  std::vector<BigInt> nonzero_coeffs(int i) const;
};

struct Partition {
  std::vector<std::vector<int>> blocks;
};

// ---- exact rank / span tests (fraction-free elimination) ----

int rank(const IntMatrix& m);
int rank_rows(const std::vector<std::vector<BigRat>>& rows);

// ---- operations ----

bool is_translation_invariant(const IntMatrix& V);

// Minimal s >= 0 such that some partition of [t]\{i} into s+1 nonempty blocks
// keeps form i out of the rational span of every block; nullopt = infinite.
// For t = 1 the complexity is 0 by convention.
std::optional<int> complexity_at(const LinearSystem& psi, int i);
std::optional<int> complexity(const LinearSystem& psi);
// A witnessing partition at level s, if one exists.
std::optional<Partition> complexity_witness(const LinearSystem& psi, int i, int s);

bool has_finite_complexity(const LinearSystem& psi);

// Witness J_i (|J_i| = s+1, lexicographically least) for exact s-normality at
// i, or nullopt.
std::optional<std::vector<int>> is_exact_normal_at(const LinearSystem& psi, int i, int s);
// True when psi is in exact s_i-normal form with s_i <= s at every position.
bool is_normal_form(const LinearSystem& psi, int s);

struct NormalExtension {
  LinearSystem psi;                        // extended system Z^{d+e} -> Z^t
  std::vector<std::vector<int>> witness;   // exact-normal witness per form
  int added = 0;                           // e
};

// Extension psi'(x, y) = psi(x + phi(y)) in s-normal form at every position,
// with the same image as psi. Rejects systems of complexity > s; gives up
// beyond e = d*t added variables.
NormalExtension normal_extension(const LinearSystem& psi, int s);

struct KernelParam {
  LinearSystem psi;                       // Z^d ->> Z^t cap Ker(V), s-normal
  LinearSystem phi;                       // Z^{d+1}, phi_i(x0, x) = x0 + psi_i(x)
  std::vector<std::vector<int>> witness;  // normal-form witness per form (into psi vars)
  IntMatrix basis;                        // t x (t-r) lattice basis of Z^t cap Ker(V)
};

// Plain lattice parametrization (no normal form): columns of `basis` span
// Z^t cap Ker(V) and the forms read the basis coordinates.
IntMatrix kernel_lattice_basis(const IntMatrix& V);
LinearSystem kernel_basis_parametrization(const IntMatrix& V);

KernelParam kernel_parametrization(const IntMatrix& V, int s);

std::optional<int> matrix_complexity_at(const IntMatrix& V, int i);
std::optional<int> matrix_complexity(const IntMatrix& V);

// Sum of |coefficients| of the linear part (the norm written without
// subscript when all constants vanish).
BigInt linear_norm(const LinearSystem& psi);
// Full affine norm: linear part plus sum |b_i| / M.
BigRat system_norm(const LinearSystem& psi, const BigInt& M);
BigInt matrix_norm(const IntMatrix& V);

// Reduction mod M (requires M > max(t! |psi|^t, r! |V|^r)) and lifting via
// centered representatives (requires M > 2 |linear part|).
LinearSystem reduce_mod(const LinearSystem& psi, const IntMatrix& V, std::int64_t M);
LinearSystem lift_from_mod(const LinearSystem& theta);

// Exact #{y in [-N,N]^t : Vy = 0, y_i = y_j}.
BigInt count_degenerate(const IntMatrix& V, std::int64_t N, int i, int j);

// ---- lattice utilities ----

// Enumerate all points of the lattice spanned by the columns of `basis`
// (t x k) whose coordinates all lie in [lo, hi]; calls visit(y).
void enumerate_lattice_in_box(const IntMatrix& basis, std::int64_t lo, std::int64_t hi,
                              const std::function<void(const std::vector<std::int64_t>&)>& visit);

// Membership of y in the column lattice of basis.
bool lattice_contains(const IntMatrix& basis, const std::vector<BigInt>& y);

// ---- text formats ----

// First line "r t", then r rows of t space-separated integers.
IntMatrix parse_matrix(const std::string& text);
std::string format_matrix(const IntMatrix& V);
// First line "d t", then t rows of d coefficients, optional "constants:" line.
LinearSystem parse_system(const std::string& text);
std::string format_system(const LinearSystem& psi);

}  // namespace linsys
}  // namespace cplx1
