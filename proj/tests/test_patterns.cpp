#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "cplx1/numeric.hpp"
#include "cplx1/patterns.hpp"

using namespace cplx1;
using namespace cplx1::patterns;
using cyclic::CyclicFn;
using linsys::IntMatrix;
using linsys::LinearSystem;

namespace {

IntMatrix threeap() { return IntMatrix(1, 3, {1, -2, 1}); }

LinearSystem threeap_theta(std::int64_t M) {
  auto theta = LinearSystem::from_rows({{1, 0}, {1, 1}, {1, 2}});
  theta.ambient = linsys::Ambient::cyclic;
  theta.modulus = M;
  return theta;
}

// oracle: direct loops over the full parameter box
double brute_T(const LinearSystem& theta, const std::vector<CyclicFn>& fs) {
  std::int64_t M = to_int64(theta.modulus);
  KahanSum acc;
  std::vector<std::int64_t> n(theta.d, 0);
  std::int64_t count = 0;
  while (true) {
    double prod = 1.0;
    for (int i = 0; i < theta.t; ++i) prod *= fs[i].at(theta.eval64(i, n));
    acc.add(prod);
    ++count;
    int pos = 0;
    while (pos < theta.d && ++n[pos] == M) n[pos++] = 0;
    if (pos == theta.d) break;
  }
  return acc.value() / static_cast<double>(count);
}

std::int64_t brute_count(const IntMatrix& V, const std::vector<std::int64_t>& A, bool distinct) {
  std::int64_t cnt = 0;
  std::vector<std::size_t> idx(V.cols, 0);
  while (true) {
    std::vector<std::int64_t> y(V.cols);
    for (int i = 0; i < V.cols; ++i) y[i] = A[idx[i]];
    bool ok = true;
    for (int r = 0; r < V.rows && ok; ++r) {
      BigInt s = 0;
      for (int c = 0; c < V.cols; ++c) s += V.at(r, c) * y[c];
      ok = (s == 0);
    }
    if (ok && distinct)
      for (int i = 0; i < V.cols && ok; ++i)
        for (int j = i + 1; j < V.cols && ok; ++j) ok = y[i] != y[j];
    if (ok) ++cnt;
    int pos = 0;
    while (pos < V.cols && ++idx[pos] == A.size()) idx[pos++] = 0;
    if (pos == V.cols) break;
  }
  return cnt;
}

}  // namespace

TEST_CASE("pattern averages agree across methods") {
  std::int64_t M = 53;
  auto theta = threeap_theta(M);
  auto V = threeap();
  Rng rng(31);

  // constants
  std::vector<CyclicFn> ones(3, CyclicFn(M, 1.0));
  for (auto method : {TMethod::brute, TMethod::kernel, TMethod::fourier})
    CHECK(t_operator(theta, V, ones, method).value == doctest::Approx(1.0).epsilon(1e-10));

  // indicator of the complement of one point
  std::vector<CyclicFn> dent(3, CyclicFn(M, 1.0));
  dent[1].at(17) = 0.0;
  double direct = brute_T(theta, dent);
  for (auto method : {TMethod::brute, TMethod::kernel, TMethod::fourier})
    CHECK(t_operator(theta, V, dent, method).value == doctest::Approx(direct).epsilon(1e-9));

  // random data
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CyclicFn> fs;
    for (int i = 0; i < 3; ++i) {
      CyclicFn f(M);
      for (auto& v : f.v) v = rng.uniform01() * 2 - 1;
      fs.push_back(f);
    }
    double expect = brute_T(theta, fs);
    for (auto method : {TMethod::brute, TMethod::kernel, TMethod::fourier})
      CHECK(t_operator(theta, V, fs, method).value == doctest::Approx(expect).epsilon(1e-9));
  }

  // characters whose frequencies avoid the row space average to nothing
  CyclicFn c1(M), c2(M), c3(M);
  for (int x = 0; x < M; ++x) {
    c1.at(x) = std::cos(2 * M_PI * x / M);
    c2.at(x) = std::cos(2 * M_PI * 5.0 * x / M);
    c3.at(x) = std::cos(2 * M_PI * 9.0 * x / M);
  }
  // row space of [1 -2 1] mod 53: multiples of (1, 51, 1); (1, 5, 9) never
  // lands on it, nor do the sign combinations
  double val = t_operator(theta, V, {c1, c2, c3}, TMethod::fourier).value;
  CHECK(std::abs(val) < 1e-10);
}

TEST_CASE("integer-side averages") {
  auto V = threeap();
  std::int64_t N = 10;
  std::int64_t M = 97;  // > 2 |V| N = 80
  // empty set
  std::vector<IntFn> fs;
  for (int i = 0; i < 3; ++i) fs.emplace_back(-2 * N, 2 * N);
  CHECK(t_over_z(V, fs, N, M) == 0.0);
  // indicator of [1, 10]: the box count over the oracle
  for (int i = 0; i < 3; ++i)
    for (std::int64_t x = 1; x <= 10; ++x) fs[i].ref(x) = 1.0;
  std::vector<std::int64_t> box;
  for (std::int64_t x = 1; x <= 10; ++x) box.push_back(x);
  double expect = static_cast<double>(brute_count(V, box, false)) / (M * M);
  CHECK(t_over_z(V, fs, N, M) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(t_over_z(V, fs, N, 79), ValidationError);

  // wraparound agreement with the cyclic-side operator
  auto theta = threeap_theta(1009);
  std::vector<CyclicFn> wrapped;
  for (auto& f : fs) wrapped.push_back(f.wrap(1009));
  double cyc = t_operator(theta, V, wrapped, TMethod::kernel).value;
  double zz = t_over_z(V, fs, N, 1009);
  // both count integer solutions; normalizations differ by M^{t-r} vs M^d
  CHECK(cyc == doctest::Approx(zz).epsilon(1e-9));
}

TEST_CASE("solution counts") {
  auto V = threeap();
  CHECK(count_solutions(V, {0}) == 1);
  CHECK(count_distinct_solutions(V, {0}) == 0);

  std::vector<std::int64_t> A9;
  for (std::int64_t a = 1; a <= 9; ++a) A9.push_back(a);
  CHECK(count_solutions(V, A9) == brute_count(V, A9, false));
  CHECK(count_distinct_solutions(V, A9) == brute_count(V, A9, true));
  CHECK(count_solutions(V, A9) == 41);
  CHECK(count_distinct_solutions(V, A9) == 32);

  // powers of two carry no nontrivial progressions
  std::vector<std::int64_t> pows{1, 2, 4, 8, 16, 32, 64};
  CHECK(count_distinct_solutions(V, pows) == 0);
  CHECK(count_distinct_solutions(V, pows) == brute_count(V, pows, true));

  // progression growth ~ length^2 / 2 (diagonal plus two orientations)
  for (std::int64_t n : {11, 21, 41}) {
    std::vector<std::int64_t> ap;
    for (std::int64_t a = 0; a < n; ++a) ap.push_back(3 * a + 2);
    std::int64_t cnt = count_solutions(V, ap);
    CHECK(cnt == brute_count(V, ap, false));
    CHECK(std::abs(static_cast<double>(cnt) - n * n / 2.0) <= n + 2);
  }

  // scaling over boxes: count in [-N, N] grows like N^{t-r}
  auto box_count = [&](const IntMatrix& W, std::int64_t N) {
    std::vector<std::int64_t> B;
    for (std::int64_t a = -N; a <= N; ++a) B.push_back(a);
    return count_solutions(W, B);
  };
  for (const auto& W : {threeap(), IntMatrix(1, 4, {1, -1, -1, 1})}) {
    int k = W.cols - W.rows;
    double r1 = static_cast<double>(box_count(W, 10)) / static_cast<double>(box_count(W, 5));
    CHECK(r1 >= std::pow(2.0, k) / 2.0);
    CHECK(r1 <= 2.0 * std::pow(2.0, k));
  }

  // distinct <= total, and the gap is at most the degenerate counts
  std::vector<std::int64_t> box7;
  for (std::int64_t a = -7; a <= 7; ++a) box7.push_back(a);
  std::int64_t total = count_solutions(V, box7);
  std::int64_t distinct = count_distinct_solutions(V, box7);
  CHECK(distinct <= total);
  BigInt degsum = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) degsum += linsys::count_degenerate(V, 7, i, j);
  CHECK(BigInt(total - distinct) <= degsum);
}

TEST_CASE("bohr-chain averages") {
  std::int64_t M = 1009;
  auto B0 = cyclic::find_regular_dilate(cyclic::bohr(M, {1}, 0.2));
  auto chain = make_chain(B0, 2, 0.3);
  REQUIRE(chain.sets.size() == 3);
  for (const auto& B : chain.sets) CHECK(cyclic::is_regular(B));
  for (std::size_t i = 1; i < chain.sets.size(); ++i) {
    CHECK(chain.rho[i] <= 0.3 + 1e-12);
    CHECK(chain.rho[i] >= 0.15 - 1e-12);
    // nesting
    for (std::int64_t x : chain.sets[i].elems) CHECK(chain.sets[i - 1].contains(x));
  }

  auto psi = LinearSystem::from_rows({{1, 0}, {0, 1}, {-1, 2}});
  CyclicFn one(M, 1.0);
  std::vector<const CyclicFn*> fs{&one, &one, &one};
  auto res = t_bohr(psi, chain, fs);
  CHECK(res.exact);
  CHECK(res.value == doctest::Approx(1.0));

  // a vanishing slot kills the average
  CyclicFn zero(M);
  std::vector<const CyclicFn*> fz{&one, &zero, &one};
  CHECK(t_bohr(psi, chain, fz).value == 0.0);

  // main-term shape: indicators of the host set stay within the regularity
  // window of 1 and well above one half
  CyclicFn indB(M);
  for (std::int64_t x : B0.elems) indB.at(x) = 1.0;
  std::vector<const CyclicFn*> fb{&indB, &indB, &indB};
  double main = t_bohr(psi, chain, fb).value;
  CHECK(main >= 0.5);
  CHECK(main <= 1.0 + 1e-12);

  // sampled mode reproduces the exact value within its confidence width
  auto sampled = t_bohr(psi, chain, fb, /*budget=*/10, /*seed=*/3, /*samples=*/4000);
  CHECK_FALSE(sampled.exact);
  CHECK(std::abs(sampled.value - main) <= 3.0 * std::max(sampled.ci95, 1e-3));

  // exact config counting matches the average
  std::int64_t cfgs = count_bohr_configs(psi, chain, B0.elems, M);
  double tuples = static_cast<double>(B0.size());
  for (int j = 1; j <= 2; ++j) tuples *= static_cast<double>(chain.sets[j].size());
  CHECK(static_cast<double>(cfgs) == doctest::Approx(main * tuples).epsilon(1e-9));
}

TEST_CASE("set files") {
  auto A = parse_set("1\n-5\n42\n");
  CHECK(A == std::vector<std::int64_t>{1, -5, 42});
  CHECK(parse_set(format_set(A)) == A);
  CHECK_THROWS_AS(parse_set("1\nfoo\n"), ValidationError);
}
