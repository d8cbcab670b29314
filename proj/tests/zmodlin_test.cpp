#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "msolv/zmodlin.hpp"

using namespace msolv;
using namespace msolv::zmodlin;

namespace {

using Vec = std::vector<residue_t>;

// All Z/n-combinations of the rows of m.
std::set<Vec> brute_span(const ModMatrix& m) {
  const residue_t n = m.modulus();
  std::set<Vec> out;
  std::vector<residue_t> c(m.rows(), 0);
  for (;;) {
    Vec v(m.cols(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) v[j] = (v[j] + c[i] * m(i, j)) % n;
    out.insert(v);
    std::size_t k = 0;
    while (k < c.size() && ++c[k] == n) c[k++] = 0;
    if (k == c.size()) break;
  }
  return out;
}

std::set<Vec> brute_kernel(const ModMatrix& m) {
  const residue_t n = m.modulus();
  std::set<Vec> out;
  Vec v(m.rows(), 0);
  for (;;) {
    const Vec img = row_times(v, m);
    if (std::all_of(img.begin(), img.end(), [](residue_t x) { return x == 0; })) out.insert(v);
    std::size_t k = 0;
    while (k < v.size() && ++v[k] == n) v[k++] = 0;
    if (k == v.size()) break;
  }
  return out;
}

ModMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, residue_t n) {
  ModMatrix m(r, c, n);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = static_cast<residue_t>(rng() % static_cast<std::uint64_t>(n));
  return m;
}

}  // namespace

TEST(ResidueRing, RejectsBadModulus) {
  EXPECT_THROW(ResidueRing(1), PreconditionViolated);
  ResidueRing r(9);
  EXPECT_EQ(r.reduce(-1), 8);
  EXPECT_TRUE(r.is_unit(4));
  EXPECT_FALSE(r.is_unit(6));
}

TEST(Howell, SingleEntryAlreadyCanonical) {
  auto h = howell_form(ModMatrix::from_rows({{2}}, 1, 4));
  EXPECT_EQ(h.matrix, ModMatrix::from_rows({{2}}, 1, 4));
}

TEST(Howell, PivotNormalizedToDivisor) {
  // 6 generates the same ideal as 3 in Z/9.
  auto h = howell_form(ModMatrix::from_rows({{6}}, 1, 9));
  EXPECT_EQ(h.matrix(0, 0), 3);
}

TEST(Howell, AnnihilatorRowAppears) {
  // Span of (2,1) over Z/4 contains (0,2); the Howell form must expose it.
  auto h = howell_form(ModMatrix::from_rows({{2, 1}}, 2, 4));
  ASSERT_EQ(h.matrix.rows(), 2u);
  EXPECT_EQ(h.matrix.row_vector(1), (Vec{0, 2}));
}

TEST(Howell, IdempotentOnSmallMatrix) {
  auto m = ModMatrix::from_rows({{1, 1}, {0, 2}}, 2, 4);
  auto h = howell_form(m).matrix;
  EXPECT_EQ(howell_form(h).matrix, h);
  EXPECT_TRUE(same_row_span(m, h));
}

TEST(Howell, TransformReproducesForm) {
  std::mt19937_64 rng(7);
  for (residue_t n : {4, 6, 9, 12, 16}) {
    for (int t = 0; t < 40; ++t) {
      auto m = random_matrix(rng, 1 + rng() % 4, 1 + rng() % 4, n);
      auto hf = howell_form(m);
      EXPECT_EQ(hf.transform * m, hf.matrix);
      EXPECT_EQ(howell_form(hf.matrix).matrix, hf.matrix);
    }
  }
}

// Every matrix over Z/4 and Z/9 with at most 2 rows and 2 columns: span of
// the form equals the enumerated span, and equal spans give equal forms.
TEST(Howell, ExhaustiveSpanAndCanonicity) {
  for (residue_t n : {4, 9}) {
    for (std::size_t r = 1; r <= 2; ++r)
      for (std::size_t c = 1; c <= 2; ++c) {
        std::map<std::set<Vec>, ModMatrix> seen;
        std::size_t count = 1;
        for (std::size_t k = 0; k < r * c; ++k) count *= static_cast<std::size_t>(n);
        for (std::size_t code = 0; code < count; ++code) {
          ModMatrix m(r, c, n);
          std::size_t x = code;
          for (std::size_t k = 0; k < r * c; ++k) {
            m(k / c, k % c) = static_cast<residue_t>(x % static_cast<std::size_t>(n));
            x /= static_cast<std::size_t>(n);
          }
          auto hf = howell_form(m);
          auto span = brute_span(m);
          ASSERT_EQ(brute_span(hf.matrix), span);
          ASSERT_EQ(span_size(hf), BigInt(span.size()));
          auto [it, inserted] = seen.emplace(span, hf.matrix);
          if (!inserted) ASSERT_EQ(it->second, hf.matrix) << "non-canonical form mod " << n;
        }
      }
  }
}

TEST(Howell, Random3x3OverZ9MatchesEnumeratedSpan) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    auto m = random_matrix(rng, 3, 3, 9);
    auto hf = howell_form(m);
    EXPECT_EQ(brute_span(hf.matrix), brute_span(m));
  }
}

TEST(Kernel, MultiplicationByThreeOnZ9) {
  auto k = kernel_basis(ModMatrix::from_rows({{3}}, 1, 9));
  EXPECT_EQ(brute_span(k), (std::set<Vec>{{0}, {3}, {6}}));
}

TEST(Kernel, IdentityHasTrivialKernel) {
  auto k = kernel_basis(ModMatrix::identity(3, 4));
  EXPECT_TRUE(k.rows() == 0 || k.is_zero());
}

TEST(Kernel, TwoTwoOverZ4) {
  // 1x2 matrix: kernel of v -> (2v, 2v) on Z/4 is {0, 2}.
  auto m = ModMatrix::from_rows({{2, 2}}, 2, 4);
  EXPECT_EQ(brute_span(kernel_basis(m)), brute_kernel(m));
}

TEST(Kernel, MatchesExhaustiveScan) {
  std::mt19937_64 rng(3);
  for (residue_t n : {2, 3, 4, 8, 9})
    for (std::size_t r = 1; r <= 3; ++r)
      for (std::size_t c = 1; c <= 3; ++c)
        for (int t = 0; t < 25; ++t) {
          auto m = random_matrix(rng, r, c, n);
          auto k = kernel_basis(m);
          ASSERT_EQ(k.cols(), r);
          for (std::size_t i = 0; i < k.rows(); ++i) {
            auto img = row_times(k.row(i), m);
            ASSERT_TRUE(std::all_of(img.begin(), img.end(), [](residue_t x) { return x == 0; }));
          }
          ASSERT_EQ(brute_span(k), brute_kernel(m));
        }
}

TEST(Solve, TwoXEqualsTwoOverZ4) {
  auto m = ModMatrix::from_rows({{2}}, 1, 4);
  Vec b{2};
  auto s = solve_linear(m, b);
  ASSERT_TRUE(s.feasible);
  std::set<Vec> sols;
  for (const auto& k : brute_span(s.kernel)) sols.insert({(s.solution[0] + k[0]) % 4});
  EXPECT_EQ(sols, (std::set<Vec>{{1}, {3}}));
}

TEST(Solve, TwoXEqualsOneIsInfeasible) {
  Vec b{1};
  EXPECT_FALSE(solve_linear(ModMatrix::from_rows({{2}}, 1, 4), b).feasible);
}

TEST(Solve, IdentitySystem) {
  Vec b{3, 1, 4};
  auto s = solve_linear(ModMatrix::identity(3, 5), b);
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.solution, (Vec{3, 1, 4}));
}

TEST(Solve, DimensionMismatchThrows) {
  Vec b{1, 2};
  EXPECT_THROW(solve_linear(ModMatrix::identity(3, 5), b), DimensionMismatch);
}

TEST(Solve, FeasibilityMatchesExhaustiveSearch) {
  std::mt19937_64 rng(5);
  for (residue_t n : {4, 6, 8, 9}) {
    for (int t = 0; t < 60; ++t) {
      auto m = random_matrix(rng, 1 + rng() % 3, 1 + rng() % 3, n);
      Vec b(m.cols());
      for (auto& x : b) x = static_cast<residue_t>(rng() % static_cast<std::uint64_t>(n));
      auto s = solve_linear(m, b);
      bool brute = brute_span(m).count(b) > 0;
      ASSERT_EQ(s.feasible, brute);
      if (s.feasible) ASSERT_EQ(row_times(s.solution, m), b);
    }
  }
}

TEST(Inverse, UnitsAndNonUnits) {
  auto a = ModMatrix::from_rows({{0, 2}, {1, 0}}, 2, 3);
  auto inv = inverse(a);
  ASSERT_TRUE(inv);
  EXPECT_EQ(*inv * a, ModMatrix::identity(2, 3));
  EXPECT_FALSE(inverse(ModMatrix::from_rows({{2, 0}, {0, 1}}, 2, 4)));
}

TEST(ScalarKernel, DocumentedCases) {
  EXPECT_EQ(scalar_kernel(3, 3, 2), 3);
  EXPECT_EQ(scalar_kernel(5, 3, 2), 9);
  EXPECT_EQ(scalar_kernel(6, 2, 3), 4);
}

TEST(ScalarKernel, SweepAgainstExhaustiveScan) {
  for (residue_t l : {2, 3, 5})
    for (int sigma = 1; sigma <= 4; ++sigma) {
      residue_t q = 1;
      for (int i = 0; i < sigma; ++i) q *= l;
      for (residue_t nt = -30; nt <= 30; ++nt) {
        if (nt == 0) continue;
        std::set<residue_t> ker, gen;
        for (residue_t x = 0; x < q; ++x)
          if (((nt % q + q) % q) * x % q == 0) ker.insert(x);
        const residue_t g = scalar_kernel(nt, l, sigma);
        for (residue_t c = 0; c < q; ++c) gen.insert(c * g % q);
        ASSERT_EQ(ker, gen) << "l=" << l << " sigma=" << sigma << " n=" << nt;
      }
    }
}

TEST(Smith, ZeroRow) {
  auto s = smith_normal_form_int(IntMatrix(1, 4));
  EXPECT_TRUE(s.invariant_factors.empty());
  EXPECT_EQ(s.free_rank(), 4u);
}

TEST(Smith, DiagonalTwoThree) {
  auto s = smith_normal_form_int(IntMatrix::from_rows({{2, 0}, {0, 3}}, 2));
  EXPECT_EQ(s.invariant_factors, (std::vector<BigInt>{1, 6}));
}

TEST(Smith, One) {
  auto s = smith_normal_form_int(IntMatrix::from_rows({{1}}, 1));
  EXPECT_EQ(s.invariant_factors, (std::vector<BigInt>{1}));
  EXPECT_EQ(s.free_rank(), 0u);
  EXPECT_TRUE(s.torsion().empty());
}

TEST(Smith, TooLargeThrows) { EXPECT_THROW(smith_normal_form_int(IntMatrix(65, 2)), TooLarge); }

namespace {

long long det(std::vector<std::vector<long long>> a) {
  // Bareiss fraction-free elimination.
  const std::size_t n = a.size();
  long long sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

// gcd of all k x k minors.
long long determinantal_divisor(const std::vector<std::vector<long long>>& m, std::size_t k) {
  const std::size_t r = m.size(), c = m[0].size();
  long long g = 0;
  std::vector<std::size_t> rs(k), cs(k);
  std::function<void(std::size_t, std::size_t)> pick_rows, pick_cols;
  pick_cols = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      std::vector<std::vector<long long>> sub(k, std::vector<long long>(k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sub[i][j] = m[rs[i]][cs[j]];
      g = std::gcd(g, det(sub));
      return;
    }
    for (std::size_t j = start; j < c; ++j) {
      cs[depth] = j;
      pick_cols(j + 1, depth + 1);
    }
  };
  pick_rows = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      pick_cols(0, 0);
      return;
    }
    for (std::size_t i = start; i < r; ++i) {
      rs[depth] = i;
      pick_rows(i + 1, depth + 1);
    }
  };
  pick_rows(0, 0);
  return g;
}

}  // namespace

TEST(Smith, MatchesDeterminantalDivisors) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    const std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    std::vector<std::vector<long long>> m(r, std::vector<long long>(c));
    for (auto& row : m)
      for (auto& x : row) x = static_cast<long long>(rng() % 13) - 6;
    auto s = smith_normal_form_int(IntMatrix::from_rows(m, c));
    for (std::size_t i = 0; i + 1 < s.rank(); ++i)
      ASSERT_EQ(s.invariant_factors[i + 1] % s.invariant_factors[i], 0);
    BigInt prod = 1;
    for (std::size_t k = 1; k <= std::min(r, c); ++k) {
      const long long dk = determinantal_divisor(m, k);
      if (k <= s.rank()) {
        prod *= s.invariant_factors[k - 1];
        ASSERT_EQ(prod, BigInt(dk)) << "k=" << k;
      } else {
        ASSERT_EQ(dk, 0) << "rank mismatch at k=" << k;
      }
    }
  }
}

TEST(IntegerRowBasis, PreservesLattice) {
  std::vector<std::vector<BigInt>> rows{{2, 4}, {4, 2}, {6, 6}, {0, 0}};
  auto b = integer_row_basis(rows, 2);
  EXPECT_LE(b.size(), 2u);
  auto s1 = smith_normal_form_int([&] {
    IntMatrix m(rows.size(), 2);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < 2; ++j) m(i, j) = rows[i][j];
    return m;
  }());
  IntMatrix mb(b.size(), 2);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) mb(i, j) = b[i][j];
  EXPECT_EQ(smith_normal_form_int(mb).invariant_factors, s1.invariant_factors);
}
