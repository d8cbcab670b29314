#include <gtest/gtest.h>

#include "msolv/builtins.hpp"
#include "msolv/crowell.hpp"
#include "msolv/foxcalc.hpp"

using namespace msolv;
using namespace msolv::foxcalc;
namespace bi = msolv::builtin;

namespace {

QuotientContext klein_ctx(residue_t n) {
  auto g = fingroup::closure(bi::dihedral(2));
  return QuotientContext(g, g.generators(), n);
}

QuotientContext s3_ctx(residue_t n) {
  auto g = fingroup::closure(bi::symmetric(3));
  return QuotientContext(g, g.generators(), n);
}

// d_i(x_j^e v) = d_i(x_j^e) + x_j^e d_i(v), evaluated from the right end.
RingElem fox_oracle(const QuotientContext& ctx, const FreeWord& w, int i) {
  const auto& r = ctx.ring();
  RingElem acc = r.zero();
  for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) {
    const Index x = ctx.image(it->gen);
    if (it->exp > 0) {
      acc = r.embed(x) * acc;
      if (it->gen == i) acc = acc + r.one();
    } else {
      const Index xi = ctx.group().inv(x);
      acc = r.embed(xi) * acc;
      if (it->gen == i) acc = acc - r.embed(xi);
    }
  }
  return acc;
}

}  // namespace

TEST(ReduceWord, Cancels) {
  std::vector<Letter> a{{1, 1}, {1, -1}};
  EXPECT_TRUE(reduce_word(a, 2).empty());
  std::vector<Letter> b{{1, 1}, {2, 1}, {2, -1}, {1, 1}};
  auto w = reduce_word(b, 2);
  EXPECT_EQ(w.letters(), (std::vector<Letter>{{1, 1}, {1, 1}}));
  std::vector<Letter> c{{3, 1}};
  EXPECT_THROW(reduce_word(c, 2), BadGeneratorIndex);
}

TEST(ReduceWord, IdempotentOnRandomWords) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<Letter> raw;
    for (int k = 0; k < 40; ++k) raw.push_back({static_cast<int>(rng.below(3)) + 1, rng.below(2) ? 1 : -1});
    auto w = reduce_word(raw, 3);
    EXPECT_EQ(reduce_word(w.letters(), 3), w);
    for (std::size_t k = 1; k < w.length(); ++k)
      ASSERT_FALSE(w.letters()[k].gen == w.letters()[k - 1].gen && w.letters()[k].exp == -w.letters()[k - 1].exp);
  }
}

TEST(ReduceWord, LengthCap) {
  std::vector<Letter> raw{{1, 10001}};
  EXPECT_THROW(reduce_word(raw, 1), WordTooLong);
}

TEST(ParseWord, Syntax) {
  auto w = parse_word("x1 x2^-1 x1^3", 2);
  EXPECT_EQ(w.length(), 5u);
  EXPECT_EQ(w.to_string(), "x1 x2^-1 x1^3");
  EXPECT_TRUE(parse_word("1", 2).empty());
  EXPECT_TRUE(parse_word("  ", 2).empty());
  EXPECT_TRUE(parse_word("x1 x1^-1", 1).empty());
  EXPECT_EQ(parse_word(w.to_string(), 2), w);
}

TEST(ParseWord, ErrorsCarryColumn) {
  try {
    parse_word("x1 y2", 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 4u);
  }
  try {
    parse_word("x1 x3", 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 5u);
  }
  EXPECT_THROW(parse_word("x1^", 2), ParseError);
}

TEST(FoxDerivative, ForcedValues) {
  auto ctx = s3_ctx(9);
  const auto& r = ctx.ring();
  auto x1x2 = parse_word("x1 x2", 2);
  EXPECT_EQ(fox_derivative(ctx, x1x2, 1), r.one());
  EXPECT_EQ(fox_derivative(ctx, x1x2, 2), r.embed(ctx.image(1)));
  EXPECT_EQ(fox_derivative(ctx, parse_word("x1^-1", 2), 1), -r.embed(ctx.group().inv(ctx.image(1))));
  auto comm = commutator_word(generator_word(1, 2), generator_word(2, 2));
  const Index c = ctx.evaluate(parse_word("x1 x2 x1^-1", 2));
  EXPECT_EQ(fox_derivative(ctx, comm, 1), r.one() - r.embed(c));
  EXPECT_THROW(fox_derivative(ctx, x1x2, 3), IndexOutOfRange);
  EXPECT_THROW(fox_derivative(ctx, x1x2, 0), IndexOutOfRange);
}

TEST(FoxDerivative, MatchesRightRecursion) {
  Rng rng(2);
  for (residue_t n : {2, 9}) {
    auto ctx = s3_ctx(n);
    for (int t = 0; t < 300; ++t) {
      auto w = random_word(2, rng.below(30), rng);
      for (int i = 1; i <= 2; ++i) ASSERT_EQ(fox_derivative(ctx, w, i), fox_oracle(ctx, w, i));
    }
  }
}

TEST(FoxRow, BasisAndEmpty) {
  auto ctx = klein_ctx(4);
  auto row = fox_row(ctx, generator_word(2, 2));
  EXPECT_TRUE(row[0].is_zero());
  EXPECT_EQ(row[1], ctx.ring().one());
  for (const auto& e : fox_row(ctx, FreeWord(2))) EXPECT_TRUE(e.is_zero());
}

TEST(FoxRow, SurfaceRelatorComponentwise) {
  auto g = fingroup::direct_product(fingroup::cyclic_group(2), fingroup::cyclic_group(3));
  auto g4 = fingroup::direct_product(g, fingroup::cyclic_group(2));
  // Four images in an abelian group of order 12.
  QuotientContext ctx(g4, {g4.generators()[0], g4.generators()[1], g4.generators()[2], g4.generators()[1]}, 9);
  FreeWord rel(4);
  for (int i = 0; i < 2; ++i)
    rel = rel * commutator_word(generator_word(2 * i + 1, 4), generator_word(2 * i + 2, 4));
  auto row = fox_row(ctx, rel);
  for (int i = 1; i <= 4; ++i) EXPECT_EQ(row[static_cast<std::size_t>(i - 1)], fox_derivative(ctx, rel, i));
  // In an abelian quotient d_{a1}[a1,b1] = 1 - b1.
  EXPECT_EQ(row[0], ctx.ring().one() - ctx.ring().embed(ctx.image(2)));
}

TEST(Expansion, SimpleWords) {
  auto ctx = klein_ctx(9);
  EXPECT_TRUE(expansion_check(ctx, parse_word("x1 x2", 2)).pass);
  auto comm = commutator_word(generator_word(1, 2), generator_word(2, 2));
  auto rep = expansion_check(ctx, comm);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.lhs, ctx.ring().one().coeffs());
}

TEST(Expansion, ExhaustiveShortWords) {
  for (residue_t n : {2, 9})
    for (const auto& ctx : {klein_ctx(n), s3_ctx(n)})
      for (std::size_t len = 0; len <= 6; ++len)
        for (const auto& w : all_reduced_words(2, len)) ASSERT_TRUE(expansion_check(ctx, w).pass) << w.to_string();
}

TEST(Expansion, ProductRuleForInverse) {
  // d(w w^-1) = d(w) + w d(w^-1) = 0.
  Rng rng(3);
  auto ctx = s3_ctx(9);
  for (int t = 0; t < 100; ++t) {
    auto w = random_word(2, 1 + rng.below(20), rng);
    auto a = fox_row(ctx, w), b = fox_row(ctx, inverse(w));
    const auto pw = ctx.ring().embed(ctx.evaluate(w));
    for (std::size_t i = 0; i < 2; ++i) ASSERT_TRUE((a[i] + pw * b[i]).is_zero());
  }
}

TEST(FoxRow, AdditiveOnKernelWords) {
  Rng rng(4);
  auto ctx = s3_ctx(9);
  auto sch = crowell::schreier_relators(ctx);
  ASSERT_FALSE(sch.empty());
  for (int t = 0; t < 100; ++t) {
    // Conjugates of Schreier generators are kernel words of varied shape.
    auto conj = [&](const FreeWord& k) {
      auto u = random_word(2, rng.below(6), rng);
      return u * k * inverse(u);
    };
    auto a = conj(sch[rng.below(sch.size())]);
    auto b = conj(sch[rng.below(sch.size())]);
    ASSERT_EQ(ctx.evaluate(a), 0u);
    auto ra = fox_row(ctx, a), rb = fox_row(ctx, b), rab = fox_row(ctx, a * b);
    for (std::size_t i = 0; i < 2; ++i) ASSERT_EQ(rab[i], ra[i] + rb[i]);
  }
}

TEST(QuotientContext, RejectsNonGeneratingImages) {
  auto g = fingroup::closure(bi::symmetric(3));
  EXPECT_THROW(QuotientContext(g, {g.generators()[0]}, 4), PreconditionViolated);
}
