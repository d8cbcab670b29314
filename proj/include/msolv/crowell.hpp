#pragma once

// Magnus matrices [[q, v], [0, 1]] over (Z/n)[Q] and the finite complex
//   R^r --f--> R --s--> Z/n,   f(l) = sum_i l_i (x_i - 1),  s = augmentation,
// realized as Z/n-matrices through the regular representation.

#include <span>
#include <vector>

#include "msolv/error.hpp"
#include "msolv/foxcalc.hpp"
#include "msolv/grpring.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::crowell {

using fingroup::FiniteGroup;
using fingroup::Index;
using foxcalc::FreeWord;
using foxcalc::QuotientContext;
using msolv::BigInt;
using zmodlin::ModMatrix;
using zmodlin::residue_t;

/// [[q, v], [0, 1]] with v in R^r stored flat (component i in block i-1).
class MagnusMatrix {
 public:
  MagnusMatrix(const QuotientContext& ctx, Index q, std::vector<residue_t> v)
      : ctx_(&ctx), q_(q), v_(std::move(v)) {
    if (v_.size() != static_cast<std::size_t>(ctx.rank()) * ctx.group().order())
      throw DimensionMismatch("Magnus vector length != r*|Q|");
  }

  static MagnusMatrix identity(const QuotientContext& ctx) {
    return {ctx, FiniteGroup::identity(), std::vector<residue_t>(static_cast<std::size_t>(ctx.rank()) * ctx.group().order(), 0)};
  }

  static MagnusMatrix generator(const QuotientContext& ctx, int i) {
    MagnusMatrix m = identity(ctx);
    m.q_ = ctx.image(i);
    m.v_[static_cast<std::size_t>(i - 1) * ctx.group().order()] = 1;
    return m;
  }

  Index top_left() const noexcept { return q_; }
  const std::vector<residue_t>& top_right() const noexcept { return v_; }

  friend bool operator==(const MagnusMatrix& a, const MagnusMatrix& b) {
    return a.ctx_ == b.ctx_ && a.q_ == b.q_ && a.v_ == b.v_;
  }

  /// [[q, v]] [[q', v']] = [[q q', q v' + v]].
  friend MagnusMatrix operator*(const MagnusMatrix& a, const MagnusMatrix& b) {
    if (a.ctx_ != b.ctx_) throw RingMismatch("Magnus matrices over different contexts");
    const FiniteGroup& g = a.ctx_->group();
    const residue_t n = a.ctx_->ring().modulus();
    const Index d = g.order();
    std::vector<residue_t> v = a.v_;
    for (std::size_t blk = 0; blk < static_cast<std::size_t>(a.ctx_->rank()); ++blk)
      for (Index h = 0; h < d; ++h) {
        const residue_t c = b.v_[blk * d + h];
        if (c == 0) continue;
        auto& slot = v[blk * d + g.mul(a.q_, h)];
        slot = (slot + c) % n;
      }
    return {*a.ctx_, g.mul(a.q_, b.q_), std::move(v)};
  }

  /// [[q^-1, -q^-1 v]].
  MagnusMatrix inverse() const {
    const FiniteGroup& g = ctx_->group();
    const residue_t n = ctx_->ring().modulus();
    const Index d = g.order();
    const Index qi = g.inv(q_);
    std::vector<residue_t> v(v_.size(), 0);
    for (std::size_t blk = 0; blk < static_cast<std::size_t>(ctx_->rank()); ++blk)
      for (Index h = 0; h < d; ++h)
        if (v_[blk * d + h]) v[blk * d + g.mul(qi, h)] = (n - v_[blk * d + h]) % n;
    return {*ctx_, qi, std::move(v)};
  }

 private:
  const QuotientContext* ctx_;
  Index q_;
  std::vector<residue_t> v_;
};

/// Product of generator matrices along the word.
inline MagnusMatrix magnus_image(const QuotientContext& ctx, const FreeWord& w) {
  ctx.check(w);
  MagnusMatrix m = MagnusMatrix::identity(ctx);
  for (const auto& l : w.letters()) {
    const MagnusMatrix g = MagnusMatrix::generator(ctx, l.gen);
    m = m * (l.exp > 0 ? g : g.inverse());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Complex

struct CrowellComplex {
  const QuotientContext* ctx;
  ModMatrix f;  // r|Q| x |Q|
  ModMatrix s;  // |Q| x 1
};

inline CrowellComplex build_complex(const QuotientContext& ctx) {
  const auto& r = ctx.ring();
  const std::size_t d = r.dim();
  ModMatrix f(static_cast<std::size_t>(ctx.rank()) * d, d, r.modulus());
  for (int i = 1; i <= ctx.rank(); ++i) {
    const ModMatrix block = grpring::right_mult_matrix(r.embed(ctx.image(i)) - r.one());
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) f(static_cast<std::size_t>(i - 1) * d + a, b) = block(a, b);
  }
  ModMatrix s(d, 1, r.modulus());
  for (std::size_t a = 0; a < d; ++a) s(a, 0) = 1;
  return {&ctx, std::move(f), std::move(s)};
}

struct ExactnessReport {
  bool pass = false;
  bool image_equals_kernel = false;  // im f = ker s
  bool s_surjective = false;
  bool s_after_f_zero = false;
  BigInt image_size, ker_s_size, ker_f_size;
  ModMatrix ker_f{0, 0, 2};
};

inline ExactnessReport exactness_check(const CrowellComplex& c) {
  ExactnessReport rep;
  const auto im = zmodlin::howell_form(c.f);
  const ModMatrix ker_s = zmodlin::kernel_basis(c.s);
  const auto ks = zmodlin::howell_form(ker_s);
  rep.image_equals_kernel = im.matrix == ks.matrix;
  rep.image_size = zmodlin::span_size(im);
  rep.ker_s_size = zmodlin::span_size(ks);
  rep.s_surjective = zmodlin::span_size(zmodlin::howell_form(c.s)) == BigInt(c.s.modulus());
  rep.s_after_f_zero = (c.f * c.s).is_zero();
  rep.ker_f = zmodlin::kernel_basis(c.f);
  rep.ker_f_size = zmodlin::span_size(zmodlin::howell_form(rep.ker_f));
  rep.pass = rep.image_equals_kernel && rep.s_surjective && rep.s_after_f_zero;
  return rep;
}

/// f(fox_row(w)) = 0 for every relator; throws if some relator is not killed by pi.
inline bool relator_kernel_check(const QuotientContext& ctx, std::span<const FreeWord> relators) {
  const CrowellComplex c = build_complex(ctx);
  for (const auto& w : relators) {
    if (ctx.evaluate(w) != FiniteGroup::identity())
      throw RelatorNotInKernel("relator " + w.to_string() + " does not map to 1");
    const auto img = zmodlin::row_times(foxcalc::fox_row_flat(ctx, w), c.f);
    for (auto x : img)
      if (x != 0) return false;
  }
  return true;
}

/// Free generators u_g x_i u_{g x_i}^-1 of ker(F -> Q) from a BFS spanning tree.
inline std::vector<FreeWord> schreier_relators(const QuotientContext& ctx) {
  const FiniteGroup& q = ctx.group();
  const int r = ctx.rank();
  std::vector<FreeWord> rep(q.order());
  std::vector<char> seen(q.order(), 0);
  std::vector<std::vector<char>> tree(q.order(), std::vector<char>(static_cast<std::size_t>(r), 0));
  std::vector<Index> queue{0};
  rep[0] = FreeWord(r);
  seen[0] = 1;
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const Index g = queue[k];
    for (int i = 1; i <= r; ++i) {
      const Index h = q.mul(g, ctx.image(i));
      if (seen[h]) continue;
      seen[h] = 1;
      rep[h] = rep[g] * foxcalc::generator_word(i, r);
      tree[g][static_cast<std::size_t>(i - 1)] = 1;
      queue.push_back(h);
    }
  }
  std::vector<FreeWord> out;
  for (Index g : queue)
    for (int i = 1; i <= r; ++i) {
      if (tree[g][static_cast<std::size_t>(i - 1)]) continue;
      const Index h = q.mul(g, ctx.image(i));
      FreeWord w = rep[g] * foxcalc::generator_word(i, r) * foxcalc::inverse(rep[h]);
      if (!w.empty()) out.push_back(std::move(w));
    }
  return out;
}

struct RelationModuleReport {
  bool relators_in_kernel = false;
  bool spans_kernel = false;
  BigInt span_size, ker_f_size;  // discrepancy index = ker_f_size / span_size
};

/// Compare ker f with the R-submodule generated by the relator Fox rows.
inline RelationModuleReport relation_module_check(const QuotientContext& ctx, std::span<const FreeWord> relators) {
  RelationModuleReport rep;
  rep.relators_in_kernel = relator_kernel_check(ctx, relators);
  const FiniteGroup& q = ctx.group();
  const std::size_t d = q.order();
  const std::size_t r = static_cast<std::size_t>(ctx.rank());
  std::vector<std::vector<residue_t>> rows;
  for (const auto& w : relators) {
    const auto v = foxcalc::fox_row_flat(ctx, w);
    for (Index g = 0; g < d; ++g) {
      std::vector<residue_t> t(v.size(), 0);
      for (std::size_t blk = 0; blk < r; ++blk)
        for (Index h = 0; h < d; ++h) t[blk * d + q.mul(g, h)] = v[blk * d + h];
      rows.push_back(std::move(t));
    }
  }
  const ModMatrix span = ModMatrix::from_rows(rows, r * d, ctx.ring().modulus());
  const auto hs = zmodlin::howell_form(span);
  const auto hk = zmodlin::howell_form(zmodlin::kernel_basis(build_complex(ctx).f));
  rep.spans_kernel = hs.matrix == hk.matrix;
  rep.span_size = zmodlin::span_size(hs);
  rep.ker_f_size = zmodlin::span_size(hk);
  return rep;
}

}  // namespace msolv::crowell
