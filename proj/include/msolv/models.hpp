#pragma once

// Finite models of free m-step solvable groups built from iterated Magnus
// matrices, centralizer experiments on them, surface presentations, and a
// scan for center-freeness of m-step quotients.
//
// Level 1 is (Z/e)^r.  Level j is the group generated by [[q_i, e_i], [0, 1]]
// over (Z/e)[level j-1].  These groups have derived length <= j; they are not
// claimed to be relatively free.

#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "msolv/crowell.hpp"
#include "msolv/error.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/foxcalc.hpp"
#include "msolv/grpring.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::models {

using crowell::MagnusMatrix;
using fingroup::FiniteGroup;
using fingroup::Index;
using fingroup::Subgroup;
using foxcalc::FreeWord;
using foxcalc::QuotientContext;
using msolv::BigInt;
using zmodlin::ModMatrix;
using zmodlin::residue_t;

// ---------------------------------------------------------------------------
// Euler characteristic and presentations

struct EulerChar {
  long long chi = 0;
  bool hyperbolic = false;
};

inline EulerChar euler_char(long long genus, long long punctures) {
  if (genus < 0 || punctures < 0) throw PreconditionViolated("genus and punctures must be >= 0");
  const long long chi = 2 - 2 * genus - punctures;
  return {chi, chi < 0};
}

struct PresentationData {
  int rank = 0;
  std::vector<FreeWord> relators;
  zmodlin::IntMatrix exponent_sums;  // relators x generators
};

inline PresentationData make_presentation(int rank, std::vector<FreeWord> relators) {
  PresentationData p;
  p.rank = rank;
  p.exponent_sums = zmodlin::IntMatrix(relators.size(), static_cast<std::size_t>(rank));
  for (std::size_t k = 0; k < relators.size(); ++k) {
    if (relators[k].rank() != rank) throw DimensionMismatch("relator rank differs from presentation rank");
    for (const auto& l : relators[k].letters()) p.exponent_sums(k, static_cast<std::size_t>(l.gen - 1)) += l.exp;
  }
  p.relators = std::move(relators);
  return p;
}

/// One relator prod_i [a_i, b_i] on generators a_i = x_{2i-1}, b_i = x_{2i}.
inline PresentationData surface_presentation(int genus) {
  if (genus < 1) throw PreconditionViolated("surface presentation needs genus >= 1");
  const int r = 2 * genus;
  FreeWord rel(r);
  for (int i = 1; i <= genus; ++i)
    rel = rel * foxcalc::commutator_word(foxcalc::generator_word(2 * i - 1, r), foxcalc::generator_word(2 * i, r));
  return make_presentation(r, {rel});
}

struct Abelianization {
  std::vector<BigInt> torsion;  // invariant factors > 1
  std::size_t free_rank = 0;
  bool torsion_free = false;
};

inline Abelianization presentation_abelianization(const PresentationData& p) {
  const auto snf = zmodlin::smith_normal_form_int(p.exponent_sums);
  Abelianization a;
  a.torsion = snf.torsion();
  a.free_rank = snf.free_rank();
  a.torsion_free = a.torsion.empty();
  return a;
}

// ---------------------------------------------------------------------------
// Solvable models

struct MagnusHash {
  std::size_t operator()(const MagnusMatrix& m) const noexcept {
    std::size_t h = m.top_left() * 0x9e3779b97f4a7c15ULL;
    for (auto x : m.top_right()) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
};

struct SolvLevel {
  FiniteGroup group;
  std::vector<Index> gens;                     // images of x_1..x_r
  std::shared_ptr<const QuotientContext> ctx;  // ring over the previous level; null at level 1
};

struct SolvModel {
  int rank = 0;
  residue_t exponent = 0;
  int level = 0;
  bool abelian_shortcut = false;  // rank 1 or level 1: every level is (Z/e)^r
  std::vector<SolvLevel> levels;  // levels[j-1] is level j

  const SolvLevel& top() const { return levels.back(); }
  const MagnusMatrix& element(Index a) const { return top().group.element<MagnusMatrix, MagnusHash>(a); }
};

/// Bytes allowed for the elements of one closure.  The effective cap is the
/// smaller of the requested cap and this budget over the element size.
inline constexpr std::size_t kModelMemoryBudget = std::size_t{256} << 20;

inline bool is_prime_power(residue_t e) {
  if (e < 2) return false;
  residue_t p = 2;
  while (e % p != 0) ++p;
  while (e % p == 0) e /= p;
  return e == 1;
}

inline FiniteGroup abelian_level(int rank, residue_t e) {
  FiniteGroup q = fingroup::cyclic_group(static_cast<Index>(e));
  for (int i = 1; i < rank; ++i) q = fingroup::direct_product(q, fingroup::cyclic_group(static_cast<Index>(e)));
  return q;
}

inline std::size_t effective_cap(const QuotientContext& ctx, std::size_t cap) {
  const std::size_t bytes = static_cast<std::size_t>(ctx.rank()) * ctx.group().order() * sizeof(residue_t) + 64;
  return std::min(cap, kModelMemoryBudget / bytes);
}

inline std::shared_ptr<const QuotientContext> next_context(const SolvLevel& prev, residue_t e) {
  return std::make_shared<const QuotientContext>(prev.group, prev.gens, e);
}

inline std::vector<MagnusMatrix> magnus_generators(const QuotientContext& ctx) {
  std::vector<MagnusMatrix> gens;
  for (int i = 1; i <= ctx.rank(); ++i) gens.push_back(MagnusMatrix::generator(ctx, i));
  return gens;
}

inline SolvModel build_solv_model(int rank, residue_t e, int level, std::size_t cap = fingroup::kDefaultCap) {
  if (rank < 1) throw PreconditionViolated("model rank must be >= 1");
  if (level < 1) throw PreconditionViolated("model level must be >= 1");
  if (!is_prime_power(e)) throw PreconditionViolated("model exponent must be a prime power");
  if (cap == 0) throw PreconditionViolated("cap must be positive");
  SolvModel m;
  m.rank = rank;
  m.exponent = e;
  m.level = level;
  m.abelian_shortcut = rank == 1 || level == 1;
  FiniteGroup q1 = abelian_level(rank, e);
  if (q1.order() > cap) throw CapExceeded(q1.order(), cap);
  for (int j = 1; j <= (m.abelian_shortcut ? level : 1); ++j) m.levels.push_back({q1, q1.generators(), nullptr});
  if (m.abelian_shortcut) return m;
  for (int j = 2; j <= level; ++j) {
    auto ctx = next_context(m.levels.back(), e);
    const auto gens = magnus_generators(*ctx);
    FiniteGroup w = fingroup::closure_of<MagnusMatrix, MagnusHash>(MagnusMatrix::identity(*ctx), gens,
                                                                   effective_cap(*ctx, cap));
    m.levels.push_back({w, w.generators(), std::move(ctx)});
  }
  return m;
}

/// Breadth-first ball of at most `cap` elements, for levels too large to close.
inline std::vector<MagnusMatrix> magnus_ball(const QuotientContext& ctx, std::size_t cap) {
  const auto gens = magnus_generators(ctx);
  std::vector<MagnusMatrix> out{MagnusMatrix::identity(ctx)};
  std::unordered_set<MagnusMatrix, MagnusHash> seen(out.begin(), out.end());
  for (std::size_t k = 0; k < out.size() && out.size() < cap; ++k)
    for (const auto& g : gens)
      for (const auto& s : {g, g.inverse()}) {
        MagnusMatrix p = out[k] * s;
        if (out.size() < cap && seen.insert(p).second) out.push_back(std::move(p));
      }
  return out;
}

// ---------------------------------------------------------------------------
// Module-part linear algebra

/// Blockwise left multiplication by lambda on R^r.
inline ModMatrix blockwise_left(const grpring::RingElem& lambda, int r) {
  const ModMatrix b = grpring::mult_matrix(lambda);
  const std::size_t d = b.rows();
  ModMatrix m(d * static_cast<std::size_t>(r), d * static_cast<std::size_t>(r), b.modulus());
  for (std::size_t k = 0; k < static_cast<std::size_t>(r); ++k)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m(k * d + i, k * d + j) = b(i, j);
  return m;
}

/// Blockwise lambda * v for v in R^r stored flat.
inline std::vector<residue_t> left_times(const grpring::RingElem& lambda, std::span<const residue_t> v, int r) {
  return zmodlin::row_times(v, blockwise_left(lambda, r));
}

/// [f | (t - 1)] whose kernel is {v : f(v) = 0, t v = v}: the module part fixed by t.
inline ModMatrix fixed_module_system(const QuotientContext& ctx, Index t) {
  const auto& ring = ctx.ring();
  const auto c = crowell::build_complex(ctx);
  return zmodlin::hstack(c.f, blockwise_left(ring.embed(t) - ring.one(), ctx.rank()));
}

// ---------------------------------------------------------------------------
// Centralizer experiment

struct CentralizerReport {
  std::string route;  // "brute_force" or "structural"
  int rank = 0, level = 0, generator = 0;
  residue_t exponent = 0, power = 0;
  BigInt model_order, centralizer_order, fixed_module_order, linear_kernel_order;
  BigInt module_order;    // |K_m|
  Index x_order = 0;      // order of mu(x_i)
  Index top_cyclic = 0;   // |<image of x_i in level m-1>|
  bool sets_equal = false;             // brute C cap K_m == linear kernel
  bool product_decomposition = false;  // C = <mu(x_i)> K_cap
  bool conjugation_formula = false;    // mu(x_i) (1, v) mu(x_i)^-1 = (1, x_i v)
  bool module_is_ker_f = false;        // |K_m| == |ker f|
  std::size_t sampled = 0;             // elements checked in a capped ball (structural route)
  bool sample_consistent = true;
  bool pass = false;
};

inline void check_centralizer_args(int rank, residue_t e, int i, residue_t n) {
  if (i < 1 || i > rank) throw IndexOutOfRange("generator index outside 1..r");
  if (n < 1) throw PreconditionViolated("n must be positive");
  if (n % e == 0) throw PreconditionViolated("x_i^n is trivial in the abelianization");
}

/// Brute force on a fully materialized model with level >= 2 (or the abelian shortcut).
inline CentralizerReport centralizer_experiment(const SolvModel& model, int i, residue_t n) {
  check_centralizer_args(model.rank, model.exponent, i, n);
  if (model.level < 2 && model.rank > 1) throw PreconditionViolated("centralizer experiment needs level >= 2");
  CentralizerReport rep;
  rep.route = "brute_force";
  rep.rank = model.rank;
  rep.level = model.level;
  rep.generator = i;
  rep.exponent = model.exponent;
  rep.power = n;
  const SolvLevel& top = model.top();
  const FiniteGroup& w = top.group;
  const Index x = top.gens[static_cast<std::size_t>(i - 1)];
  const Index y = w.pow(x, static_cast<long long>(n));
  rep.model_order = w.order();
  rep.x_order = fingroup::element_order(w, x);

  std::vector<Index> ys{y};
  const Subgroup c = fingroup::centralizer(w, ys);
  const Subgroup cyc = fingroup::generate(w, {x});
  rep.centralizer_order = c.order();

  if (model.abelian_shortcut) {
    rep.top_cyclic = cyc.order();
    rep.module_order = 1;
    rep.fixed_module_order = 1;
    rep.linear_kernel_order = 1;
    rep.sets_equal = true;
    rep.conjugation_formula = true;
    rep.module_is_ker_f = true;
    rep.product_decomposition = c.order() == cyc.order();
    rep.pass = rep.product_decomposition;
    return rep;
  }

  const QuotientContext& ctx = *top.ctx;
  const auto& ring = ctx.ring();
  const int r = model.rank;
  const MagnusMatrix& ym = model.element(y);

  // Linear-algebra side.
  const auto lin = zmodlin::howell_form(zmodlin::kernel_basis(fixed_module_system(ctx, ym.top_left())));
  rep.linear_kernel_order = zmodlin::span_size(lin);

  // Brute-force side.
  std::vector<Index> module, fixed;
  for (Index a = 0; a < w.order(); ++a)
    if (model.element(a).top_left() == FiniteGroup::identity()) {
      module.push_back(a);
      if (c.contains(a)) fixed.push_back(a);
    }
  rep.module_order = module.size();
  rep.fixed_module_order = fixed.size();
  rep.sets_equal = rep.fixed_module_order == rep.linear_kernel_order;
  for (Index a : fixed)
    if (!zmodlin::in_row_span(lin, model.element(a).top_right())) rep.sets_equal = false;

  rep.module_is_ker_f =
      rep.module_order == zmodlin::span_size(zmodlin::howell_form(zmodlin::kernel_basis(crowell::build_complex(ctx).f)));

  rep.conjugation_formula = true;
  for (int k = 1; k <= r && rep.conjugation_formula; ++k) {
    const Index g = top.gens[static_cast<std::size_t>(k - 1)];
    const auto xk = ring.embed(ctx.image(k));
    for (Index a : module) {
      const MagnusMatrix& conj = model.element(w.conj(g, a));
      if (conj.top_left() != FiniteGroup::identity() ||
          conj.top_right() != left_times(xk, model.element(a).top_right(), r)) {
        rep.conjugation_formula = false;
        break;
      }
    }
  }

  // C = <x> K_cap: every centralizing element is x^k times a fixed module element.
  std::vector<char> in_product(w.order(), 0);
  std::size_t product_size = 0;
  for (Index p : cyc.elements)
    for (Index k : fixed) {
      const Index pk = w.mul(p, k);
      if (!in_product[pk]) {
        in_product[pk] = 1;
        ++product_size;
      }
    }
  rep.product_decomposition = product_size == c.order();
  for (Index a : c.elements)
    if (!in_product[a]) rep.product_decomposition = false;

  std::vector<Index> top_gen{ctx.image(i)};
  rep.top_cyclic = fingroup::generate(ctx.group(), top_gen).order();
  rep.pass = rep.sets_equal && rep.product_decomposition && rep.conjugation_formula && rep.module_is_ker_f;
  return rep;
}

/// Level m from a materialized level m-1: W_m = {(q, v) : f(v) = q - 1}, so the
/// centralizer of y = (t, w) splits over q in C(t) into cosets of
/// {v : f(v) = 0, (t - 1) v = 0}.  `sample_cap` elements of a breadth-first
/// ball in W_m are checked against the structural answer.
inline CentralizerReport centralizer_experiment_structural(const SolvModel& below, int i, residue_t n,
                                                           std::size_t sample_cap) {
  check_centralizer_args(below.rank, below.exponent, i, n);
  if (below.abelian_shortcut && below.rank == 1)
    throw PreconditionViolated("rank-1 models are abelian; use the brute-force route");
  CentralizerReport rep;
  rep.route = "structural";
  rep.rank = below.rank;
  rep.level = below.level + 1;
  rep.generator = i;
  rep.exponent = below.exponent;
  rep.power = n;
  const int r = below.rank;
  const auto ctx = next_context(below.top(), below.exponent);
  const FiniteGroup& q = ctx->group();
  const auto& ring = ctx->ring();

  MagnusMatrix ym = MagnusMatrix::identity(*ctx);
  const MagnusMatrix xm = MagnusMatrix::generator(*ctx, i);
  for (residue_t k = 0; k < n; ++k) ym = ym * xm;
  const Index t = ym.top_left();
  const auto& wv = ym.top_right();

  const ModMatrix sys = fixed_module_system(*ctx, t);
  const auto lin = zmodlin::howell_form(zmodlin::kernel_basis(sys));
  rep.linear_kernel_order = zmodlin::span_size(lin);
  rep.fixed_module_order = rep.linear_kernel_order;
  const BigInt ker_f = zmodlin::span_size(zmodlin::howell_form(zmodlin::kernel_basis(crowell::build_complex(*ctx).f)));
  rep.module_order = ker_f;
  rep.model_order = BigInt(q.order()) * ker_f;
  rep.module_is_ker_f = true;  // taken as the definition on this route
  rep.sets_equal = true;

  std::vector<Index> top_gen{ctx->image(i)};
  const Subgroup top_cyc = fingroup::generate(q, top_gen);
  rep.top_cyclic = top_cyc.order();

  // For each q commuting with t: solve f(v) = q - 1 and (t - 1) v = (q - 1) w.
  std::vector<char> feasible(q.order(), 0);
  std::size_t nfeasible = 0;
  for (Index a = 0; a < q.order(); ++a) {
    if (q.mul(a, t) != q.mul(t, a)) continue;
    const auto qm1 = ring.embed(a) - ring.one();
    std::vector<residue_t> rhs = qm1.coeffs();
    const auto tail = left_times(qm1, wv, r);
    rhs.insert(rhs.end(), tail.begin(), tail.end());
    if (zmodlin::solve_linear(sys, rhs).feasible) {
      feasible[a] = 1;
      ++nfeasible;
    }
  }
  rep.centralizer_order = BigInt(nfeasible) * rep.linear_kernel_order;
  rep.product_decomposition = nfeasible == top_cyc.order();
  for (Index a : top_cyc.elements)
    if (!feasible[a]) rep.product_decomposition = false;

  // mu(x_i) has order |<x_i>| times the additive order of its e-th power's vector part.
  {
    MagnusMatrix p = xm;
    Index ord = 1;
    while (!(p == MagnusMatrix::identity(*ctx))) {
      p = p * xm;
      ++ord;
    }
    rep.x_order = ord;
  }

  // Cross-check on a ball: membership in W_m and in C as predicted.
  const auto ball = magnus_ball(*ctx, sample_cap);
  const auto f = crowell::build_complex(*ctx).f;
  rep.sampled = ball.size();
  rep.conjugation_formula = true;
  for (const auto& g : ball) {
    const auto fv = zmodlin::row_times(g.top_right(), f);
    if (fv != (ring.embed(g.top_left()) - ring.one()).coeffs()) rep.sample_consistent = false;
    const bool commutes = g * ym == ym * g;
    if (commutes && !feasible[g.top_left()]) rep.sample_consistent = false;
    if (g.top_left() == FiniteGroup::identity()) {
      if (commutes != zmodlin::in_row_span(lin, g.top_right())) rep.sample_consistent = false;
      for (int k = 1; k <= r; ++k) {
        const MagnusMatrix gk = MagnusMatrix::generator(*ctx, k);
        const MagnusMatrix conj = gk * g * gk.inverse();
        if (conj.top_left() != FiniteGroup::identity() ||
            conj.top_right() != left_times(ring.embed(ctx->image(k)), g.top_right(), r))
          rep.conjugation_formula = false;
      }
    }
  }
  rep.pass = rep.product_decomposition && rep.conjugation_formula && rep.sample_consistent;
  return rep;
}

// ---------------------------------------------------------------------------
// Model soundness

struct ModelSoundness {
  std::optional<std::size_t> derived_length;
  std::vector<long long> abelian_invariants;
  bool derived_length_ok = false;
  bool abelianization_all_e = false;  // invariants are r copies of e
  bool module_stable = false;         // K_m closed under conjugation by generators
};

inline ModelSoundness model_soundness(const SolvModel& m) {
  ModelSoundness s;
  const FiniteGroup& w = m.top().group;
  s.derived_length = fingroup::derived_length(w);
  s.derived_length_ok = s.derived_length && *s.derived_length <= static_cast<std::size_t>(m.level);
  s.abelian_invariants = fingroup::abelian_invariants(w);
  s.abelianization_all_e =
      s.abelian_invariants == std::vector<long long>(static_cast<std::size_t>(m.rank), static_cast<long long>(m.exponent));
  s.module_stable = true;
  if (!m.abelian_shortcut)
    for (Index a = 0; a < w.order() && s.module_stable; ++a) {
      if (m.element(a).top_left() != FiniteGroup::identity()) continue;
      for (Index g : m.top().gens)
        if (m.element(w.conj(g, a)).top_left() != FiniteGroup::identity()) s.module_stable = false;
    }
  return s;
}

// ---------------------------------------------------------------------------
// Center-freeness scan

struct ScanEntry {
  std::string name;
  Index order = 0, center_order = 0;
  Index quotient_order = 0, quotient_center_order = 0;
  bool flagged = false;  // Z(G) = 1 and Z(G^(m)) != 1
  std::size_t normal_count = 0;       // normal N of G containing G^[m-1]
  bool all_faithful = false;          // G/N -> Aut(N^ab) injective for all of them
  std::optional<Index> unfaithful_n;  // order of a witness N when not
  bool center_in_image = false;       // Z(G^(m)) inside the image of G^[m-1]
};

struct NamedGroup {
  std::string name;
  FiniteGroup group;
};

inline ScanEntry centerfree_scan_one(const NamedGroup& ng, std::size_t m) {
  if (m < 1) throw PreconditionViolated("scan level m must be >= 1");
  const FiniteGroup& g = ng.group;
  ScanEntry e;
  e.name = ng.name;
  e.order = g.order();
  e.center_order = static_cast<Index>(fingroup::center(g).order());
  const auto q = fingroup::m_step_quotient(g, m);
  e.quotient_order = q.group.order();
  const Subgroup zq = fingroup::center(q.group);
  e.quotient_center_order = static_cast<Index>(zq.order());
  e.flagged = e.center_order == 1 && e.quotient_center_order != 1;

  const Subgroup prev = fingroup::derived_term(fingroup::whole_group(g), m - 1);
  std::vector<char> image(q.group.order(), 0);
  for (Index a : prev.elements) image[q.projection(a)] = 1;
  e.center_in_image = true;
  for (Index z : zq.elements)
    if (!image[z]) e.center_in_image = false;

  e.all_faithful = true;
  for (const auto& n : fingroup::normal_subgroups(g)) {
    if (!prev.subset_of(n)) continue;
    ++e.normal_count;
    if (!fingroup::conj_action_faithful(g, n).faithful && e.all_faithful) {
      e.all_faithful = false;
      e.unfaithful_n = static_cast<Index>(n.order());
    }
  }
  return e;
}

inline std::vector<ScanEntry> centerfree_scan(const std::vector<NamedGroup>& corpus, std::size_t m) {
  std::vector<ScanEntry> out;
  for (const auto& g : corpus) out.push_back(centerfree_scan_one(g, m));
  return out;
}

}  // namespace msolv::models
