#pragma once

// Explicit finite constructions: the 72-element counterexample, the
// matrix reduction lemma, the left regular representation and the
// block-triangular centralizer experiment over Z/l^sigma.

#include <algorithm>
#include <optional>
#include <vector>

#include "msolv/builtins.hpp"
#include "msolv/error.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::constructions {

using fingroup::FiniteGroup;
using fingroup::GroupElem;
using fingroup::Homomorphism;
using fingroup::Index;
using zmodlin::ModMatrix;
using zmodlin::residue_t;

// ---------------------------------------------------------------------------
// Counterexample

struct CounterexampleBundle {
  FiniteGroup group;                  // (C3 x C3) x| D8 on the 9 points of F3^2
  fingroup::QuotientResult quotient;  // G / G^[2]
  FiniteGroup d8;
  Homomorphism iso;  // d8 -> quotient.group
  Index center_order = 0;
  Index quotient_center_order = 0;
  std::size_t derived_length = 0;
};

/// Brute-force center: every element tested against every element.
inline Index brute_center_order(const FiniteGroup& g) {
  Index c = 0;
  for (Index a = 0; a < g.order(); ++a) {
    bool central = true;
    for (Index b = 0; b < g.order() && central; ++b) central = g.mul(a, b) == g.mul(b, a);
    c += central;
  }
  return c;
}

inline CounterexampleBundle build_counterexample() {
  FiniteGroup g = fingroup::closure(builtin::counterexample());
  auto q = fingroup::m_step_quotient(g, 2);
  FiniteGroup d8 = fingroup::closure(builtin::dihedral(4));
  auto iso = fingroup::find_isomorphism_small(d8, q.group);
  if (!iso) throw Error("counterexample quotient is not isomorphic to D8");
  CounterexampleBundle b{g, q, d8, *iso};
  b.center_order = brute_center_order(g);
  b.quotient_center_order = brute_center_order(q.group);
  b.derived_length = fingroup::derived_length(g).value_or(0);
  return b;
}

// ---------------------------------------------------------------------------
// Reduction lemma

enum class LemmaOutcome { pass, vacuous, fail };

inline const char* to_string(LemmaOutcome o) {
  switch (o) {
    case LemmaOutcome::pass: return "pass";
    case LemmaOutcome::vacuous: return "vacuous";
    default: return "fail";
  }
}

inline residue_t ipow(residue_t b, int e) {
  residue_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// If ntilde * E = 0 over Z/l^sigma then E = 0 mod l, provided sigma > ord_l(ntilde).
inline LemmaOutcome reduction_lemma_check(const ModMatrix& e, residue_t ntilde, residue_t prime, int sigma) {
  if (ntilde == 0) throw PreconditionViolated("ntilde must be nonzero");
  if (sigma < 1) throw PreconditionViolated("sigma must be >= 1");
  if (e.modulus() != ipow(prime, sigma)) throw RingMismatch("matrix is not over Z/l^sigma");
  if (sigma <= zmodlin::valuation(ntilde, prime))
    throw PreconditionViolated("sigma must exceed ord_l(ntilde)");
  const residue_t c = ((ntilde % e.modulus()) + e.modulus()) % e.modulus();
  if (!zmodlin::scale(e, c).is_zero()) return LemmaOutcome::vacuous;
  for (residue_t x : e.entries())
    if (x % prime != 0) return LemmaOutcome::fail;
  return LemmaOutcome::pass;
}

// ---------------------------------------------------------------------------
// Regular representation

struct RegularRepresentation {
  std::vector<ModMatrix> matrices;  // indexed by element of the source
  Homomorphism hom;                 // source -> matrix group
};

/// Left translation: column h of rho(g) is e_{gh}, so rho(g) rho(k) = rho(gk).
inline ModMatrix left_translation_matrix(const FiniteGroup& g, Index a, residue_t modulus) {
  ModMatrix m(g.order(), g.order(), modulus);
  for (Index h = 0; h < g.order(); ++h) m(g.mul(a, h), h) = 1;
  return m;
}

inline RegularRepresentation regular_representation(const FiniteGroup& g, residue_t modulus) {
  RegularRepresentation rep{{}, {}};
  for (Index a = 0; a < g.order(); ++a) rep.matrices.push_back(left_translation_matrix(g, a, modulus));
  std::vector<GroupElem> gens;
  for (Index s : g.generators()) gens.push_back(GroupElem::matrix(rep.matrices[s]));
  if (gens.empty()) gens.push_back(GroupElem::identity_matrix(g.order(), modulus));
  FiniteGroup target = fingroup::closure(gens);
  std::vector<Index> images;
  for (Index s : g.generators()) images.push_back(*fingroup::index_of(target, GroupElem::matrix(rep.matrices[s])));
  rep.hom = fingroup::hom_from_images(g, target, images);
  return rep;
}

/// Entrywise reduction modulo a divisor of the modulus.
inline ModMatrix reduce_mod(const ModMatrix& m, residue_t d) {
  if (m.modulus() % d != 0) throw RingMismatch("reduction modulus must divide the modulus");
  std::vector<residue_t> e = m.entries();
  for (auto& x : e) x %= d;
  return ModMatrix(m.rows(), m.cols(), d, std::move(e));
}

// ---------------------------------------------------------------------------
// Block-triangular centralizer experiment

struct GTildeInstance {
  FiniteGroup group;
  Index x = 0;
  residue_t n = 1;
  residue_t prime = 3;
  int sigma = 2;
};

struct GTildePair {
  Index a = 0;     // A = rho(a)
  Index c_exp = 0;  // C = rho(x)^c_exp
  bool a_commutes = false;
  bool feasible = false;
  bool diagonal = false;  // a == x^c_exp
  std::vector<residue_t> witness;  // B flattened row-major, when feasible
};

struct GTildeReport {
  Index u = 0;      // |G|
  Index s = 0;      // order of x
  residue_t modulus = 0;
  bool faithful = false;
  bool reduction_injective = false;
  std::vector<GTildePair> pairs;
  std::size_t feasible_count = 0;
  bool feasible_implies_diagonal = false;
  bool feasible_equals_diagonal = false;
  bool witnesses_verified = false;
  bool pass = false;
};

/// The linear map B -> BY - YB on u x u matrices, in the row-vector
/// convention on the row-major flattening of B.
inline ModMatrix commutator_operator(const ModMatrix& y) {
  const std::size_t u = y.rows();
  ModMatrix l(u * u, u * u, y.modulus());
  const residue_t n = y.modulus();
  for (std::size_t p = 0; p < u; ++p)
    for (std::size_t q = 0; q < u; ++q) {
      const std::size_t row = p * u + q;
      // B[p][q] feeds (BY)[p][j] through Y[q][j] and (YB)[i][q] through Y[i][p].
      for (std::size_t j = 0; j < u; ++j)
        if (y(q, j)) l(row, p * u + j) = (l(row, p * u + j) + y(q, j)) % n;
      for (std::size_t i = 0; i < u; ++i)
        if (y(i, p)) l(row, i * u + q) = (l(row, i * u + q) + n - y(i, p)) % n;
    }
  return l;
}

/// 2u x 2u block matrix [[A, B], [0, C]].
inline ModMatrix block_upper(const ModMatrix& a, const ModMatrix& b, const ModMatrix& c) {
  const std::size_t u = a.rows();
  ModMatrix m(2 * u, 2 * u, a.modulus());
  for (std::size_t i = 0; i < u; ++i)
    for (std::size_t j = 0; j < u; ++j) {
      m(i, j) = a(i, j);
      m(i, u + j) = b(i, j);
      m(u + i, u + j) = c(i, j);
    }
  return m;
}

/// psi(x)^n = [[Y, nY], [0, Y]] with Y = rho(x)^n, since [[X, X], [0, X]] = X [[1, 1], [0, 1]].
inline ModMatrix psi_power(const ModMatrix& y, residue_t n) {
  return block_upper(y, zmodlin::scale(y, n % y.modulus()), y);
}

/// For every (A, C) with A in rho(G) and C in <rho(x)>, decide whether some B
/// makes [[A, B], [0, C]] commute with psi(x)^n.
inline GTildeReport gtilde_experiment(const GTildeInstance& inst) {
  const FiniteGroup& g = inst.group;
  if (inst.x >= g.order()) throw IndexOutOfRange("x outside the group");
  if (inst.n < 1) throw PreconditionViolated("n must be positive");
  if (inst.sigma < 1) throw PreconditionViolated("sigma must be >= 1");
  GTildeReport rep;
  rep.u = g.order();
  rep.s = fingroup::element_order(g, inst.x);
  rep.modulus = ipow(inst.prime, inst.sigma);
  if (inst.sigma <= zmodlin::valuation(static_cast<residue_t>(rep.s) * inst.n, inst.prime))
    throw PreconditionViolated("sigma must exceed ord_l(s n)");
  if (static_cast<std::size_t>(rep.u) * rep.u > 4096) throw TooLarge("regular representation too large for u^2 unknowns");

  const auto rho = regular_representation(g, rep.modulus);
  rep.faithful = rho.hom.is_injective();
  {
    std::vector<std::vector<residue_t>> seen;
    for (const auto& m : rho.matrices) seen.push_back(reduce_mod(m, inst.prime).entries());
    std::sort(seen.begin(), seen.end());
    rep.reduction_injective = std::adjacent_find(seen.begin(), seen.end()) == seen.end();
  }

  const Index xn = g.pow(inst.x, inst.n);
  const ModMatrix& y = rho.matrices[xn];
  const ModMatrix big = psi_power(y, inst.n);
  const ModMatrix op = commutator_operator(y);
  const residue_t nn = inst.n % rep.modulus;

  rep.feasible_implies_diagonal = true;
  rep.feasible_equals_diagonal = true;
  rep.witnesses_verified = true;
  for (Index a = 0; a < g.order(); ++a) {
    const ModMatrix& am = rho.matrices[a];
    for (Index k = 0; k < rep.s; ++k) {
      const Index c = g.pow(inst.x, k);
      const ModMatrix& cm = rho.matrices[c];
      GTildePair p{a, k};
      p.diagonal = a == c;
      p.a_commutes = am * y == y * am;
      if (p.a_commutes) {
        // BY - YB = n (YC - AY)
        const ModMatrix rhs = zmodlin::scale(y * cm - am * y, nn);
        const auto sol = zmodlin::solve_linear(op, rhs.entries());
        p.feasible = sol.feasible;
        if (sol.feasible) {
          p.witness = sol.solution;
          const ModMatrix blk = block_upper(am, ModMatrix(rep.u, rep.u, rep.modulus, sol.solution), cm);
          if (!(blk * big == big * blk)) rep.witnesses_verified = false;
        }
      }
      if (p.feasible) {
        ++rep.feasible_count;
        if (!p.diagonal) rep.feasible_implies_diagonal = false;
      }
      if (p.feasible != p.diagonal) rep.feasible_equals_diagonal = false;
      rep.pairs.push_back(std::move(p));
    }
  }
  rep.pass = rep.faithful && rep.reduction_injective && rep.feasible_implies_diagonal && rep.witnesses_verified;
  return rep;
}

}  // namespace msolv::constructions
