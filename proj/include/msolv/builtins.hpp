#pragma once

// Named generator sets: symmetric, alternating, dihedral, cyclic, Q8 and
// the 72-element affine group (C3 x C3) x| D8.

#include <string>
#include <vector>

#include "msolv/fingroup.hpp"

namespace msolv::builtin {

using fingroup::GroupElem;

/// Permutation of {0..degree-1} from disjoint or overlapping cycles, composed right to left.
inline GroupElem perm_from_cycles(std::size_t degree, const std::vector<std::vector<std::int64_t>>& cycles) {
  std::vector<std::int64_t> img(degree);
  for (std::size_t i = 0; i < degree; ++i) img[i] = static_cast<std::int64_t>(i);
  for (auto c = cycles.rbegin(); c != cycles.rend(); ++c) {
    for (auto x : *c)
      if (x < 0 || static_cast<std::size_t>(x) >= degree)
        throw IndexOutOfRange("cycle point " + std::to_string(x) + " outside degree " + std::to_string(degree));
    std::vector<std::int64_t> step(degree);
    for (std::size_t i = 0; i < degree; ++i) step[i] = static_cast<std::int64_t>(i);
    for (std::size_t k = 0; k < c->size(); ++k) step[static_cast<std::size_t>((*c)[k])] = (*c)[(k + 1) % c->size()];
    // img := step o img
    for (auto& x : img) x = step[static_cast<std::size_t>(x)];
  }
  return GroupElem::permutation(std::move(img));
}

inline std::vector<std::int64_t> iota_cycle(std::size_t k) {
  std::vector<std::int64_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = static_cast<std::int64_t>(i);
  return c;
}

inline std::vector<GroupElem> symmetric(std::size_t k) {
  if (k < 2) return {};
  if (k == 2) return {perm_from_cycles(2, {{0, 1}})};
  return {perm_from_cycles(k, {iota_cycle(k)}), perm_from_cycles(k, {{0, 1}})};
}

inline std::vector<GroupElem> alternating(std::size_t k) {
  std::vector<GroupElem> gens;
  for (std::size_t i = 2; i < k; ++i)
    gens.push_back(perm_from_cycles(k, {{0, 1, static_cast<std::int64_t>(i)}}));
  return gens;
}

inline std::vector<GroupElem> cyclic(std::size_t k) {
  if (k < 2) return {};
  return {perm_from_cycles(k, {iota_cycle(k)})};
}

/// Dihedral group of order 2k (k >= 2), acting on a k-gon; order 4 uses two transpositions.
inline std::vector<GroupElem> dihedral(std::size_t k) {
  if (k < 2) throw PreconditionViolated("dihedral group needs k >= 2");
  if (k == 2) return {perm_from_cycles(4, {{0, 1}}), perm_from_cycles(4, {{2, 3}})};
  std::vector<std::int64_t> refl(k);
  for (std::size_t i = 0; i < k; ++i) refl[i] = static_cast<std::int64_t>((k - i) % k);
  return {perm_from_cycles(k, {iota_cycle(k)}), GroupElem::permutation(std::move(refl))};
}

/// Q8 inside SL2(F3): i = [[0,2],[1,0]], j = [[1,1],[1,2]].
inline std::vector<GroupElem> quaternion() {
  using zmodlin::ModMatrix;
  return {GroupElem::matrix(ModMatrix::from_rows({{0, 2}, {1, 0}}, 2, 3)),
          GroupElem::matrix(ModMatrix::from_rows({{1, 1}, {1, 2}}, 2, 3))};
}

/// r -> [[0,-1],[1,0]], s -> [[1,0],[0,-1]] over F3.
inline std::vector<zmodlin::ModMatrix> counterexample_action() {
  using zmodlin::ModMatrix;
  return {ModMatrix::from_rows({{0, 2}, {1, 0}}, 2, 3), ModMatrix::from_rows({{1, 0}, {0, 2}}, 2, 3)};
}

/// Affine permutations of F3^2 (point (a,b) has index 3a+b): two translations
/// followed by the linear maps r and s acting on column vectors.
inline std::vector<GroupElem> counterexample() {
  auto point = [](std::int64_t a, std::int64_t b) { return ((a % 3 + 3) % 3) * 3 + (b % 3 + 3) % 3; };
  std::vector<GroupElem> gens;
  for (auto [da, db] : {std::pair{1, 0}, std::pair{0, 1}}) {
    std::vector<std::int64_t> img(9);
    for (std::int64_t a = 0; a < 3; ++a)
      for (std::int64_t b = 0; b < 3; ++b) img[static_cast<std::size_t>(point(a, b))] = point(a + da, b + db);
    gens.push_back(GroupElem::permutation(std::move(img)));
  }
  for (const auto& m : counterexample_action()) {
    std::vector<std::int64_t> img(9);
    for (std::int64_t a = 0; a < 3; ++a)
      for (std::int64_t b = 0; b < 3; ++b)
        img[static_cast<std::size_t>(point(a, b))] = point(m(0, 0) * a + m(0, 1) * b, m(1, 0) * a + m(1, 1) * b);
    gens.push_back(GroupElem::permutation(std::move(img)));
  }
  return gens;
}

}  // namespace msolv::builtin
