#pragma once

// Group rings (Z/n)[Q] with dense coefficient vectors, and towers of
// cyclic extensions A[C_N] over A = (Z/n)[H] for abelian H.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "msolv/error.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::grpring {

using fingroup::FiniteGroup;
using fingroup::Index;
using zmodlin::ModMatrix;
using zmodlin::residue_t;
using zmodlin::ResidueRing;

class RingElem;

class GroupRing {
 public:
  GroupRing(FiniteGroup q, residue_t modulus) : group_(std::move(q)), base_(modulus) {}

  const FiniteGroup& group() const noexcept { return group_; }
  const ResidueRing& base() const noexcept { return base_; }
  residue_t modulus() const noexcept { return base_.modulus(); }
  std::size_t dim() const noexcept { return group_.order(); }

  bool operator==(const GroupRing& o) const noexcept {
    return group_.same_as(o.group_) && modulus() == o.modulus();
  }

  RingElem zero() const;
  RingElem one() const;
  RingElem scalar(residue_t c) const;
  RingElem embed(Index g) const;
  RingElem from_coeffs(std::vector<residue_t> c) const;

 private:
  FiniteGroup group_;
  ResidueRing base_;
};

class RingElem {
 public:
  RingElem(GroupRing ring, std::vector<residue_t> coeffs) : ring_(std::move(ring)), c_(std::move(coeffs)) {
    if (c_.size() != ring_.dim()) throw DimensionMismatch("coefficient vector length != |Q|");
    for (auto& x : c_) x = ring_.base().reduce(x);
  }

  const GroupRing& ring() const noexcept { return ring_; }
  const std::vector<residue_t>& coeffs() const noexcept { return c_; }
  residue_t operator[](Index g) const { return c_[g]; }
  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](residue_t x) { return x == 0; });
  }

  friend bool operator==(const RingElem& a, const RingElem& b) { return a.ring_ == b.ring_ && a.c_ == b.c_; }

  friend RingElem operator+(const RingElem& a, const RingElem& b) {
    check(a, b);
    std::vector<residue_t> c(a.c_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.ring_.base().add(a.c_[i], b.c_[i]);
    return {a.ring_, std::move(c)};
  }
  friend RingElem operator-(const RingElem& a) {
    std::vector<residue_t> c(a.c_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.ring_.base().neg(a.c_[i]);
    return {a.ring_, std::move(c)};
  }
  friend RingElem operator-(const RingElem& a, const RingElem& b) { return a + (-b); }

  friend RingElem operator*(const RingElem& a, const RingElem& b) {
    check(a, b);
    const FiniteGroup& q = a.ring_.group();
    const residue_t n = a.ring_.modulus();
    std::vector<residue_t> c(a.c_.size(), 0);
    for (Index g = 0; g < a.c_.size(); ++g) {
      if (a.c_[g] == 0) continue;
      for (Index h = 0; h < b.c_.size(); ++h) {
        if (b.c_[h] == 0) continue;
        const Index gh = q.mul(g, h);
        c[gh] = (c[gh] + a.c_[g] * b.c_[h]) % n;
      }
    }
    return {a.ring_, std::move(c)};
  }

  friend RingElem operator*(residue_t s, const RingElem& a) {
    std::vector<residue_t> c(a.c_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.ring_.base().mul(s, a.c_[i]);
    return {a.ring_, std::move(c)};
  }

  /// Left multiplication by the group element g.
  RingElem translate_left(Index g) const {
    std::vector<residue_t> c(c_.size(), 0);
    for (Index h = 0; h < c_.size(); ++h) c[ring_.group().mul(g, h)] = c_[h];
    return {ring_, std::move(c)};
  }

 private:
  static void check(const RingElem& a, const RingElem& b) {
    if (!(a.ring_ == b.ring_)) throw RingMismatch("ring elements from different group rings");
  }

  GroupRing ring_;
  std::vector<residue_t> c_;
};

inline RingElem GroupRing::zero() const { return {*this, std::vector<residue_t>(dim(), 0)}; }
inline RingElem GroupRing::one() const { return embed(FiniteGroup::identity()); }
inline RingElem GroupRing::scalar(residue_t c) const {
  std::vector<residue_t> v(dim(), 0);
  v[0] = c;
  return {*this, std::move(v)};
}
inline RingElem GroupRing::embed(Index g) const {
  if (g >= dim()) throw IndexOutOfRange("group element index out of range");
  std::vector<residue_t> v(dim(), 0);
  v[g] = 1;
  return {*this, std::move(v)};
}
inline RingElem GroupRing::from_coeffs(std::vector<residue_t> c) const { return {*this, std::move(c)}; }

/// Coefficient sum.
inline residue_t augmentation(const RingElem& a) {
  residue_t s = 0;
  for (auto x : a.coeffs()) s = a.ring().base().add(s, x);
  return s;
}

/// Row g is the coefficient vector of lambda*g, so coeffs(mu) * M = coeffs(lambda*mu).
inline ModMatrix mult_matrix(const RingElem& lambda) {
  const std::size_t d = lambda.ring().dim();
  const FiniteGroup& q = lambda.ring().group();
  ModMatrix m(d, d, lambda.ring().modulus());
  for (Index g = 0; g < d; ++g)
    for (Index h = 0; h < d; ++h)
      if (lambda[h] != 0) m(g, q.mul(h, g)) = lambda[h];
  return m;
}

/// Row g is the coefficient vector of g*lambda, so coeffs(mu) * M = coeffs(mu*lambda).
inline ModMatrix right_mult_matrix(const RingElem& lambda) {
  const std::size_t d = lambda.ring().dim();
  const FiniteGroup& q = lambda.ring().group();
  ModMatrix m(d, d, lambda.ring().modulus());
  for (Index g = 0; g < d; ++g)
    for (Index h = 0; h < d; ++h)
      if (lambda[h] != 0) m(g, q.mul(g, h)) = lambda[h];
  return m;
}

// ---------------------------------------------------------------------------
// Prime sets

struct SigmaSplit {
  long long sigma_part = 1;   // n_Sigma
  long long other_part = 1;   // n_Sigma'
};

inline SigmaSplit sigma_split(long long n, const std::set<long long>& primes) {
  if (n == 0) throw PreconditionViolated("cannot split 0 along a prime set");
  SigmaSplit s;
  long long rest = n < 0 ? -n : n;
  for (long long p : primes)
    while (rest % p == 0) {
      s.sigma_part *= p;
      rest /= p;
    }
  s.other_part = rest;
  return s;
}

/// True when every prime factor of n lies in `primes`.
inline bool is_sigma_number(long long n, const std::set<long long>& primes) {
  return sigma_split(n, primes).other_part == 1;
}

// ---------------------------------------------------------------------------
// Cyclic towers

/// A[C_N] for each configured level N, with A = (Z/n)[H] and H abelian.
/// Level N is realized on H x C_N with element (h, c) at index h*N + c.
class CyclicTower {
 public:
  CyclicTower(FiniteGroup h, residue_t modulus, std::vector<Index> levels)
      : h_(std::move(h)), modulus_(modulus) {
    if (!h_.is_abelian()) throw PreconditionViolated("tower coefficients need an abelian group");
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (Index n : levels) {
      if (n == 0) throw PreconditionViolated("tower level must be positive");
      rings_.emplace(n, GroupRing(fingroup::direct_product(h_, fingroup::cyclic_group(n)), modulus));
    }
  }

  const FiniteGroup& coefficient_group() const noexcept { return h_; }
  residue_t modulus() const noexcept { return modulus_; }

  std::vector<Index> levels() const {
    std::vector<Index> out;
    for (const auto& [n, r] : rings_) out.push_back(n);
    return out;
  }

  const GroupRing& level(Index n) const {
    auto it = rings_.find(n);
    if (it == rings_.end()) throw LevelMismatch("level " + std::to_string(n) + " not in tower");
    return it->second;
  }

  /// The generator x_N of C_N.
  RingElem generator(Index n) const { return level(n).embed(n == 1 ? 0 : 1); }

  /// Embed a coefficient a in A at level N.
  RingElem coefficient(Index n, std::span<const residue_t> a) const {
    if (a.size() != h_.order()) throw DimensionMismatch("coefficient length != |H|");
    std::vector<residue_t> c(static_cast<std::size_t>(h_.order()) * n, 0);
    for (Index h = 0; h < h_.order(); ++h) c[h * n] = a[h];
    return level(n).from_coeffs(std::move(c));
  }

  /// The projection A[C_from] -> A[C_to] sending x_from to x_to.
  RingElem project(const RingElem& y, Index from, Index to) const {
    if (!(y.ring() == level(from))) throw RingMismatch("element is not at the stated level");
    const GroupRing& target = level(to);
    if (from % to != 0) throw LevelMismatch(std::to_string(to) + " does not divide " + std::to_string(from));
    std::vector<residue_t> c(target.dim(), 0);
    for (Index i = 0; i < y.coeffs().size(); ++i) {
      const Index h = i / from, k = i % from;
      const Index j = h * to + k % to;
      c[j] = (c[j] + y.coeffs()[i]) % modulus_;
    }
    return target.from_coeffs(std::move(c));
  }

 private:
  FiniteGroup h_;
  residue_t modulus_;
  std::map<Index, GroupRing> rings_;
};

struct KernelProjectionReport {
  bool pass = true;
  std::size_t kernel_generators = 0;
  BigInt kernel_size = 0;
  std::optional<std::vector<residue_t>> witness;  // projection outside k*A[C_M]
};

/// ker((x^n - 1)*) in A[C_{kM}], each generator projected to level M, must lie in k*A[C_M].
inline KernelProjectionReport kernel_projection_check(const CyclicTower& t, long long n, Index k, Index m,
                                                      const std::set<long long>& primes) {
  if (n == 0) throw PreconditionViolated("n must be nonzero");
  if (k == 0 || m == 0) throw PreconditionViolated("levels must be positive");
  if (!is_sigma_number(k, primes) || !is_sigma_number(m, primes))
    throw PreconditionViolated("k and M must have all prime factors in the prime set");
  const long long n_sigma = sigma_split(n, primes).sigma_part;
  if (m % n_sigma != 0)
    throw PreconditionViolated("n_Sigma = " + std::to_string(n_sigma) + " does not divide M = " + std::to_string(m));

  const Index top = k * m;
  const GroupRing& ring = t.level(top);
  const FiniteGroup& grp = ring.group();
  const long long e = ((n % top) + top) % top;
  const Index x = top == 1 ? 0 : 1;
  const RingElem lambda = ring.embed(grp.pow(x, e)) - ring.one();
  const ModMatrix ker = zmodlin::kernel_basis(mult_matrix(lambda));

  KernelProjectionReport rep;
  rep.kernel_generators = ker.rows();
  rep.kernel_size = zmodlin::span_size(zmodlin::howell_form(ker));
  const residue_t divisor = std::gcd(static_cast<residue_t>(k), t.modulus());
  for (std::size_t i = 0; i < ker.rows(); ++i) {
    const RingElem y = ring.from_coeffs(ker.row_vector(i));
    const RingElem z = t.project(y, top, m);
    const bool inside = std::all_of(z.coeffs().begin(), z.coeffs().end(),
                                    [&](residue_t c) { return c % divisor == 0; });
    if (!inside) {
      rep.pass = false;
      rep.witness = z.coeffs();
      break;
    }
  }
  return rep;
}

}  // namespace msolv::grpring
