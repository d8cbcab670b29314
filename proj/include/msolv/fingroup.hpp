#pragma once

// Finite groups, fully enumerated.
//
// A FiniteGroup is an immutable handle: elements are the indices
// 0..order()-1, index 0 is the identity, and every element is reachable
// from the generators.  Multiplication is delegated to a backend (a store
// of concrete elements, a quotient, a subgroup, a direct product, ...),
// with a full Cayley table cached for small orders.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "msolv/error.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::fingroup {

using Index = std::uint32_t;
inline constexpr Index kNoIndex = std::numeric_limits<Index>::max();
inline constexpr std::size_t kDefaultCap = 2'000'000;
inline constexpr std::size_t kTableLimit = 512;

// ---------------------------------------------------------------------------
// GroupElem

/// A permutation of {0..d-1} or an invertible square matrix over Z/n.
///
/// Products compose as functions: (a*b)(i) = a(b(i)), which matches the
/// matrix product when matrices act on column vectors.
class GroupElem {
 public:
  enum class Kind : std::uint8_t { permutation, matrix };

  static GroupElem permutation(std::vector<std::int64_t> images) {
    const std::size_t d = images.size();
    std::vector<char> seen(d, 0);
    for (auto x : images) {
      if (x < 0 || static_cast<std::size_t>(x) >= d || seen[static_cast<std::size_t>(x)])
        throw PreconditionViolated("permutation images are not a bijection");
      seen[static_cast<std::size_t>(x)] = 1;
    }
    return GroupElem(Kind::permutation, d, 0, std::move(images));
  }

  static GroupElem identity_permutation(std::size_t degree) {
    std::vector<std::int64_t> img(degree);
    std::iota(img.begin(), img.end(), 0);
    return GroupElem(Kind::permutation, degree, 0, std::move(img));
  }

  /// Validates invertibility by computing the inverse over Z/n.
  static GroupElem matrix(const zmodlin::ModMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("matrix group element must be square");
    if (!zmodlin::inverse(m)) throw NotInvertible("matrix is not invertible over Z/" +
                                                  std::to_string(m.modulus()));
    return GroupElem(Kind::matrix, m.rows(), m.modulus(), m.entries());
  }

  static GroupElem identity_matrix(std::size_t dim, zmodlin::residue_t modulus) {
    return GroupElem(Kind::matrix, dim, modulus,
                     zmodlin::ModMatrix::identity(dim, modulus).entries());
  }

  static GroupElem identity_like(const GroupElem& e) {
    return e.kind_ == Kind::permutation ? identity_permutation(e.degree_)
                                        : identity_matrix(e.degree_, e.modulus_);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t degree() const noexcept { return degree_; }
  zmodlin::residue_t modulus() const noexcept { return modulus_; }
  const std::vector<std::int64_t>& data() const noexcept { return data_; }

  bool compatible(const GroupElem& o) const noexcept {
    return kind_ == o.kind_ && degree_ == o.degree_ && modulus_ == o.modulus_;
  }

  zmodlin::ModMatrix as_matrix() const {
    if (kind_ == Kind::matrix) return zmodlin::ModMatrix(degree_, degree_, modulus_, data_);
    throw MixedVariant("permutation element used as a matrix");
  }

  GroupElem inverse() const {
    if (kind_ == Kind::permutation) {
      std::vector<std::int64_t> inv(degree_);
      for (std::size_t i = 0; i < degree_; ++i) inv[static_cast<std::size_t>(data_[i])] =
          static_cast<std::int64_t>(i);
      return GroupElem(kind_, degree_, 0, std::move(inv));
    }
    auto inv = zmodlin::inverse(as_matrix());
    return GroupElem(kind_, degree_, modulus_, inv->entries());
  }

  friend GroupElem operator*(const GroupElem& a, const GroupElem& b) {
    if (!a.compatible(b)) throw MixedVariant("group elements of different kind, degree or ring");
    const std::size_t d = a.degree_;
    std::vector<std::int64_t> out(a.data_.size());
    if (a.kind_ == Kind::permutation) {
      for (std::size_t i = 0; i < d; ++i) out[i] = a.data_[static_cast<std::size_t>(b.data_[i])];
    } else {
      const auto n = a.modulus_;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
          const auto x = a.data_[i * d + k];
          if (x == 0) continue;
          for (std::size_t j = 0; j < d; ++j) out[i * d + j] = (out[i * d + j] + x * b.data_[k * d + j]) % n;
        }
    }
    return GroupElem(a.kind_, d, a.modulus_, std::move(out));
  }

  friend bool operator==(const GroupElem&, const GroupElem&) = default;

  std::size_t hash() const noexcept {
    std::size_t h = static_cast<std::size_t>(kind_) * 0x9e3779b97f4a7c15ULL ^ degree_;
    for (auto x : data_) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }

 private:
  GroupElem(Kind k, std::size_t d, zmodlin::residue_t n, std::vector<std::int64_t> data)
      : kind_(k), degree_(d), modulus_(n), data_(std::move(data)) {}

  Kind kind_;
  std::size_t degree_;
  zmodlin::residue_t modulus_;
  std::vector<std::int64_t> data_;
};

struct GroupElemHash {
  std::size_t operator()(const GroupElem& e) const noexcept { return e.hash(); }
};

// ---------------------------------------------------------------------------
// Multiplication backends

namespace detail {

struct Multiplier {
  virtual ~Multiplier() = default;
  virtual Index size() const = 0;
  virtual Index mul(Index a, Index b) const = 0;
  virtual Index inv(Index a) const = 0;
};

/// Open-addressing index over an external element array.
template <class E, class Hash>
class IndexTable {
 public:
  explicit IndexTable(const std::vector<E>* elems) : elems_(elems), slots_(64, kNoIndex) {}

  Index find(const E& e) const {
    std::size_t mask = slots_.size() - 1;
    for (std::size_t s = Hash{}(e) & mask;; s = (s + 1) & mask) {
      if (slots_[s] == kNoIndex) return kNoIndex;
      if ((*elems_)[slots_[s]] == e) return slots_[s];
    }
  }

  // Caller has appended the element; registers its index.
  void insert(Index idx) {
    if (2 * (count_ + 1) > slots_.size()) grow();
    place(idx);
    ++count_;
  }

 private:
  void place(Index idx) {
    std::size_t mask = slots_.size() - 1;
    std::size_t s = Hash{}((*elems_)[idx]) & mask;
    while (slots_[s] != kNoIndex) s = (s + 1) & mask;
    slots_[s] = idx;
  }
  void grow() {
    std::vector<Index> old = std::move(slots_);
    slots_.assign(old.size() * 2, kNoIndex);
    for (Index i : old)
      if (i != kNoIndex) place(i);
  }

  const std::vector<E>* elems_;
  std::vector<Index> slots_;
  std::size_t count_ = 0;
};

template <class E, class Hash>
class ElementMultiplier final : public Multiplier {
 public:
  ElementMultiplier() : index_(&elems_) {}

  Index size() const override { return static_cast<Index>(elems_.size()); }
  Index mul(Index a, Index b) const override {
    Index r = index_.find(elems_[a] * elems_[b]);
    if (r == kNoIndex) throw Error("product left the enumerated group");
    return r;
  }
  Index inv(Index a) const override { return inverse_[a]; }

  const E& element(Index i) const { return elems_[i]; }
  Index find(const E& e) const { return index_.find(e); }

  // Construction interface (used only while closing).
  Index add(E e) {
    elems_.push_back(std::move(e));
    Index idx = static_cast<Index>(elems_.size() - 1);
    index_.insert(idx);
    return idx;
  }
  void set_inverses(std::vector<Index> inv) { inverse_ = std::move(inv); }
  const std::vector<E>& elements() const { return elems_; }

 private:
  std::vector<E> elems_;
  IndexTable<E, Hash> index_;
  std::vector<Index> inverse_;
};

class CyclicMultiplier final : public Multiplier {
 public:
  explicit CyclicMultiplier(Index n) : n_(n) {}
  Index size() const override { return n_; }
  Index mul(Index a, Index b) const override { return static_cast<Index>((a + b) % n_); }
  Index inv(Index a) const override { return static_cast<Index>((n_ - a) % n_); }

 private:
  Index n_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// FiniteGroup

class FiniteGroup;

template <class E, class Hash = std::hash<E>>
FiniteGroup closure_of(const E& identity, std::span<const E> gens, std::size_t cap);

class FiniteGroup {
 public:
  /// The trivial group.
  FiniteGroup() : FiniteGroup(from_multiplier(std::make_shared<detail::CyclicMultiplier>(1), {})) {}

  Index order() const noexcept { return d_->n; }
  static constexpr Index identity() noexcept { return 0; }
  const std::vector<Index>& generators() const noexcept { return d_->gens; }
  std::size_t num_generators() const noexcept { return d_->gens.size(); }

  Index mul(Index a, Index b) const {
    if (!d_->table.empty()) return d_->table[static_cast<std::size_t>(a) * d_->n + b];
    return d_->mult->mul(a, b);
  }
  Index inv(Index a) const { return d_->inverse[a]; }
  /// a * generators()[k]
  Index right_gen(Index a, std::size_t k) const { return d_->right[a * d_->gens.size() + k]; }

  Index pow(Index a, long long k) const {
    if (k < 0) {
      a = inv(a);
      k = -k;
    }
    Index r = identity();
    while (k > 0) {
      if (k & 1) r = mul(r, a);
      a = mul(a, a);
      k >>= 1;
    }
    return r;
  }
  /// a^-1 b^-1 a b
  Index commutator(Index a, Index b) const { return mul(mul(inv(a), inv(b)), mul(a, b)); }
  /// g h g^-1
  Index conj(Index g, Index h) const { return mul(mul(g, h), inv(g)); }

  bool is_abelian() const {
    for (Index a : d_->gens)
      for (Index b : d_->gens)
        if (mul(a, b) != mul(b, a)) return false;
    return true;
  }

  /// Concrete element, for groups closed from elements of type E.
  template <class E, class Hash = std::hash<E>>
  const E& element(Index i) const {
    auto m = std::dynamic_pointer_cast<const detail::ElementMultiplier<E, Hash>>(d_->mult);
    if (!m) throw Error("group is not backed by elements of the requested type");
    return m->element(i);
  }

  template <class E, class Hash = std::hash<E>>
  std::optional<Index> index_of(const E& e) const {
    auto m = std::dynamic_pointer_cast<const detail::ElementMultiplier<E, Hash>>(d_->mult);
    if (!m) throw Error("group is not backed by elements of the requested type");
    Index r = m->find(e);
    if (r == kNoIndex) return std::nullopt;
    return r;
  }

  bool same_as(const FiniteGroup& o) const noexcept { return d_ == o.d_; }

  /// Wrap a backend.  Verifies that the generators reach every element.
  static FiniteGroup from_multiplier(std::shared_ptr<const detail::Multiplier> mult,
                                     std::vector<Index> gens) {
    auto d = std::make_shared<Data>();
    d->n = mult->size();
    d->mult = std::move(mult);
    d->gens = std::move(gens);
    const std::size_t k = d->gens.size();
    d->inverse.resize(d->n);
    for (Index a = 0; a < d->n; ++a) d->inverse[a] = d->mult->inv(a);
    if (d->n <= kTableLimit) {
      d->table.resize(static_cast<std::size_t>(d->n) * d->n);
      for (Index a = 0; a < d->n; ++a)
        for (Index b = 0; b < d->n; ++b) d->table[static_cast<std::size_t>(a) * d->n + b] = d->mult->mul(a, b);
    }
    d->right.resize(static_cast<std::size_t>(d->n) * k);
    for (Index a = 0; a < d->n; ++a)
      for (std::size_t j = 0; j < k; ++j)
        d->right[a * k + j] = d->table.empty() ? d->mult->mul(a, d->gens[j])
                                               : d->table[static_cast<std::size_t>(a) * d->n + d->gens[j]];
    std::vector<char> seen(d->n, 0);
    std::vector<Index> queue{0};
    seen[0] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q)
      for (std::size_t j = 0; j < k; ++j) {
        Index b = d->right[queue[q] * k + j];
        if (!seen[b]) {
          seen[b] = 1;
          queue.push_back(b);
        }
      }
    if (queue.size() != d->n) throw Error("generators do not generate the group");
    return FiniteGroup(std::move(d));
  }

  template <class E, class Hash>
  friend FiniteGroup closure_of(const E& identity, std::span<const E> gens, std::size_t cap);

 private:
  struct Data {
    Index n = 0;
    std::shared_ptr<const detail::Multiplier> mult;
    std::vector<Index> gens;
    std::vector<Index> right;
    std::vector<Index> inverse;
    std::vector<Index> table;
  };

  explicit FiniteGroup(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  std::shared_ptr<const Data> d_;
};

/// Enumerate the group generated by `gens` by breadth-first closure.
template <class E, class Hash>
FiniteGroup closure_of(const E& identity, std::span<const E> gens, std::size_t cap) {
  auto mult = std::make_shared<detail::ElementMultiplier<E, Hash>>();
  mult->add(identity);
  const std::size_t k = gens.size();
  std::vector<Index> gen_idx(k, kNoIndex);
  std::vector<Index> right;
  for (std::size_t q = 0; q < mult->elements().size(); ++q) {
    for (std::size_t j = 0; j < k; ++j) {
      E prod = mult->element(static_cast<Index>(q)) * gens[j];
      Index idx = mult->find(prod);
      if (idx == kNoIndex) {
        if (mult->elements().size() >= cap) throw CapExceeded(mult->elements().size() + 1, cap);
        idx = mult->add(std::move(prod));
      }
      right.push_back(idx);
      if (q == 0) gen_idx[j] = idx;
    }
  }
  const Index n = mult->size();
  std::vector<Index> inverse(n, kNoIndex);
  for (Index a = 0; a < n; ++a) {
    if (inverse[a] != kNoIndex) continue;
    Index b = mult->find(mult->element(a).inverse());
    inverse[a] = b;
    inverse[b] = a;
  }
  mult->set_inverses(std::move(inverse));

  auto d = std::make_shared<FiniteGroup::Data>();
  d->n = n;
  d->gens = std::move(gen_idx);
  d->right = std::move(right);
  d->inverse.resize(n);
  for (Index a = 0; a < n; ++a) d->inverse[a] = mult->inv(a);
  d->mult = mult;
  if (n <= kTableLimit) {
    d->table.resize(static_cast<std::size_t>(n) * n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) d->table[static_cast<std::size_t>(a) * n + b] = mult->mul(a, b);
  }
  return FiniteGroup(std::move(d));
}

/// closure for permutation / matrix generators.
inline FiniteGroup closure(std::span<const GroupElem> gens, std::size_t cap = kDefaultCap) {
  if (gens.empty()) {
    const GroupElem id = GroupElem::identity_permutation(0);
    return closure_of<GroupElem, GroupElemHash>(id, gens, cap);
  }
  for (const auto& g : gens)
    if (!g.compatible(gens.front()))
      throw MixedVariant("generators must share one variant and degree/ring");
  const GroupElem id = GroupElem::identity_like(gens.front());
  return closure_of<GroupElem, GroupElemHash>(id, gens, cap);
}

inline FiniteGroup closure(const std::vector<GroupElem>& gens, std::size_t cap = kDefaultCap) {
  return closure(std::span<const GroupElem>(gens), cap);
}

inline const GroupElem& element(const FiniteGroup& g, Index i) {
  return g.element<GroupElem, GroupElemHash>(i);
}
inline std::optional<Index> index_of(const FiniteGroup& g, const GroupElem& e) {
  return g.index_of<GroupElem, GroupElemHash>(e);
}

inline FiniteGroup cyclic_group(Index n) {
  if (n == 0) throw PreconditionViolated("cyclic group order must be positive");
  std::vector<Index> gens;
  if (n > 1) gens.push_back(1);
  return FiniteGroup::from_multiplier(std::make_shared<detail::CyclicMultiplier>(n), gens);
}

namespace detail {

class ProductMultiplier final : public Multiplier {
 public:
  ProductMultiplier(FiniteGroup a, FiniteGroup b) : a_(std::move(a)), b_(std::move(b)) {}
  Index size() const override { return a_.order() * b_.order(); }
  Index mul(Index x, Index y) const override {
    const Index nb = b_.order();
    return a_.mul(x / nb, y / nb) * nb + b_.mul(x % nb, y % nb);
  }
  Index inv(Index x) const override {
    const Index nb = b_.order();
    return a_.inv(x / nb) * nb + b_.inv(x % nb);
  }

 private:
  FiniteGroup a_, b_;
};

}  // namespace detail

/// A x B with element (a, b) at index a*|B| + b.
inline FiniteGroup direct_product(const FiniteGroup& a, const FiniteGroup& b) {
  std::vector<Index> gens;
  for (Index g : a.generators()) gens.push_back(g * b.order());
  for (Index g : b.generators()) gens.push_back(g);
  return FiniteGroup::from_multiplier(std::make_shared<detail::ProductMultiplier>(a, b), gens);
}

inline Index element_order(const FiniteGroup& g, Index a) {
  Index k = 1;
  for (Index x = a; x != FiniteGroup::identity(); x = g.mul(x, a)) ++k;
  return k;
}

// ---------------------------------------------------------------------------
// Subgroups

/// A subgroup of `parent`, given by its sorted element indices.
struct Subgroup {
  FiniteGroup parent;
  std::vector<Index> elements;
  std::vector<Index> generators;
  bool normal = false;
  std::vector<char> member;

  std::size_t order() const noexcept { return elements.size(); }
  bool contains(Index i) const { return member[i] != 0; }
  bool is_trivial() const noexcept { return elements.size() == 1; }
  bool subset_of(const Subgroup& o) const {
    return std::all_of(elements.begin(), elements.end(), [&](Index i) { return o.contains(i); });
  }
  friend bool operator==(const Subgroup& a, const Subgroup& b) { return a.elements == b.elements; }
};

/// Incremental closure of a subgroup inside a parent group.
class SubgroupBuilder {
 public:
  explicit SubgroupBuilder(const FiniteGroup& g) : g_(g), member_(g.order(), 0) {
    member_[0] = 1;
    elems_.push_back(0);
  }

  bool contains(Index x) const { return member_[x] != 0; }
  std::size_t size() const { return elems_.size(); }
  const std::vector<Index>& generators() const { return gens_; }

  /// Returns false when t is already a member.
  bool add_generator(Index t) {
    if (member_[t]) return false;
    gens_.push_back(t);
    std::vector<Index> fresh;
    const std::size_t old = elems_.size();
    for (std::size_t i = 0; i < old; ++i) push(g_.mul(elems_[i], t), fresh);
    for (std::size_t q = 0; q < fresh.size(); ++q)
      for (Index s : gens_) push(g_.mul(fresh[q], s), fresh);
    return true;
  }

  Subgroup finish() && {
    Subgroup h;
    h.parent = g_;
    std::sort(elems_.begin(), elems_.end());
    h.elements = std::move(elems_);
    h.generators = std::move(gens_);
    h.member = std::move(member_);
    h.normal = true;
    for (Index s : h.generators)
      for (Index x : g_.generators())
        if (!h.member[g_.conj(x, s)]) {
          h.normal = false;
          return h;
        }
    return h;
  }

 private:
  void push(Index x, std::vector<Index>& fresh) {
    if (member_[x]) return;
    member_[x] = 1;
    elems_.push_back(x);
    fresh.push_back(x);
  }

  FiniteGroup g_;
  std::vector<char> member_;
  std::vector<Index> elems_;
  std::vector<Index> gens_;
};

inline Subgroup generate(const FiniteGroup& g, std::span<const Index> gens) {
  SubgroupBuilder b(g);
  for (Index x : gens) b.add_generator(x);
  return std::move(b).finish();
}
inline Subgroup generate(const FiniteGroup& g, std::initializer_list<Index> gens) {
  return generate(g, std::span<const Index>(gens.begin(), gens.size()));
}

inline Subgroup whole_group(const FiniteGroup& g) { return generate(g, g.generators()); }
inline Subgroup trivial_subgroup(const FiniteGroup& g) { return generate(g, std::span<const Index>{}); }

/// Subgroup from an explicit element set; throws if the set is not closed.
inline Subgroup subgroup_from_elements(const FiniteGroup& g, std::span<const Index> elems) {
  std::vector<char> in(g.order(), 0);
  for (Index x : elems) in[x] = 1;
  SubgroupBuilder b(g);
  for (Index x : elems) b.add_generator(x);
  if (b.size() != static_cast<std::size_t>(std::count(in.begin(), in.end(), 1)))
    throw Error("element set is not closed under multiplication");
  return std::move(b).finish();
}

/// H normal in the subgroup K (both subgroups of the same parent).
inline bool is_normal_in(const Subgroup& k, const Subgroup& h) {
  const FiniteGroup& g = k.parent;
  for (Index s : h.generators)
    for (Index x : k.generators)
      if (!h.contains(g.conj(x, s))) return false;
  return true;
}

/// Smallest subgroup of K that is normal in K and contains `seeds`.
inline Subgroup normal_closure(const Subgroup& k, std::span<const Index> seeds) {
  const FiniteGroup& g = k.parent;
  SubgroupBuilder b(g);
  for (Index s : seeds) b.add_generator(s);
  for (std::size_t i = 0; i < b.generators().size(); ++i) {
    const Index s = b.generators()[i];
    for (Index x : k.generators) {
      b.add_generator(g.conj(x, s));
      b.add_generator(g.conj(g.inv(x), s));
    }
  }
  return std::move(b).finish();
}

/// [H, H] as the normal closure in H of commutators of generators of H.
inline Subgroup derived_subgroup(const Subgroup& h) {
  const FiniteGroup& g = h.parent;
  std::vector<Index> comms;
  for (std::size_t i = 0; i < h.generators.size(); ++i)
    for (std::size_t j = i + 1; j < h.generators.size(); ++j) {
      Index c = g.commutator(h.generators[i], h.generators[j]);
      if (c != FiniteGroup::identity()) comms.push_back(c);
    }
  return normal_closure(h, comms);
}

/// H = H^[0] > H^[1] > ... until the series stabilizes (last term perfect or trivial).
inline std::vector<Subgroup> derived_series(const Subgroup& h) {
  std::vector<Subgroup> series{h};
  for (;;) {
    Subgroup next = derived_subgroup(series.back());
    if (next.order() == series.back().order()) break;
    series.push_back(std::move(next));
  }
  return series;
}

inline std::vector<Subgroup> derived_series(const FiniteGroup& g) {
  return derived_series(whole_group(g));
}

/// H^[m]; stays at the last term once the series has stabilized.
inline Subgroup derived_term(const Subgroup& h, std::size_t m) {
  auto s = derived_series(h);
  return m < s.size() ? s[m] : s.back();
}

/// Number of strict steps to the trivial group, or nullopt if not solvable.
inline std::optional<std::size_t> derived_length(const FiniteGroup& g) {
  auto s = derived_series(g);
  if (!s.back().is_trivial()) return std::nullopt;
  return s.size() - 1;
}

// ---------------------------------------------------------------------------
// Homomorphisms and quotients

struct Homomorphism {
  FiniteGroup source, target;
  std::vector<Index> image;

  Index operator()(Index x) const { return image[x]; }

  /// f(a * s) = f(a) f(s) for every a and generator s (which implies the full law).
  bool verify() const {
    if (image.size() != source.order() || image[0] != FiniteGroup::identity()) return false;
    for (Index a = 0; a < source.order(); ++a)
      for (std::size_t k = 0; k < source.num_generators(); ++k)
        if (image[source.right_gen(a, k)] != target.mul(image[a], image[source.generators()[k]]))
          return false;
    return true;
  }

  Subgroup kernel() const {
    std::vector<Index> ker;
    for (Index a = 0; a < source.order(); ++a)
      if (image[a] == FiniteGroup::identity()) ker.push_back(a);
    return subgroup_from_elements(source, ker);
  }

  Subgroup image_subgroup() const {
    std::vector<Index> gens;
    for (Index s : source.generators()) gens.push_back(image[s]);
    return generate(target, gens);
  }

  bool is_surjective() const { return image_subgroup().order() == target.order(); }
  bool is_injective() const { return kernel().order() == 1; }

  /// Preimage of a subgroup of the target.
  Subgroup preimage(const Subgroup& h) const {
    std::vector<Index> elems;
    for (Index a = 0; a < source.order(); ++a)
      if (h.contains(image[a])) elems.push_back(a);
    return subgroup_from_elements(source, elems);
  }
};

/// Extend generator images along words; nullopt if the assignment is not a homomorphism.
inline std::optional<Homomorphism> try_extend_hom(const FiniteGroup& g, std::span<const Index> gens,
                                                  const FiniteGroup& target,
                                                  std::span<const Index> images) {
  if (gens.size() != images.size()) throw DimensionMismatch("one image per generator required");
  std::vector<Index> img(g.order(), kNoIndex);
  img[0] = FiniteGroup::identity();
  std::vector<Index> queue{0};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const Index a = queue[q];
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const Index b = g.mul(a, gens[k]);
      const Index fb = target.mul(img[a], images[k]);
      if (img[b] == kNoIndex) {
        img[b] = fb;
        queue.push_back(b);
      } else if (img[b] != fb) {
        return std::nullopt;
      }
    }
  }
  if (queue.size() != g.order()) throw Error("given generators do not generate the source");
  return Homomorphism{g, target, std::move(img)};
}

inline Homomorphism hom_from_images(const FiniteGroup& g, const FiniteGroup& target,
                                    std::span<const Index> images) {
  auto h = try_extend_hom(g, g.generators(), target, images);
  if (!h) throw NotAHomomorphism("generator images do not define a homomorphism");
  return *h;
}

inline Homomorphism identity_hom(const FiniteGroup& g) {
  std::vector<Index> img(g.order());
  std::iota(img.begin(), img.end(), 0);
  return {g, g, std::move(img)};
}

namespace detail {

class QuotientMultiplier final : public Multiplier {
 public:
  QuotientMultiplier(FiniteGroup parent, std::vector<Index> coset_of, std::vector<Index> reps)
      : parent_(std::move(parent)), coset_of_(std::move(coset_of)), reps_(std::move(reps)) {}
  Index size() const override { return static_cast<Index>(reps_.size()); }
  Index mul(Index a, Index b) const override { return coset_of_[parent_.mul(reps_[a], reps_[b])]; }
  Index inv(Index a) const override { return coset_of_[parent_.inv(reps_[a])]; }

 private:
  FiniteGroup parent_;
  std::vector<Index> coset_of_;
  std::vector<Index> reps_;
};

class SubsetMultiplier final : public Multiplier {
 public:
  SubsetMultiplier(FiniteGroup parent, std::vector<Index> members)
      : parent_(std::move(parent)), members_(std::move(members)), local_(parent_.order(), kNoIndex) {
    for (Index i = 0; i < members_.size(); ++i) local_[members_[i]] = i;
  }
  Index size() const override { return static_cast<Index>(members_.size()); }
  Index mul(Index a, Index b) const override { return local_[parent_.mul(members_[a], members_[b])]; }
  Index inv(Index a) const override { return local_[parent_.inv(members_[a])]; }

 private:
  FiniteGroup parent_;
  std::vector<Index> members_;
  std::vector<Index> local_;
};

}  // namespace detail

struct QuotientResult {
  FiniteGroup group;
  Homomorphism projection;
  std::vector<Index> representatives;  // minimal parent index of each coset
};

/// G/N with canonical coset representatives (minimal element index).
inline QuotientResult quotient(const FiniteGroup& g, const Subgroup& n) {
  if (!n.parent.same_as(g)) throw Error("subgroup belongs to a different group");
  if (!is_normal_in(whole_group(g), n)) throw NotNormal("quotient by a non-normal subgroup");
  std::vector<Index> coset_of(g.order(), kNoIndex), reps;
  for (Index a = 0; a < g.order(); ++a) {
    if (coset_of[a] != kNoIndex) continue;
    const Index id = static_cast<Index>(reps.size());
    reps.push_back(a);
    for (Index x : n.elements) coset_of[g.mul(a, x)] = id;
  }
  std::vector<Index> gens;
  for (Index s : g.generators()) gens.push_back(coset_of[s]);
  auto q = FiniteGroup::from_multiplier(
      std::make_shared<detail::QuotientMultiplier>(g, coset_of, reps), gens);
  return {q, Homomorphism{g, q, std::move(coset_of)}, std::move(reps)};
}

/// G^(m) = G / G^[m] with its projection.
inline QuotientResult m_step_quotient(const FiniteGroup& g, std::size_t m) {
  return quotient(g, derived_term(whole_group(g), m));
}

/// A subgroup as a group in its own right, with the inclusion into the parent.
inline std::pair<FiniteGroup, Homomorphism> subgroup_as_group(const Subgroup& h) {
  const FiniteGroup& g = h.parent;
  std::vector<Index> local(g.order(), kNoIndex);
  for (Index i = 0; i < h.elements.size(); ++i) local[h.elements[i]] = i;
  std::vector<Index> gens;
  for (Index s : h.generators) gens.push_back(local[s]);
  auto sub = FiniteGroup::from_multiplier(std::make_shared<detail::SubsetMultiplier>(g, h.elements), gens);
  return {sub, Homomorphism{sub, g, h.elements}};
}

// ---------------------------------------------------------------------------
// Centralizers, classes, normal subgroups

inline Subgroup centralizer(const FiniteGroup& g, std::span<const Index> s) {
  std::vector<Index> elems;
  for (Index x = 0; x < g.order(); ++x) {
    bool ok = true;
    for (Index y : s)
      if (g.mul(x, y) != g.mul(y, x)) {
        ok = false;
        break;
      }
    if (ok) elems.push_back(x);
  }
  return subgroup_from_elements(g, elems);
}

inline Subgroup center(const FiniteGroup& g) { return centralizer(g, g.generators()); }

inline std::vector<Index> conjugacy_class(const FiniteGroup& g, Index a) {
  std::vector<char> seen(g.order(), 0);
  std::vector<Index> cls{a};
  seen[a] = 1;
  for (std::size_t q = 0; q < cls.size(); ++q)
    for (Index s : g.generators()) {
      Index b = g.conj(s, cls[q]);
      if (!seen[b]) {
        seen[b] = 1;
        cls.push_back(b);
      }
    }
  std::sort(cls.begin(), cls.end());
  return cls;
}

/// All normal subgroups, sorted by order then elements.
inline std::vector<Subgroup> normal_subgroups(const FiniteGroup& g) {
  const Subgroup whole = whole_group(g);
  std::map<std::vector<Index>, Subgroup> found;
  auto add = [&](Subgroup h) { found.emplace(h.elements, std::move(h)); };
  add(trivial_subgroup(g));
  std::vector<char> classified(g.order(), 0);
  std::vector<Subgroup> minimal;
  for (Index a = 1; a < g.order(); ++a) {
    if (classified[a]) continue;
    for (Index b : conjugacy_class(g, a)) classified[b] = 1;
    Index seed[] = {a};
    Subgroup h = normal_closure(whole, seed);
    minimal.push_back(h);
    add(std::move(h));
  }
  for (bool grew = true; grew;) {
    grew = false;
    std::vector<Subgroup> current;
    for (auto& [k, h] : found) current.push_back(h);
    for (const auto& a : current)
      for (const auto& b : minimal) {
        if (b.subset_of(a)) continue;
        std::vector<Index> seeds = a.generators;
        seeds.insert(seeds.end(), b.generators.begin(), b.generators.end());
        Subgroup j = normal_closure(whole, seeds);
        if (!found.count(j.elements)) {
          add(std::move(j));
          grew = true;
        }
      }
  }
  std::vector<Subgroup> out;
  for (auto& [k, h] : found) out.push_back(std::move(h));
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    return a.order() != b.order() ? a.order() < b.order() : a.elements < b.elements;
  });
  return out;
}

/// A generating set in which no generator lies in the span of its predecessors.
inline std::vector<Index> irredundant_generators(const FiniteGroup& g) {
  SubgroupBuilder b(g);
  for (Index s : g.generators()) b.add_generator(s);
  return b.generators();
}

// ---------------------------------------------------------------------------
// Abelian invariants

/// Invariant factors d1 | d2 | ... of G/G^[1]; empty for a perfect group.
inline std::vector<long long> abelian_invariants(const FiniteGroup& g) {
  const FiniteGroup q = m_step_quotient(g, 1).group;
  const std::vector<Index> gens = irredundant_generators(q);
  const std::size_t k = gens.size();
  if (k == 0) return {};

  // Exponent vectors along a BFS tree; every Cayley edge gives a relation.
  std::vector<std::vector<long long>> vec(q.order());
  std::vector<char> seen(q.order(), 0);
  std::vector<Index> queue{0};
  vec[0].assign(k, 0);
  seen[0] = 1;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) {
      Index b = q.mul(queue[i], gens[j]);
      if (seen[b]) continue;
      seen[b] = 1;
      vec[b] = vec[queue[i]];
      ++vec[b][j];
      queue.push_back(b);
    }

  std::vector<std::vector<BigInt>> rels;
  for (Index a : queue)
    for (std::size_t j = 0; j < k; ++j) {
      Index b = q.mul(a, gens[j]);
      std::vector<BigInt> r(k);
      bool nonzero = false;
      for (std::size_t c = 0; c < k; ++c) {
        r[c] = vec[a][c] + (c == j ? 1 : 0) - vec[b][c];
        if (r[c] != 0) nonzero = true;
      }
      if (nonzero) rels.push_back(std::move(r));
      if (rels.size() >= 4 * k + 8) rels = zmodlin::integer_row_basis(std::move(rels), k);
    }
  rels = zmodlin::integer_row_basis(std::move(rels), k);

  zmodlin::IntMatrix m(rels.size(), k);
  for (std::size_t i = 0; i < rels.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = rels[i][j];
  const auto snf = zmodlin::smith_normal_form_int(m);
  if (snf.free_rank() != 0) throw Error("abelianization of a finite group has free rank");
  std::vector<long long> out;
  for (const auto& d : snf.torsion()) out.push_back(d.convert_to<long long>());
  return out;
}

// ---------------------------------------------------------------------------
// Transfer

struct Transfer {
  QuotientResult g_ab;           // G -> G^ab
  FiniteGroup n_group;           // N as a group
  Homomorphism n_inclusion;      // N -> G
  QuotientResult n_ab;           // N -> N^ab
  Homomorphism map;              // G^ab -> N^ab
  std::vector<Index> on_group;   // transfer of every element of G, in N^ab
  std::vector<Index> transversal;
};

/// Left-coset ids of N in G (coset aN), numbered by minimal element.
inline std::vector<Index> left_coset_ids(const FiniteGroup& g, const Subgroup& n,
                                         std::vector<Index>* reps = nullptr) {
  std::vector<Index> id(g.order(), kNoIndex);
  Index next = 0;
  for (Index a = 0; a < g.order(); ++a) {
    if (id[a] != kNoIndex) continue;
    if (reps) reps->push_back(a);
    for (Index x : n.elements) id[g.mul(a, x)] = next;
    ++next;
  }
  return id;
}

/// Transfer G^ab -> N^ab built from a left transversal of N in G.
/// Passing an empty transversal selects the minimal representatives.
inline Transfer transfer_map(const FiniteGroup& g, const Subgroup& n,
                             std::span<const Index> transversal = {}) {
  if (!is_normal_in(whole_group(g), n)) throw NotNormal("transfer requires N normal in G");
  std::vector<Index> reps;
  const std::vector<Index> coset = left_coset_ids(g, n, &reps);
  if (!transversal.empty()) {
    if (transversal.size() != reps.size()) throw PreconditionViolated("transversal has wrong size");
    std::vector<Index> t(reps.size(), kNoIndex);
    for (Index a : transversal) {
      if (t[coset[a]] != kNoIndex) throw PreconditionViolated("transversal repeats a coset");
      t[coset[a]] = a;
    }
    reps = std::move(t);
  }

  Transfer out{m_step_quotient(g, 1), {}, {}, {}, {}, {}, reps};
  auto [ngrp, incl] = subgroup_as_group(n);
  out.n_group = ngrp;
  out.n_inclusion = incl;
  out.n_ab = m_step_quotient(ngrp, 1);
  std::vector<Index> local(g.order(), kNoIndex);
  for (Index i = 0; i < n.elements.size(); ++i) local[n.elements[i]] = i;

  const FiniteGroup& nab = out.n_ab.group;
  out.on_group.resize(g.order());
  for (Index x = 0; x < g.order(); ++x) {
    Index acc = FiniteGroup::identity();
    for (Index a : reps) {
      const Index ga = g.mul(x, a);
      const Index b = reps[coset[ga]];
      const Index piece = g.mul(g.inv(b), ga);  // in N
      acc = nab.mul(acc, out.n_ab.projection(local[piece]));
    }
    out.on_group[x] = acc;
  }
  std::vector<Index> img;
  for (Index r : out.g_ab.representatives) img.push_back(out.on_group[r]);
  out.map = Homomorphism{out.g_ab.group, nab, std::move(img)};
  return out;
}

// ---------------------------------------------------------------------------
// Conjugation action on N^ab

struct Faithfulness {
  bool faithful = false;
  Subgroup kernel;            // preimage in H of ker(H/N -> Aut(N^ab)); contains N
  std::size_t kernel_index = 0;  // |kernel| / |N|
};

inline Faithfulness conj_action_faithful(const FiniteGroup& h, const Subgroup& n) {
  if (!is_normal_in(whole_group(h), n)) throw NotNormal("N must be normal in H");
  const Subgroup nd = derived_subgroup(n);
  std::vector<Index> ker;
  for (Index x = 0; x < h.order(); ++x) {
    bool trivial = true;
    for (Index s : n.generators)
      if (!nd.contains(h.mul(h.conj(x, s), h.inv(s)))) {
        trivial = false;
        break;
      }
    if (trivial) ker.push_back(x);
  }
  Faithfulness f;
  f.kernel = subgroup_from_elements(h, ker);
  f.kernel_index = f.kernel.order() / n.order();
  f.faithful = f.kernel_index == 1;
  return f;
}

// ---------------------------------------------------------------------------
// Quotient isomorphism check

struct QuotientIsoReport {
  bool hypothesis = false;  // ker f is inside (f^-1 H)^[n]
  bool bijective = false;   // induced map (f^-1 H)^(n) -> H^(n)
  std::size_t source_order = 0, target_order = 0;
};

inline QuotientIsoReport quotient_iso_check(const Homomorphism& f, const Subgroup& h, std::size_t n) {
  if (!f.is_surjective()) throw NotSurjective("quotient_iso_check needs a surjection");
  const Subgroup lifted = f.preimage(h);
  const Subgroup lifted_n = derived_term(lifted, n);
  const Subgroup h_n = derived_term(h, n);
  const Subgroup ker = f.kernel();

  QuotientIsoReport rep;
  rep.hypothesis = ker.subset_of(lifted_n);

  // Coset ids of lifted_n in lifted and of h_n in h, then the induced map.
  auto coset_ids = [](const Subgroup& big, const Subgroup& small) {
    std::vector<Index> id(big.parent.order(), kNoIndex);
    Index next = 0;
    for (Index a : big.elements) {
      if (id[a] != kNoIndex) continue;
      for (Index x : small.elements) id[big.parent.mul(a, x)] = next;
      ++next;
    }
    return std::pair{id, next};
  };
  auto [src, ns] = coset_ids(lifted, lifted_n);
  auto [dst, nt] = coset_ids(h, h_n);
  rep.source_order = ns;
  rep.target_order = nt;
  std::vector<Index> map(ns, kNoIndex);
  bool well_defined = true;
  for (Index a : lifted.elements) {
    Index t = dst[f(a)];
    if (map[src[a]] == kNoIndex) map[src[a]] = t;
    else if (map[src[a]] != t) well_defined = false;
  }
  std::set<Index> hit(map.begin(), map.end());
  rep.bijective = well_defined && hit.size() == ns && ns == nt;
  return rep;
}

// ---------------------------------------------------------------------------
// Isomorphism test for small groups

inline std::vector<Index> order_profile(const FiniteGroup& g) {
  std::vector<Index> p;
  for (Index a = 0; a < g.order(); ++a) p.push_back(element_order(g, a));
  std::sort(p.begin(), p.end());
  return p;
}

inline constexpr Index kMaxIsoOrder = 64;

/// An isomorphism g1 -> g2 found by backtracking over generator images, if one exists.
inline std::optional<Homomorphism> find_isomorphism_small(const FiniteGroup& g1, const FiniteGroup& g2) {
  if (g1.order() > kMaxIsoOrder || g2.order() > kMaxIsoOrder)
    throw TooLarge("isomorphism search supports groups of order <= 64");
  if (g1.order() != g2.order()) return std::nullopt;
  if (order_profile(g1) != order_profile(g2)) return std::nullopt;
  if (center(g1).order() != center(g2).order()) return std::nullopt;
  if (abelian_invariants(g1) != abelian_invariants(g2)) return std::nullopt;
  if (derived_length(g1) != derived_length(g2)) return std::nullopt;

  const std::vector<Index> gens = irredundant_generators(g1);
  std::vector<std::vector<Index>> candidates;
  for (Index s : gens) {
    std::vector<Index> c;
    const Index o = element_order(g1, s);
    for (Index b = 0; b < g2.order(); ++b)
      if (element_order(g2, b) == o) c.push_back(b);
    candidates.push_back(std::move(c));
  }

  std::vector<Index> images(gens.size());
  std::optional<Homomorphism> found;
  std::function<bool(std::size_t)> search = [&](std::size_t depth) -> bool {
    if (depth == gens.size()) {
      auto h = try_extend_hom(g1, gens, g2, images);
      if (!h || !h->is_injective()) return false;
      found = std::move(h);
      return true;
    }
    for (Index b : candidates[depth]) {
      images[depth] = b;
      if (search(depth + 1)) return true;
    }
    return false;
  };
  search(0);
  return found;
}

inline bool iso_test_small(const FiniteGroup& g1, const FiniteGroup& g2) {
  if (g1.order() > kMaxIsoOrder || g2.order() > kMaxIsoOrder)
    throw TooLarge("iso_test_small supports groups of order <= 64");
  return find_isomorphism_small(g1, g2).has_value();
}

}  // namespace msolv::fingroup
