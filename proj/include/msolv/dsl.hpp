#pragma once

// Group description language.
//
//   spec   := perm | mat | semi | builtin
//   perm   := "perm" INT ":" cycles ("," cycles)*        cycles := "(" INT* ")" ...
//   mat    := "mat" INT ":" matrix ("," matrix)*         matrix := "[" row ("," row)* "]"
//   semi   := "semidirect" "(" spec "," spec "," "action" "=" "[" matrix ("," matrix)* "]" ")"
//   builtin:= "builtin" NAME                            S<k> A<k> C<k> D<2k> Q8 counterexample
//
// '#' starts a comment that runs to the end of the line.  In `semidirect`,
// row i of the j-th action matrix lists the exponents of the image of the
// i-th generator of the (abelian) normal part under the j-th acting generator.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msolv/builtins.hpp"
#include "msolv/error.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/zmodlin.hpp"

namespace msolv::dsl {

using fingroup::FiniteGroup;
using fingroup::GroupElem;
using fingroup::Index;
using IntRows = std::vector<std::vector<long long>>;

struct GroupSpec;
using SpecPtr = std::shared_ptr<const GroupSpec>;

struct PermSpec {
  std::size_t degree = 0;
  std::vector<std::vector<std::vector<long long>>> gens;  // generator -> cycles -> points
  friend bool operator==(const PermSpec&, const PermSpec&) = default;
};

struct MatSpec {
  long long modulus = 2;
  std::vector<IntRows> gens;  // entries reduced into [0, modulus)
  friend bool operator==(const MatSpec&, const MatSpec&) = default;
};

struct SemidirectSpec {
  SpecPtr normal, acting;
  std::vector<IntRows> action;
};

struct BuiltinSpec {
  std::string family;  // S, A, C, D, Q, counterexample
  long long param = 0;
  friend bool operator==(const BuiltinSpec&, const BuiltinSpec&) = default;
};

struct GroupSpec {
  std::variant<PermSpec, MatSpec, SemidirectSpec, BuiltinSpec> node;
};

bool operator==(const GroupSpec& a, const GroupSpec& b);

inline bool operator==(const SemidirectSpec& a, const SemidirectSpec& b) {
  return *a.normal == *b.normal && *a.acting == *b.acting && a.action == b.action;
}

inline bool operator==(const GroupSpec& a, const GroupSpec& b) { return a.node == b.node; }

// ---------------------------------------------------------------------------
// Printing (canonical form)

inline std::string print_matrix(const IntRows& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ",";
    s += "[";
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (j) s += ",";
      s += std::to_string(m[i][j]);
    }
    s += "]";
  }
  return s + "]";
}

inline std::string print_cycles(const std::vector<std::vector<long long>>& cycles) {
  if (cycles.empty()) return "()";
  std::string s;
  for (const auto& c : cycles) {
    s += "(";
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) s += " ";
      s += std::to_string(c[k]);
    }
    s += ")";
  }
  return s;
}

inline std::string print(const GroupSpec& spec) {
  struct V {
    std::string operator()(const PermSpec& p) const {
      std::string s = "perm " + std::to_string(p.degree) + " :";
      for (std::size_t g = 0; g < p.gens.size(); ++g) s += (g ? ", " : " ") + print_cycles(p.gens[g]);
      return s;
    }
    std::string operator()(const MatSpec& m) const {
      std::string s = "mat " + std::to_string(m.modulus) + " :";
      for (std::size_t g = 0; g < m.gens.size(); ++g) s += (g ? ", " : " ") + print_matrix(m.gens[g]);
      return s;
    }
    std::string operator()(const SemidirectSpec& sd) const {
      std::string s = "semidirect(" + print(*sd.normal) + ", " + print(*sd.acting) + ", action=[";
      for (std::size_t j = 0; j < sd.action.size(); ++j) s += (j ? ", " : "") + print_matrix(sd.action[j]);
      return s + "])";
    }
    std::string operator()(const BuiltinSpec& b) const {
      if (b.family == "counterexample" || b.family == "Q8") return "builtin " + b.family;
      return "builtin " + b.family + std::to_string(b.param);
    }
  };
  return std::visit(V{}, spec.node);
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SpecPtr parse_all() {
    SpecPtr s = spec();
    skip();
    if (pos_ != text_.size()) fail({"end of input"});
    return s;
  }

  /// One permutation in cycle notation, e.g. "(0 1 2)(3 4)" or "()".
  std::vector<std::vector<long long>> parse_cycles_all(std::size_t degree) {
    auto c = cycles(degree);
    skip();
    if (pos_ != text_.size()) fail({"end of input"});
    return c;
  }

  IntRows parse_matrix_all() {
    auto m = matrix();
    skip();
    if (pos_ != text_.size()) fail({"end of input"});
    return m;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail = {}) const {
    fail_at(pos_, std::move(expected), detail);
  }

  [[noreturn]] void fail_at(std::size_t at, std::vector<std::string> expected, const std::string& detail = {}) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, std::move(expected), detail);
  }

  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail({std::string("'") + c + "'"});
    ++pos_;
  }

  std::string word() {
    skip();
    std::size_t b = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(b, pos_ - b));
  }

  long long integer(bool allow_sign = false) {
    skip();
    bool neg = false;
    if (allow_sign && pos_ < text_.size() && text_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail({"integer"});
    long long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_++] - '0');
      if (v > (1LL << 40)) fail({"integer below 2^40"});
    }
    return neg ? -v : v;
  }

  SpecPtr spec() {
    skip();
    const std::size_t at = pos_;
    const std::string kw = word();
    if (kw == "perm") return perm();
    if (kw == "mat") return mat();
    if (kw == "semidirect") return semidirect();
    if (kw == "builtin") return builtin();
    fail_at(at, {"perm", "mat", "semidirect", "builtin"});
  }

  SpecPtr perm() {
    const std::size_t at = pos_;
    const long long d = integer();
    if (d < 1 || d > 100000) fail_at(at, {"degree in 1..100000"});
    expect(':');
    PermSpec p;
    p.degree = static_cast<std::size_t>(d);
    p.gens.push_back(cycles(p.degree));
    while (peek(',')) {
      const std::size_t save = pos_;
      ++pos_;
      if (!peek('(')) {
        pos_ = save;  // the comma belongs to an enclosing list
        break;
      }
      p.gens.push_back(cycles(p.degree));
    }
    return std::make_shared<GroupSpec>(GroupSpec{std::move(p)});
  }

  std::vector<std::vector<long long>> cycles(std::size_t degree) {
    std::vector<std::vector<long long>> out;
    if (!peek('(')) fail({"'('"});
    while (peek('(')) {
      ++pos_;
      std::vector<long long> c;
      std::vector<char> used(degree, 0);
      while (!peek(')')) {
        skip();
        const std::size_t at = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail({"point", "')'"});
        const long long x = integer();
        if (x < 0 || static_cast<std::size_t>(x) >= degree) fail_at(at, {"point in 0.." + std::to_string(degree - 1)});
        if (used[static_cast<std::size_t>(x)]) fail_at(at, {"distinct points"}, "point repeated in a cycle");
        used[static_cast<std::size_t>(x)] = 1;
        c.push_back(x);
        if (peek(',')) ++pos_;
      }
      ++pos_;
      if (!c.empty()) out.push_back(std::move(c));
    }
    return out;
  }

  SpecPtr mat() {
    const std::size_t at = pos_;
    const long long n = integer();
    if (n < 2 || n > (1LL << 31)) fail_at(at, {"modulus in 2..2^31"});
    expect(':');
    MatSpec m;
    m.modulus = n;
    auto one = [&] {
      auto rows = matrix();
      if (rows.size() != rows[0].size()) fail({"square matrix"});
      for (auto& r : rows)
        for (auto& x : r) x = ((x % n) + n) % n;
      if (!m.gens.empty() && rows.size() != m.gens[0].size()) fail({"matrices of one size"});
      m.gens.push_back(std::move(rows));
    };
    one();
    while (peek(',')) {
      const std::size_t save = pos_;
      ++pos_;
      if (!peek('[')) {
        pos_ = save;
        break;
      }
      one();
    }
    return std::make_shared<GroupSpec>(GroupSpec{std::move(m)});
  }

  IntRows matrix() {
    expect('[');
    IntRows rows;
    do {
      skip();
      const std::size_t row_at = pos_;
      expect('[');
      std::vector<long long> r{integer(true)};
      while (peek(',')) {
        ++pos_;
        r.push_back(integer(true));
      }
      expect(']');
      if (!rows.empty() && r.size() != rows[0].size()) fail_at(row_at, {"row of length " + std::to_string(rows[0].size())});
      rows.push_back(std::move(r));
    } while (peek(',') && (++pos_, true));
    expect(']');
    return rows;
  }

  SpecPtr semidirect() {
    expect('(');
    SemidirectSpec sd;
    sd.normal = spec();
    expect(',');
    sd.acting = spec();
    expect(',');
    skip();
    const std::size_t at = pos_;
    if (word() != "action") fail_at(at, {"action"});
    expect('=');
    expect('[');
    sd.action.push_back(matrix());
    while (peek(',')) {
      ++pos_;
      sd.action.push_back(matrix());
    }
    expect(']');
    expect(')');
    return std::make_shared<GroupSpec>(GroupSpec{std::move(sd)});
  }

  SpecPtr builtin() {
    skip();
    const std::size_t at = pos_;
    const std::string name = word();
    BuiltinSpec b;
    if (name == "counterexample" || name == "Q8") {
      b.family = name;
      return std::make_shared<GroupSpec>(GroupSpec{b});
    }
    const std::vector<std::string> expected{"S<k>", "A<k>", "C<k>", "D<2k>", "Q8", "counterexample"};
    if (name.size() < 2 || std::string("SACD").find(name[0]) == std::string::npos) fail_at(at, expected);
    for (std::size_t i = 1; i < name.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(name[i]))) fail_at(at, expected);
    if (name.size() > 8) fail_at(at, expected, "parameter too large");
    b.family = name.substr(0, 1);
    b.param = std::stoll(name.substr(1));
    const long long k = b.param;
    const bool ok = (b.family == "S" && k >= 1 && k <= 8) || (b.family == "A" && k >= 1 && k <= 9) ||
                    (b.family == "C" && k >= 1 && k <= 100000) ||
                    (b.family == "D" && k >= 4 && k % 2 == 0 && k <= 200000);
    if (!ok) fail_at(at, expected, "parameter out of range");
    return std::make_shared<GroupSpec>(GroupSpec{b});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline SpecPtr parse_group_dsl(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Materialization

struct Materialized {
  FiniteGroup group;
  std::vector<GroupElem> generators;  // as written in the description
};

inline GroupElem cycles_to_elem(std::size_t degree, const std::vector<std::vector<long long>>& cycles) {
  std::vector<std::vector<std::int64_t>> c;
  for (const auto& cyc : cycles) c.emplace_back(cyc.begin(), cyc.end());
  return builtin::perm_from_cycles(degree, c);
}

inline GroupElem matrix_to_elem(const IntRows& rows, long long modulus) {
  std::vector<std::vector<zmodlin::residue_t>> r;
  for (const auto& row : rows) {
    std::vector<zmodlin::residue_t> v;
    for (auto x : row) v.push_back(((x % modulus) + modulus) % modulus);
    r.push_back(std::move(v));
  }
  return GroupElem::matrix(zmodlin::ModMatrix::from_rows(r, rows[0].size(), modulus));
}

Materialized materialize(const GroupSpec& spec, std::size_t cap = fingroup::kDefaultCap);

inline Materialized materialize_semidirect(const SemidirectSpec& sd, std::size_t cap) {
  const Materialized nm = materialize(*sd.normal, cap);
  const Materialized hm = materialize(*sd.acting, cap);
  const FiniteGroup& n = nm.group;
  const FiniteGroup& h = hm.group;
  if (!n.is_abelian()) throw PreconditionViolated("semidirect: the normal part must be abelian");
  const std::size_t a = nm.generators.size();
  if (sd.action.size() != hm.generators.size())
    throw PreconditionViolated("semidirect: need one action matrix per acting generator");
  const auto& ngens = n.generators();

  // alpha_j as a permutation of N's elements.
  std::vector<std::vector<Index>> alpha;
  std::vector<GroupElem> alpha_perm;
  for (const auto& m : sd.action) {
    if (m.size() != a || m[0].size() != a) throw PreconditionViolated("semidirect: action matrices must be a x a");
    std::vector<Index> images;
    for (std::size_t i = 0; i < a; ++i) {
      Index img = FiniteGroup::identity();
      for (std::size_t k = 0; k < a; ++k) img = n.mul(img, n.pow(ngens[k], m[i][k]));
      images.push_back(img);
    }
    auto hom = fingroup::try_extend_hom(n, ngens, n, images);
    if (!hom || !hom->is_injective()) throw PreconditionViolated("semidirect: action matrix is not an automorphism");
    alpha.push_back(hom->image);
    std::vector<std::int64_t> p(hom->image.begin(), hom->image.end());
    alpha_perm.push_back(GroupElem::permutation(std::move(p)));
  }
  // h -> alpha_h must be a homomorphism into Aut(N).
  std::vector<GroupElem> ap = alpha_perm;
  if (ap.empty()) ap.push_back(GroupElem::identity_permutation(n.order()));
  const FiniteGroup aut = fingroup::closure(ap, cap);
  std::vector<Index> aut_images;
  for (const auto& p : alpha_perm) aut_images.push_back(*fingroup::index_of(aut, p));
  auto act = fingroup::try_extend_hom(h, h.generators(), aut, aut_images);
  if (!act) throw PreconditionViolated("semidirect: action does not define a homomorphism H -> Aut(N)");

  // Left-regular permutations of N x H, (m, k) at index m*|H| + k.
  const Index nh = h.order();
  const std::size_t deg = static_cast<std::size_t>(n.order()) * nh;
  if (deg > 200000) throw TooLarge("semidirect product too large for the regular representation");
  std::vector<GroupElem> gens;
  for (Index s : ngens) {
    std::vector<std::int64_t> img(deg);
    for (Index m = 0; m < n.order(); ++m)
      for (Index k = 0; k < nh; ++k) img[m * nh + k] = static_cast<std::int64_t>(n.mul(s, m)) * nh + k;
    gens.push_back(GroupElem::permutation(std::move(img)));
  }
  for (std::size_t j = 0; j < h.generators().size(); ++j) {
    const Index t = h.generators()[j];
    const auto& aj = fingroup::element(aut, act->image[t]).data();
    std::vector<std::int64_t> img(deg);
    for (Index m = 0; m < n.order(); ++m)
      for (Index k = 0; k < nh; ++k) img[m * nh + k] = aj[m] * nh + h.mul(t, k);
    gens.push_back(GroupElem::permutation(std::move(img)));
  }
  return {fingroup::closure(gens, cap), gens};
}

inline Materialized materialize(const GroupSpec& spec, std::size_t cap) {
  struct V {
    std::size_t cap;
    Materialized operator()(const PermSpec& p) const {
      std::vector<GroupElem> gens;
      for (const auto& g : p.gens) gens.push_back(cycles_to_elem(p.degree, g));
      return {fingroup::closure(gens, cap), gens};
    }
    Materialized operator()(const MatSpec& m) const {
      std::vector<GroupElem> gens;
      for (const auto& g : m.gens) gens.push_back(matrix_to_elem(g, m.modulus));
      return {fingroup::closure(gens, cap), gens};
    }
    Materialized operator()(const SemidirectSpec& sd) const { return materialize_semidirect(sd, cap); }
    Materialized operator()(const BuiltinSpec& b) const {
      std::vector<GroupElem> gens;
      const auto k = static_cast<std::size_t>(b.param);
      if (b.family == "S") gens = builtin::symmetric(k);
      else if (b.family == "A") gens = builtin::alternating(k);
      else if (b.family == "C") gens = builtin::cyclic(k);
      else if (b.family == "D") gens = builtin::dihedral(k / 2);
      else if (b.family == "Q8") gens = builtin::quaternion();
      else gens = builtin::counterexample();
      return {fingroup::closure(gens, cap), gens};
    }
  };
  return std::visit(V{cap}, spec.node);
}

/// An element written like the generators of `like`: cycle notation for
/// permutations, a bracketed matrix for matrix groups.
inline GroupElem parse_element(std::string_view text, const GroupElem& like) {
  Parser p(text);
  if (like.kind() == GroupElem::Kind::permutation) return cycles_to_elem(like.degree(), p.parse_cycles_all(like.degree()));
  const IntRows rows = p.parse_matrix_all();
  if (rows.size() != like.degree() || rows[0].size() != like.degree())
    throw ParseError(1, 1, {std::to_string(like.degree()) + "x" + std::to_string(like.degree()) + " matrix"});
  return matrix_to_elem(rows, like.modulus());
}

}  // namespace msolv::dsl
