#pragma once

// Free-group words and Fox derivatives evaluated in a finite group ring.

#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msolv/error.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/grpring.hpp"
#include "msolv/rng.hpp"

namespace msolv::foxcalc {

using fingroup::FiniteGroup;
using fingroup::Index;
using grpring::GroupRing;
using grpring::RingElem;
using zmodlin::residue_t;

inline constexpr std::size_t kMaxWordLength = 10'000;

struct Letter {
  int gen;  // 1-based
  int exp;  // +1 or -1
  friend bool operator==(const Letter&, const Letter&) = default;
};

/// A freely reduced word in x_1..x_r.
class FreeWord {
 public:
  explicit FreeWord(int rank = 0) : rank_(rank) {}

  int rank() const noexcept { return rank_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  const std::vector<Letter>& letters() const noexcept { return letters_; }

  friend bool operator==(const FreeWord&, const FreeWord&) = default;

  /// Append with cancellation; the word stays reduced.
  void push(Letter l) {
    if (l.gen < 1 || l.gen > rank_) throw BadGeneratorIndex("generator x" + std::to_string(l.gen) +
                                                            " outside rank " + std::to_string(rank_));
    if (l.exp != 1 && l.exp != -1) throw PreconditionViolated("letter exponent must be +1 or -1");
    if (!letters_.empty() && letters_.back().gen == l.gen && letters_.back().exp == -l.exp) {
      letters_.pop_back();
      return;
    }
    if (letters_.size() >= kMaxWordLength) throw WordTooLong("word exceeds 10000 letters");
    letters_.push_back(l);
  }

  std::string to_string() const {
    if (letters_.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < letters_.size();) {
      std::size_t j = i;
      while (j < letters_.size() && letters_[j] == letters_[i]) ++j;
      if (!out.empty()) out += ' ';
      out += "x" + std::to_string(letters_[i].gen);
      const long long e = static_cast<long long>(j - i) * letters_[i].exp;
      if (e != 1) out += "^" + std::to_string(e);
      i = j;
    }
    return out;
  }

 private:
  int rank_;
  std::vector<Letter> letters_;
};

/// Free reduction of a raw letter list; exponents other than +-1 expand to repeated letters.
inline FreeWord reduce_word(std::span<const Letter> raw, int rank) {
  FreeWord w(rank);
  for (const Letter& l : raw) {
    if (l.exp == 0) continue;
    const int step = l.exp > 0 ? 1 : -1;
    for (int k = 0; k != l.exp; k += step) w.push({l.gen, step});
  }
  return w;
}

inline FreeWord generator_word(int i, int rank) {
  FreeWord w(rank);
  w.push({i, 1});
  return w;
}

inline FreeWord operator*(const FreeWord& a, const FreeWord& b) {
  if (a.rank() != b.rank()) throw DimensionMismatch("words over different ranks");
  FreeWord w = a;
  for (const Letter& l : b.letters()) w.push(l);
  return w;
}

inline FreeWord inverse(const FreeWord& a) {
  FreeWord w(a.rank());
  for (auto it = a.letters().rbegin(); it != a.letters().rend(); ++it) w.push({it->gen, -it->exp});
  return w;
}

/// u v u^-1 v^-1.
inline FreeWord commutator_word(const FreeWord& u, const FreeWord& v) { return u * v * inverse(u) * inverse(v); }

/// Parse `x1 x2^-1 x1^3`; `1` or blank is the empty word.
inline FreeWord parse_word(std::string_view text, int rank, std::size_t line = 1, std::size_t col0 = 1) {
  FreeWord w(rank);
  std::size_t i = 0;
  auto col = [&] { return col0 + i; };
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto number = [&](bool allow_sign) -> long long {
    bool neg = false;
    if (allow_sign && i < text.size() && (text[i] == '-' || text[i] == '+')) neg = text[i++] == '-';
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
      throw ParseError(line, col(), {"integer"});
    long long v = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      v = v * 10 + (text[i++] - '0');
      if (v > static_cast<long long>(kMaxWordLength)) throw WordTooLong("exponent exceeds word length cap");
    }
    return neg ? -v : v;
  };
  skip();
  if (i < text.size() && text[i] == '1') {
    ++i;
    skip();
    if (i != text.size()) throw ParseError(line, col(), {"end of word"});
    return w;
  }
  while (i < text.size()) {
    if (text[i] != 'x') throw ParseError(line, col(), {"x<index>"});
    ++i;
    const std::size_t gcol = col();
    const long long g = number(false);
    if (g < 1 || g > rank) throw ParseError(line, gcol, {"generator index in 1.." + std::to_string(rank)});
    long long e = 1;
    skip();
    if (i < text.size() && text[i] == '^') {
      ++i;
      skip();
      e = number(true);
    }
    const int step = e > 0 ? 1 : -1;
    for (long long k = 0; k != e; k += step) w.push({static_cast<int>(g), step});
    skip();
  }
  return w;
}

inline FreeWord random_word(int rank, std::size_t length, Rng& rng) {
  FreeWord w(rank);
  if (rank < 1 && length > 0) throw PreconditionViolated("random word over rank 0");
  while (w.length() < length) {
    Letter l{static_cast<int>(rng.below(static_cast<std::uint64_t>(rank))) + 1, rng.below(2) ? 1 : -1};
    if (!w.empty() && w.letters().back().gen == l.gen && w.letters().back().exp == -l.exp) continue;
    w.push(l);
  }
  return w;
}

/// Every reduced word of exactly `length` letters over rank r, in lexicographic order.
inline std::vector<FreeWord> all_reduced_words(int rank, std::size_t length) {
  std::vector<FreeWord> out{FreeWord(rank)};
  for (std::size_t step = 0; step < length; ++step) {
    std::vector<FreeWord> next;
    for (const auto& w : out)
      for (int g = 1; g <= rank; ++g)
        for (int e : {1, -1}) {
          if (!w.empty() && w.letters().back().gen == g && w.letters().back().exp == -e) continue;
          FreeWord v = w;
          v.push({g, e});
          next.push_back(std::move(v));
        }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quotient context

/// pi: F_r -> Q together with the ring (Z/n)[Q].
class QuotientContext {
 public:
  QuotientContext(FiniteGroup q, std::vector<Index> images, residue_t modulus)
      : ring_(q, modulus), images_(std::move(images)) {
    for (Index g : images_)
      if (g >= q.order()) throw IndexOutOfRange("generator image outside Q");
    if (fingroup::generate(q, images_).order() != q.order())
      throw PreconditionViolated("generator images do not generate Q");
  }

  int rank() const noexcept { return static_cast<int>(images_.size()); }
  const FiniteGroup& group() const noexcept { return ring_.group(); }
  const GroupRing& ring() const noexcept { return ring_; }
  const std::vector<Index>& images() const noexcept { return images_; }
  Index image(int i) const { return images_[static_cast<std::size_t>(i - 1)]; }

  Index evaluate(const FreeWord& w) const {
    check(w);
    Index p = FiniteGroup::identity();
    for (const Letter& l : w.letters())
      p = group().mul(p, l.exp > 0 ? image(l.gen) : group().inv(image(l.gen)));
    return p;
  }

  void check(const FreeWord& w) const {
    if (w.rank() != rank()) throw DimensionMismatch("word rank differs from context rank");
  }

 private:
  GroupRing ring_;
  std::vector<Index> images_;
};

/// pi(d_i w), scanning left to right with the prefix image:
/// x_i contributes +prefix, x_i^-1 contributes -(prefix * x_i^-1).
inline RingElem fox_derivative(const QuotientContext& ctx, const FreeWord& w, int i) {
  ctx.check(w);
  if (i < 1 || i > ctx.rank()) throw IndexOutOfRange("Fox derivative index out of range");
  const FiniteGroup& q = ctx.group();
  const residue_t n = ctx.ring().modulus();
  std::vector<residue_t> c(q.order(), 0);
  Index p = FiniteGroup::identity();
  for (const Letter& l : w.letters()) {
    if (l.exp > 0) {
      if (l.gen == i) c[p] = (c[p] + 1) % n;
      p = q.mul(p, ctx.image(l.gen));
    } else {
      p = q.mul(p, q.inv(ctx.image(l.gen)));
      if (l.gen == i) c[p] = (c[p] + n - 1) % n;
    }
  }
  return ctx.ring().from_coeffs(std::move(c));
}

/// All r derivatives in one pass.
inline std::vector<RingElem> fox_row(const QuotientContext& ctx, const FreeWord& w) {
  ctx.check(w);
  const FiniteGroup& q = ctx.group();
  const residue_t n = ctx.ring().modulus();
  std::vector<std::vector<residue_t>> c(static_cast<std::size_t>(ctx.rank()), std::vector<residue_t>(q.order(), 0));
  Index p = FiniteGroup::identity();
  for (const Letter& l : w.letters()) {
    auto& row = c[static_cast<std::size_t>(l.gen - 1)];
    if (l.exp > 0) {
      row[p] = (row[p] + 1) % n;
      p = q.mul(p, ctx.image(l.gen));
    } else {
      p = q.mul(p, q.inv(ctx.image(l.gen)));
      row[p] = (row[p] + n - 1) % n;
    }
  }
  std::vector<RingElem> out;
  for (auto& v : c) out.push_back(ctx.ring().from_coeffs(std::move(v)));
  return out;
}

/// fox_row flattened to r*|Q| residues (component i occupies block i-1).
inline std::vector<residue_t> fox_row_flat(const QuotientContext& ctx, const FreeWord& w) {
  std::vector<residue_t> out;
  for (const auto& e : fox_row(ctx, w)) out.insert(out.end(), e.coeffs().begin(), e.coeffs().end());
  return out;
}

struct ExpansionReport {
  bool pass = false;
  std::vector<residue_t> lhs;  // pi(w)
  std::vector<residue_t> rhs;  // 1 + sum_i pi(d_i w)(pi(x_i) - 1)
};

inline ExpansionReport expansion_check(const QuotientContext& ctx, const FreeWord& w) {
  const GroupRing& r = ctx.ring();
  RingElem rhs = r.one();
  const auto row = fox_row(ctx, w);
  for (int i = 1; i <= ctx.rank(); ++i)
    rhs = rhs + row[static_cast<std::size_t>(i - 1)] * (r.embed(ctx.image(i)) - r.one());
  const RingElem lhs = r.embed(ctx.evaluate(w));
  return {lhs == rhs, lhs.coeffs(), rhs.coeffs()};
}

}  // namespace msolv::foxcalc
