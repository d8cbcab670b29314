#pragma once

// Exact linear algebra over Z/n and Z.
//
// Row-vector convention throughout: a matrix M acts by v |-> vM, so a
// "row span" is the set of Z/n-combinations of the rows of M and a kernel
// is the left kernel {v : vM = 0}.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "msolv/error.hpp"

namespace msolv {

using BigInt = boost::multiprecision::cpp_int;

namespace zmodlin {

using residue_t = std::int64_t;

/// Z/n with canonical representatives 0..n-1.
class ResidueRing {
 public:
  explicit ResidueRing(residue_t modulus) : n_(modulus) {
    if (modulus < 2) throw PreconditionViolated("residue ring modulus must be >= 2");
    if (modulus > (residue_t{1} << 31))
      throw PreconditionViolated("residue ring modulus must be < 2^31");
  }

  residue_t modulus() const noexcept { return n_; }

  residue_t reduce(residue_t a) const noexcept {
    a %= n_;
    return a < 0 ? a + n_ : a;
  }
  residue_t add(residue_t a, residue_t b) const noexcept { return reduce(a + b); }
  residue_t sub(residue_t a, residue_t b) const noexcept { return reduce(a - b); }
  residue_t neg(residue_t a) const noexcept { return reduce(-a); }
  residue_t mul(residue_t a, residue_t b) const noexcept { return reduce(a * b); }
  bool is_unit(residue_t a) const noexcept { return std::gcd(reduce(a), n_) == 1; }

  friend bool operator==(const ResidueRing&, const ResidueRing&) = default;

 private:
  residue_t n_;
};

struct Egcd {
  residue_t g, s, t;  // g = s*a + t*b
};

inline Egcd egcd(residue_t a, residue_t b) {
  residue_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    residue_t q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

/// A unit u of Z/n with a*u == gcd(a, n) (mod n).  a must be canonical and nonzero.
inline residue_t unit_normalizer(residue_t a, residue_t n) {
  residue_t g = std::gcd(a, n);
  residue_t a1 = a / g, n1 = n / g;
  residue_t u = n1 == 1 ? 1 : ((egcd(a1, n1).s % n1) + n1) % n1;
  while (std::gcd(u, n) != 1) u += n1;
  return u % n;
}

/// Dense matrix over Z/n.
class ModMatrix {
 public:
  ModMatrix(std::size_t rows, std::size_t cols, residue_t modulus)
      : ring_(modulus), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  ModMatrix(std::size_t rows, std::size_t cols, residue_t modulus, std::vector<residue_t> entries)
      : ring_(modulus), rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw DimensionMismatch("entry count != rows*cols");
    for (auto& x : data_) x = ring_.reduce(x);
  }

  static ModMatrix identity(std::size_t n, residue_t modulus) {
    ModMatrix m(n, n, modulus);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static ModMatrix from_rows(const std::vector<std::vector<residue_t>>& rows, std::size_t cols,
                             residue_t modulus) {
    ModMatrix m(rows.size(), cols, modulus);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw DimensionMismatch("ragged row list");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = m.ring_.reduce(rows[i][j]);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  residue_t modulus() const noexcept { return ring_.modulus(); }
  const ResidueRing& ring() const noexcept { return ring_; }

  residue_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  residue_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const residue_t> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<residue_t> row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }
  const std::vector<residue_t>& entries() const noexcept { return data_; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](residue_t x) { return x == 0; });
  }

  friend bool operator==(const ModMatrix&, const ModMatrix&) = default;

 private:
  ResidueRing ring_;
  std::size_t rows_, cols_;
  std::vector<residue_t> data_;
};

inline ModMatrix operator*(const ModMatrix& a, const ModMatrix& b) {
  if (a.cols() != b.rows() || a.modulus() != b.modulus())
    throw DimensionMismatch("matrix product shape or modulus mismatch");
  ModMatrix c(a.rows(), b.cols(), a.modulus());
  const residue_t n = a.modulus();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      residue_t x = a(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = (c(i, j) + x * b(k, j)) % n;
    }
  return c;
}

inline ModMatrix operator+(const ModMatrix& a, const ModMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.modulus() != b.modulus())
    throw DimensionMismatch("matrix sum shape or modulus mismatch");
  ModMatrix c(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = (a(i, j) + b(i, j)) % a.modulus();
  return c;
}

inline ModMatrix operator-(const ModMatrix& a, const ModMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.modulus() != b.modulus())
    throw DimensionMismatch("matrix difference shape or modulus mismatch");
  ModMatrix c(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a.ring().sub(a(i, j), b(i, j));
  return c;
}

inline ModMatrix scale(const ModMatrix& a, residue_t c) {
  ModMatrix out(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a.ring().mul(a(i, j), c);
  return out;
}

/// v * M for a row vector v.
inline std::vector<residue_t> row_times(std::span<const residue_t> v, const ModMatrix& m) {
  if (v.size() != m.rows()) throw DimensionMismatch("row vector length != matrix rows");
  std::vector<residue_t> out(m.cols(), 0);
  const residue_t n = m.modulus();
  for (std::size_t i = 0; i < v.size(); ++i) {
    residue_t x = ((v[i] % n) + n) % n;
    if (x == 0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] = (out[j] + x * m(i, j)) % n;
  }
  return out;
}

/// Stack rows of a on top of rows of b.
inline ModMatrix vstack(const ModMatrix& a, const ModMatrix& b) {
  if (a.cols() != b.cols() || a.modulus() != b.modulus())
    throw DimensionMismatch("vstack shape mismatch");
  std::vector<residue_t> e = a.entries();
  e.insert(e.end(), b.entries().begin(), b.entries().end());
  return ModMatrix(a.rows() + b.rows(), a.cols(), a.modulus(), std::move(e));
}

/// [a | b]
inline ModMatrix hstack(const ModMatrix& a, const ModMatrix& b) {
  if (a.rows() != b.rows() || a.modulus() != b.modulus())
    throw DimensionMismatch("hstack shape mismatch");
  ModMatrix c(a.rows(), a.cols() + b.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

/// Howell normal form H of M together with a transform T such that H = T*M.
///
/// H is echelon; every pivot divides n; entries above a pivot p lie in
/// [0, p); and the Howell property holds: the elements of the span whose
/// first j entries vanish are spanned by the rows whose pivot column is
/// >= j.  Two matrices have the same row span iff their forms are equal.
struct HowellForm {
  ModMatrix matrix;
  ModMatrix transform;
  std::vector<std::size_t> pivot_cols;
};

namespace detail {

using Row = std::vector<residue_t>;

inline void axpy(Row& dst, const Row& src, residue_t c, residue_t n) {
  if (c == 0) return;
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (dst[k] + c * src[k]) % n;
}

inline bool all_zero(const Row& r) {
  return std::all_of(r.begin(), r.end(), [](residue_t x) { return x == 0; });
}

}  // namespace detail

inline HowellForm howell_form(const ModMatrix& m) {
  using detail::Row;
  const residue_t n = m.modulus();
  const std::size_t cols = m.cols();
  std::vector<Row> a, t;
  a.reserve(m.rows() + cols);
  t.reserve(m.rows() + cols);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    a.push_back(m.row_vector(i));
    Row e(m.rows(), 0);
    e[i] = 1;
    t.push_back(std::move(e));
  }

  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t j = 0; j < cols && r < a.size(); ++j) {
    // Concentrate column j of rows r.. into row r with unimodular 2x2 steps.
    for (std::size_t i = r + 1; i < a.size(); ++i) {
      if (a[i][j] == 0) continue;
      if (a[r][j] == 0) {
        std::swap(a[r], a[i]);
        std::swap(t[r], t[i]);
        continue;
      }
      const residue_t x = a[r][j], y = a[i][j];
      const auto [g, s, u] = egcd(x, y);
      const residue_t yg = y / g, xg = x / g;
      Row ar(cols), ai(cols), tr(t[r].size()), ti(t[r].size());
      for (std::size_t k = 0; k < cols; ++k) {
        ar[k] = ((s * a[r][k] + u * a[i][k]) % n + n) % n;
        ai[k] = ((yg * a[r][k] - xg * a[i][k]) % n + n) % n;
      }
      for (std::size_t k = 0; k < tr.size(); ++k) {
        tr[k] = ((s * t[r][k] + u * t[i][k]) % n + n) % n;
        ti[k] = ((yg * t[r][k] - xg * t[i][k]) % n + n) % n;
      }
      a[r] = std::move(ar);
      a[i] = std::move(ai);
      t[r] = std::move(tr);
      t[i] = std::move(ti);
    }
    if (a[r][j] == 0) continue;

    const residue_t unit = unit_normalizer(a[r][j], n);
    for (auto& x : a[r]) x = (x * unit) % n;
    for (auto& x : t[r]) x = (x * unit) % n;
    const residue_t p = a[r][j];

    for (std::size_t i = 0; i < r; ++i) {
      const residue_t q = a[i][j] / p;
      detail::axpy(a[i], a[r], n - q % n, n);
      detail::axpy(t[i], t[r], n - q % n, n);
    }

    // The annihilator multiple keeps the Howell property for later columns.
    const residue_t ann = n / p;
    if (ann != n) {
      Row extra(cols), textra(t[r].size());
      for (std::size_t k = 0; k < cols; ++k) extra[k] = (a[r][k] * ann) % n;
      for (std::size_t k = 0; k < textra.size(); ++k) textra[k] = (t[r][k] * ann) % n;
      if (!detail::all_zero(extra)) {
        a.push_back(std::move(extra));
        t.push_back(std::move(textra));
      }
    }
    pivots.push_back(j);
    ++r;
  }

  ModMatrix h(r, cols, n);
  ModMatrix tr(r, m.rows(), n);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < cols; ++k) h(i, k) = a[i][k];
    for (std::size_t k = 0; k < m.rows(); ++k) tr(i, k) = t[i][k];
  }
  return {std::move(h), std::move(tr), std::move(pivots)};
}

/// Number of elements of the row span of a Howell form: prod n / pivot.
inline BigInt span_size(const HowellForm& hf) {
  BigInt size = 1;
  const residue_t n = hf.matrix.modulus();
  for (std::size_t i = 0; i < hf.matrix.rows(); ++i)
    size *= n / hf.matrix(i, hf.pivot_cols[i]);
  return size;
}

/// Greedy reduction of v against a Howell form.  Returns the coefficient
/// vector c with c*H = v, or nothing when v is outside the span.
inline std::optional<std::vector<residue_t>> reduce_against(const HowellForm& hf,
                                                            std::span<const residue_t> v) {
  const ModMatrix& h = hf.matrix;
  if (v.size() != h.cols()) throw DimensionMismatch("vector length != matrix cols");
  const residue_t n = h.modulus();
  std::vector<residue_t> rest(v.begin(), v.end());
  for (auto& x : rest) x = ((x % n) + n) % n;
  std::vector<residue_t> coeff(h.rows(), 0);
  std::size_t row = 0;
  for (std::size_t j = 0; j < h.cols(); ++j) {
    while (row < h.rows() && hf.pivot_cols[row] < j) ++row;
    if (rest[j] == 0) continue;
    if (row >= h.rows() || hf.pivot_cols[row] != j) return std::nullopt;
    const residue_t p = h(row, j);
    if (rest[j] % p != 0) return std::nullopt;
    const residue_t q = rest[j] / p;
    coeff[row] = q;
    for (std::size_t k = j; k < h.cols(); ++k) rest[k] = ((rest[k] - q * h(row, k)) % n + n) % n;
  }
  return coeff;
}

inline bool in_row_span(const HowellForm& hf, std::span<const residue_t> v) {
  return reduce_against(hf, v).has_value();
}

inline bool same_row_span(const ModMatrix& a, const ModMatrix& b) {
  return howell_form(a).matrix == howell_form(b).matrix;
}

/// Rows generating {v : vM = 0}.  An empty (0 x rows) matrix means the kernel is {0}.
inline ModMatrix kernel_basis(const ModMatrix& m) {
  const ModMatrix aug = hstack(m, ModMatrix::identity(m.rows(), m.modulus()));
  const HowellForm hf = howell_form(aug);
  std::vector<std::vector<residue_t>> rows;
  for (std::size_t i = 0; i < hf.matrix.rows(); ++i) {
    if (hf.pivot_cols[i] < m.cols()) continue;
    auto r = hf.matrix.row(i);
    rows.emplace_back(r.begin() + static_cast<std::ptrdiff_t>(m.cols()), r.end());
  }
  return ModMatrix::from_rows(rows, m.rows(), m.modulus());
}

struct SolveResult {
  bool feasible = false;
  std::vector<residue_t> solution;  // x with xM = b, when feasible
  ModMatrix kernel;                 // full solution set is solution + rowspan(kernel)
};

/// Solve xM = b.
inline SolveResult solve_linear(const ModMatrix& m, std::span<const residue_t> b) {
  if (b.size() != m.cols())
    throw DimensionMismatch("right-hand side length " + std::to_string(b.size()) +
                            " != matrix cols " + std::to_string(m.cols()));
  const HowellForm hf = howell_form(m);
  SolveResult out{false, {}, kernel_basis(m)};
  auto coeff = reduce_against(hf, b);
  if (!coeff) return out;
  out.feasible = true;
  out.solution = row_times(*coeff, hf.transform);
  return out;
}

/// Inverse of a square matrix over Z/n, if it exists.
inline std::optional<ModMatrix> inverse(const ModMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("inverse of a non-square matrix");
  const std::size_t d = m.rows();
  const HowellForm hf = howell_form(hstack(m, ModMatrix::identity(d, m.modulus())));
  if (hf.matrix.rows() < d) return std::nullopt;
  ModMatrix inv(d, d, m.modulus());
  for (std::size_t i = 0; i < d; ++i) {
    if (hf.pivot_cols[i] != i || hf.matrix(i, i) != 1) return std::nullopt;
    for (std::size_t j = 0; j < d; ++j) {
      if (j != i && hf.matrix(i, j) != 0) return std::nullopt;
      inv(i, j) = hf.matrix(i, d + j);
    }
  }
  return inv;
}

/// Generator of ker(multiplication by ntilde on Z/l^sigma): l^(sigma - min(ord_l(ntilde), sigma)).
/// A returned value equal to l^sigma means the kernel is trivial.
inline residue_t scalar_kernel(residue_t ntilde, residue_t prime, int sigma) {
  if (sigma < 1) throw PreconditionViolated("sigma must be >= 1");
  if (ntilde == 0) throw PreconditionViolated("ntilde must be nonzero");
  if (prime < 2) throw PreconditionViolated("l must be prime");
  int ord = 0;
  for (residue_t x = ntilde < 0 ? -ntilde : ntilde; x % prime == 0; x /= prime) ++ord;
  residue_t g = 1;
  for (int i = 0; i < sigma - std::min(ord, sigma); ++i) g *= prime;
  return g;
}

/// l-adic valuation of a nonzero integer.
inline int valuation(residue_t x, residue_t prime) {
  if (x == 0) throw PreconditionViolated("valuation of zero");
  int ord = 0;
  for (x = x < 0 ? -x : x; x % prime == 0; x /= prime) ++ord;
  return ord;
}

// ---------------------------------------------------------------------------
// Integer matrices

/// Dense integer matrix (arbitrary precision).
struct IntMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<BigInt> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

  static IntMatrix from_rows(const std::vector<std::vector<long long>>& rs, std::size_t c) {
    IntMatrix m(rs.size(), c);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i].size() != c) throw DimensionMismatch("ragged integer matrix");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rs[i][j];
    }
    return m;
  }

  BigInt& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline constexpr std::size_t kMaxSmithDimension = 64;

struct SmithForm {
  std::vector<BigInt> invariant_factors;  // nonzero diagonal, d1 | d2 | ...
  std::size_t rows = 0, cols = 0;

  std::size_t rank() const noexcept { return invariant_factors.size(); }
  /// Free rank of the cokernel Z^cols / rowspan.
  std::size_t free_rank() const noexcept { return cols - rank(); }
  /// Invariant factors > 1 (the torsion of the cokernel).
  std::vector<BigInt> torsion() const {
    std::vector<BigInt> out;
    for (const auto& d : invariant_factors)
      if (d > 1) out.push_back(d);
    return out;
  }
};

inline SmithForm smith_normal_form_int(IntMatrix a) {
  if (a.rows > kMaxSmithDimension || a.cols > kMaxSmithDimension)
    throw TooLarge("integer Smith form is limited to 64 rows/cols");
  const std::size_t m = a.rows, n = a.cols;
  auto swap_rows = [&](std::size_t i, std::size_t k) {
    for (std::size_t j = 0; j < n; ++j) std::swap(a(i, j), a(k, j));
  };
  auto swap_cols = [&](std::size_t j, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) std::swap(a(i, j), a(i, k));
  };

  std::size_t t = 0;
  for (; t < std::min(m, n); ++t) {
    // Smallest nonzero entry of the trailing block becomes the pivot.
    for (;;) {
      std::size_t bi = m, bj = n;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (a(i, j) != 0 && (bi == m || abs(a(i, j)) < abs(a(bi, bj)))) {
            bi = i;
            bj = j;
          }
      if (bi == m) break;
      swap_rows(t, bi);
      swap_cols(t, bj);

      bool dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a(i, t) == 0) continue;
        BigInt q = a(i, t) / a(t, t);
        for (std::size_t j = t; j < n; ++j) a(i, j) -= q * a(t, j);
        if (a(i, t) != 0) dirty = true;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a(t, j) == 0) continue;
        BigInt q = a(t, j) / a(t, t);
        for (std::size_t i = t; i < m; ++i) a(i, j) -= q * a(i, t);
        if (a(t, j) != 0) dirty = true;
      }
      if (dirty) continue;

      // Enforce divisibility against the rest of the block.
      bool fixed = false;
      for (std::size_t i = t + 1; i < m && !fixed; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (a(i, j) % a(t, t) != 0) {
            for (std::size_t k = t; k < n; ++k) a(t, k) += a(i, k);
            fixed = true;
            break;
          }
      if (!fixed) break;
    }
    if (a(t, t) == 0) break;
  }

  SmithForm out;
  out.rows = m;
  out.cols = n;
  for (std::size_t i = 0; i < std::min(m, n); ++i)
    if (a(i, i) != 0) out.invariant_factors.push_back(abs(a(i, i)));
  return out;
}

/// Echelon basis (over Z) of the lattice spanned by the given integer rows.
/// Keeps at most `cols` rows; used to pre-reduce large relation sets.
inline std::vector<std::vector<BigInt>> integer_row_basis(std::vector<std::vector<BigInt>> rows,
                                                          std::size_t cols) {
  std::size_t r = 0;
  for (std::size_t j = 0; j < cols && r < rows.size(); ++j) {
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i)
        if (rows[i][j] != 0 && (best == rows.size() || abs(rows[i][j]) < abs(rows[best][j])))
          best = i;
      if (best == rows.size()) break;
      std::swap(rows[r], rows[best]);
      bool done = true;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][j] == 0) continue;
        BigInt q = rows[i][j] / rows[r][j];
        for (std::size_t k = j; k < cols; ++k) rows[i][k] -= q * rows[r][k];
        if (rows[i][j] != 0) done = false;
      }
      if (done) break;
    }
    if (rows[r][j] != 0) ++r;
  }
  rows.resize(r);
  return rows;
}

}  // namespace zmodlin
}  // namespace msolv
