#pragma once

// Finite-dimensional Grassmann algebra with Berezin integration.
//
// Monomials are stored as bit sets over the generators psi_0 ... psi_{n-1};
// a set bit k means psi_k is present, and the monomial is always read in
// ascending generator order. Coefficients are complex.
//
// Integration convention: for a measure d psi_{o_1} ... d psi_{o_k} written
// to the right of the integrand,
//     int psi_{o_1} ... psi_{o_k} d psi_{o_1} ... d psi_{o_k} = 1,
// so int psi_0 ... psi_{n-1} d psi_0 ... d psi_{n-1} = 1 and every other
// ordering picks up the sign of the permutation relating it to this one.

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indexforge/errors.hpp"

namespace indexforge::grassmann {

using Scalar = std::complex<double>;
using Mask = std::uint32_t;

inline constexpr int kMaxGenerators = 16;

namespace detail {

/// Sign from sorting the word (monomial a)(monomial b) into ascending order,
/// assuming a and b share no generator: (-1)^{#pairs i in a, j in b, i > j}.
inline int merge_sign(Mask a, Mask b) {
  int swaps = 0;
  while (b != 0) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    const Mask above = a & ~((Mask{2} << j) - 1);
    swaps += std::popcount(above);
  }
  return (swaps & 1) ? -1 : 1;
}

}  // namespace detail

class GrassmannElement {
 public:
  using Terms = std::map<Mask, Scalar>;

  explicit GrassmannElement(int num_generators) : n_(num_generators) {
    if (n_ < 1 || n_ > kMaxGenerators) {
      throw CapacityError("Grassmann algebra supports 1.." + std::to_string(kMaxGenerators) +
                          " generators, got " + std::to_string(n_));
    }
  }

  static GrassmannElement scalar(int n, Scalar c) {
    GrassmannElement e(n);
    e.add_term(0, c);
    return e;
  }

  static GrassmannElement generator(int n, int index, Scalar c = 1.0) {
    return monomial(n, std::vector<int>{index}, c);
  }

  /// c * psi_{i_1} psi_{i_2} ... in the given (not necessarily sorted) order.
  static GrassmannElement monomial(int n, std::span<const int> indices, Scalar c = 1.0) {
    GrassmannElement e(n);
    Mask mask = 0;
    int sign = 1;
    for (int idx : indices) {
      e.check_generator(idx);
      const Mask bit = Mask{1} << idx;
      if (mask & bit) return e;  // psi^2 = 0
      sign *= detail::merge_sign(mask, bit);
      mask |= bit;
    }
    e.add_term(mask, static_cast<double>(sign) * c);
    return e;
  }
  static GrassmannElement monomial(int n, std::initializer_list<int> indices, Scalar c = 1.0) {
    std::vector<int> v(indices);
    return monomial(n, std::span<const int>(v), c);
  }

  int num_generators() const { return n_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Scalar coefficient(Mask m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar{} : it->second;
  }
  Scalar scalar_part() const { return coefficient(0); }

  /// True when every monomial has even degree.
  bool is_even() const {
    for (const auto& [m, c] : terms_) {
      if (std::popcount(m) & 1) return false;
    }
    return true;
  }

  /// Degree of a homogeneous element; -1 for zero or mixed degrees.
  int homogeneous_degree() const {
    int deg = -1;
    for (const auto& [m, c] : terms_) {
      const int d = std::popcount(m);
      if (deg >= 0 && d != deg) return -1;
      deg = d;
    }
    return deg;
  }

  GrassmannElement& operator+=(const GrassmannElement& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  GrassmannElement& operator-=(const GrassmannElement& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  GrassmannElement& operator*=(Scalar s) {
    if (s == Scalar{}) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
  friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }
  friend GrassmannElement operator*(GrassmannElement a, Scalar s) { return a *= s; }
  friend GrassmannElement operator*(Scalar s, GrassmannElement a) { return a *= s; }
  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b);

  friend bool operator==(const GrassmannElement& a, const GrassmannElement& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  void check_same(const GrassmannElement& o) const {
    if (o.n_ != n_) {
      throw DimensionError("Grassmann elements over " + std::to_string(n_) + " and " +
                           std::to_string(o.n_) + " generators cannot be combined");
    }
  }

  void check_generator(int idx) const {
    if (idx < 0 || idx >= n_) {
      throw ArgumentError("generator index " + std::to_string(idx) + " out of range for " +
                          std::to_string(n_) + " generators");
    }
  }

  /// Adds c to the coefficient of an already-canonical monomial.
  void add_term(Mask m, Scalar c) {
    if (c == Scalar{}) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Scalar{}) terms_.erase(it);
    }
  }

 private:
  int n_;
  Terms terms_;
};

/// Distributive product with anticommuting generators.
inline GrassmannElement gr_mul(const GrassmannElement& a, const GrassmannElement& b) {
  a.check_same(b);
  GrassmannElement out(a.num_generators());
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      out.add_term(ma | mb, static_cast<double>(detail::merge_sign(ma, mb)) * ca * cb);
    }
  }
  return out;
}

inline GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
  return gr_mul(a, b);
}

/// Exponential of an even element. The nilpotent part's series terminates
/// after at most n/2 + 1 terms; the scalar part is exponentiated separately.
inline GrassmannElement gr_exp(const GrassmannElement& x) {
  if (!x.is_even()) {
    throw ArgumentError("gr_exp requires an even element; odd exponents do not commute");
  }
  const int n = x.num_generators();
  const Scalar c0 = x.scalar_part();
  GrassmannElement nil = x - GrassmannElement::scalar(n, c0);

  GrassmannElement sum = GrassmannElement::scalar(n, 1.0);
  GrassmannElement power = GrassmannElement::scalar(n, 1.0);
  for (int k = 1; k <= n / 2 + 1; ++k) {
    power = gr_mul(power, nil) * Scalar(1.0 / k);
    if (power.is_zero()) break;
    sum += power;
  }
  return sum * std::exp(c0);
}

/// Integrates out the generators listed in `order` (measure written on the
/// right, in that order). Returns the reduced element over the remaining
/// generators; the generator count is kept.
inline GrassmannElement berezin_reduce(const GrassmannElement& f, std::span<const int> order) {
  Mask measure = 0;
  for (int idx : order) {
    f.check_generator(idx);
    const Mask bit = Mask{1} << idx;
    if (measure & bit) {
      throw ArgumentError("generator " + std::to_string(idx) + " repeated in integration order");
    }
    measure |= bit;
  }

  GrassmannElement out(f.num_generators());
  for (const auto& [m, c] : f.terms()) {
    if ((m & measure) != measure) continue;  // int d psi = 0
    const Mask rest = m & ~measure;
    // Rewrite psi_{m} = sign * psi_{rest} psi_{o_1} ... psi_{o_k}; the
    // trailing block then integrates to 1 against d psi_{o_1} ... d psi_{o_k}.
    int sign = detail::merge_sign(rest, measure);  // psi_rest * psi_sorted(measure)
    Mask sorted = 0;
    for (int idx : order) {  // psi_sorted(measure) -> psi_{o_1}...psi_{o_k}
      const Mask bit = Mask{1} << idx;
      sign *= detail::merge_sign(sorted, bit);
      sorted |= bit;
    }
    out.add_term(rest, static_cast<double>(sign) * c);
  }
  return out;
}

inline GrassmannElement berezin_reduce(const GrassmannElement& f, std::initializer_list<int> order) {
  std::vector<int> v(order);
  return berezin_reduce(f, std::span<const int>(v));
}

/// Full Berezin integral; `order` must cover every generator.
inline Scalar berezin_integrate(const GrassmannElement& f, std::span<const int> order) {
  if (static_cast<int>(order.size()) != f.num_generators()) {
    throw ArgumentError("berezin_integrate needs all " + std::to_string(f.num_generators()) +
                        " generators in the measure; use berezin_reduce for partial integration");
  }
  return berezin_reduce(f, order).scalar_part();
}

inline Scalar berezin_integrate(const GrassmannElement& f, std::initializer_list<int> order) {
  std::vector<int> v(order);
  return berezin_integrate(f, std::span<const int>(v));
}

inline constexpr int kMaxGaussianDim = 8;

/// int d psi~_1 d psi_1 ... d psi~_n d psi_n exp(psi~^T A psi) = det A.
///
/// psi~_a and psi_a are generators 2a and 2a+1, and the measure pairs them
/// as in the one-variable identity int d psi~ d psi exp(a psi~ psi) = a.
inline Scalar grassmann_gaussian(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw DimensionError("grassmann_gaussian needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n < 1 || n > kMaxGaussianDim) {
    throw CapacityError("grassmann_gaussian supports 1.." + std::to_string(kMaxGaussianDim) +
                        " dimensions, got " + std::to_string(n));
  }
  const int gens = 2 * n;
  GrassmannElement exponent(gens);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (a(i, j) == Scalar{}) continue;
      exponent += GrassmannElement::monomial(gens, {2 * i, 2 * j + 1}, a(i, j));
    }
  }
  std::vector<int> order(gens);
  for (int k = 0; k < gens; ++k) order[k] = k;
  return berezin_integrate(gr_exp(exponent), order);
}

inline Scalar grassmann_gaussian(const Eigen::MatrixXd& a) {
  return grassmann_gaussian(Eigen::MatrixXcd(a.cast<Scalar>()));
}

}  // namespace indexforge::grassmann
