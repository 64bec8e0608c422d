#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace aht {

/// Raised when a jet operation leaves the domain of the underlying function
/// (division by a jet with zero value, log or sqrt of a non-positive value).
class JetDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using MultiIndex = std::vector<int>;

/// Monomial bookkeeping shared by all jets of one (dim, degree) pair.
/// Monomials are stored in graded-lexicographic order, so the jets of
/// degree k < K are exactly the first size(k) coefficients.
class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& monomial(std::size_t k) const { return monomials_[k]; }
  /// Position of a multi-index, or npos when |alpha| > degree.
  std::size_t index_of(const MultiIndex& alpha) const;
  /// Number of monomials with total degree <= k.
  std::size_t prefix_size(int k) const { return prefix_[static_cast<std::size_t>(k)]; }

  struct ProductTerm {
    std::uint32_t lhs, rhs, out;
  };
  const std::vector<ProductTerm>& products() const { return products_; }

  /// For d/dx_i: entries (source index, factor) aligned with the monomials
  /// of the degree-1-lower layout.
  const std::vector<std::pair<std::uint32_t, double>>& derivative_table(int i) const {
    return derivative_[static_cast<std::size_t>(i)];
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  JetLayout(int dim, int degree);

 private:
  int dim_;
  int degree_;
  std::vector<MultiIndex> monomials_;
  std::vector<std::size_t> prefix_;
  std::vector<ProductTerm> products_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> derivative_;
};

/// Truncated Taylor expansion of a scalar function at a base point.
/// coeffs[alpha] = (d^alpha f)(p) / alpha!
class Jet {
 public:
  Jet() = default;
  Jet(int dim, int degree, double value = 0.0);
  explicit Jet(std::shared_ptr<const JetLayout> layout, double value = 0.0);

  static Jet variable(int i, double value, int dim, int degree);

  int dim() const { return layout_->dim(); }
  int degree() const { return layout_->degree(); }
  const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
  std::size_t size() const { return coeffs_.size(); }

  double value() const { return coeffs_[0]; }
  double coeff(const MultiIndex& alpha) const;
  double& coeff_at(std::size_t k) { return coeffs_[k]; }
  double coeff_at(std::size_t k) const { return coeffs_[k]; }
  std::span<const double> coeffs() const { return coeffs_; }

  /// alpha! * coeff(alpha), i.e. the partial derivative at the base point.
  double partial(const MultiIndex& alpha) const;

  /// d/dx_i as a jet of degree K-1 (the only derivative that stays exact).
  Jet derivative(int i) const;
  Jet truncate(int degree) const;

  /// sum_k taylor[k] * (f - f(p))^k; taylor.size() must be degree + 1.
  Jet compose(std::span<const double> taylor) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double c);
  Jet& operator-=(double c);
  Jet& operator*=(double c);
  Jet& operator/=(double c);

  /// Adds a*b into *this without a temporary.
  void add_product(const Jet& a, const Jet& b, double scale = 1.0);

 private:
  void require_same(const Jet& o) const;

  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(Jet a);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(Jet a, double c);
Jet operator*(double c, Jet a);
Jet operator/(Jet a, double c);
Jet operator/(double c, const Jet& a);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
Jet pow(const Jet& a, int k);
Jet pow(const Jet& a, double r);

inline Jet jet_variable(int i, double value, int dim, int degree) {
  return Jet::variable(i, value, dim, degree);
}

inline double extract_partial(const Jet& j, const MultiIndex& alpha) { return j.partial(alpha); }

/// Helpers so templates can treat double and Jet alike.
inline double scalar_like(double, double c) { return c; }
inline Jet scalar_like(const Jet& like, double c) { return Jet(like.layout(), c); }
inline double value_of(double x) { return x; }
inline double value_of(const Jet& j) { return j.value(); }

/// Coordinate jets x_0..x_{dim-1} centred at a point.
std::vector<Jet> coordinate_jets(std::span<const double> point, int degree);

}  // namespace aht
