#include "aht/jet.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>

namespace aht {

namespace {

std::uint64_t encode(const MultiIndex& alpha, int base) {
  std::uint64_t key = 0;
  for (int a : alpha) key = key * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(a);
  return key;
}

// All multi-indices of total degree d in lexicographically descending order.
void enumerate_degree(int dim, int d, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == dim - 1) {
    cur[static_cast<std::size_t>(pos)] = d;
    out.push_back(cur);
    return;
  }
  for (int a = d; a >= 0; --a) {
    cur[static_cast<std::size_t>(pos)] = a;
    enumerate_degree(dim, d - a, pos + 1, cur, out);
  }
}

struct LayoutIndex {
  std::unordered_map<std::uint64_t, std::size_t> map;
};

}  // namespace

JetLayout::JetLayout(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || dim > 16) throw std::invalid_argument("jet dimension must be in [1,16]");
  if (degree < 0 || degree > 12) throw std::invalid_argument("jet degree must be in [0,12]");
  MultiIndex cur(static_cast<std::size_t>(dim), 0);
  for (int d = 0; d <= degree; ++d) {
    enumerate_degree(dim, d, 0, cur, monomials_);
    prefix_.push_back(monomials_.size());
  }
  const int base = degree + 1;
  std::unordered_map<std::uint64_t, std::size_t> lookup;
  lookup.reserve(monomials_.size() * 2);
  for (std::size_t k = 0; k < monomials_.size(); ++k) lookup[encode(monomials_[k], base)] = k;

  std::vector<int> total(monomials_.size());
  for (std::size_t k = 0; k < monomials_.size(); ++k) {
    int s = 0;
    for (int a : monomials_[k]) s += a;
    total[k] = s;
  }
  MultiIndex sum(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    for (std::size_t j = 0; j < monomials_.size(); ++j) {
      if (total[i] + total[j] > degree) continue;
      for (int q = 0; q < dim; ++q)
        sum[static_cast<std::size_t>(q)] = monomials_[i][static_cast<std::size_t>(q)] +
                                           monomials_[j][static_cast<std::size_t>(q)];
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(lookup.at(encode(sum, base)))});
    }
  }

  derivative_.resize(static_cast<std::size_t>(dim));
  if (degree >= 1) {
    const std::size_t lower = prefix_[static_cast<std::size_t>(degree - 1)];
    for (int i = 0; i < dim; ++i) {
      auto& table = derivative_[static_cast<std::size_t>(i)];
      table.reserve(lower);
      for (std::size_t k = 0; k < lower; ++k) {
        MultiIndex up = monomials_[k];
        up[static_cast<std::size_t>(i)] += 1;
        table.emplace_back(static_cast<std::uint32_t>(lookup.at(encode(up, base))),
                           static_cast<double>(up[static_cast<std::size_t>(i)]));
      }
    }
  }
}

std::size_t JetLayout::index_of(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) throw std::invalid_argument("multi-index has wrong length");
  int s = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("negative multi-index entry");
    s += a;
  }
  if (s > degree_) return npos;
  // Graded blocks are contiguous; search inside the block of total degree s.
  const std::size_t begin = s == 0 ? 0 : prefix_[static_cast<std::size_t>(s - 1)];
  const std::size_t end = prefix_[static_cast<std::size_t>(s)];
  for (std::size_t k = begin; k < end; ++k)
    if (monomials_[k] == alpha) return k;
  return npos;
}

std::shared_ptr<const JetLayout> JetLayout::get(int dim, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, degree}];
  if (!slot) slot = std::make_shared<const JetLayout>(dim, degree);
  return slot;
}

Jet::Jet(int dim, int degree, double value) : Jet(JetLayout::get(dim, degree), value) {}

Jet::Jet(std::shared_ptr<const JetLayout> layout, double value)
    : layout_(std::move(layout)), coeffs_(layout_->size(), 0.0) {
  coeffs_[0] = value;
}

Jet Jet::variable(int i, double value, int dim, int degree) {
  if (i < 0 || i >= dim) throw std::out_of_range("coordinate index out of range");
  Jet j(dim, degree, value);
  if (degree >= 1) j.coeffs_[1 + static_cast<std::size_t>(i)] = 1.0;
  return j;
}

double Jet::coeff(const MultiIndex& alpha) const {
  const std::size_t k = layout_->index_of(alpha);
  if (k == JetLayout::npos) throw std::out_of_range("multi-index exceeds jet degree");
  return coeffs_[k];
}

double Jet::partial(const MultiIndex& alpha) const {
  double fact = 1.0;
  for (int a : alpha)
    for (int q = 2; q <= a; ++q) fact *= q;
  return fact * coeff(alpha);
}

Jet Jet::derivative(int i) const {
  if (i < 0 || i >= dim()) throw std::out_of_range("coordinate index out of range");
  if (degree() == 0) throw std::invalid_argument("cannot differentiate a degree-0 jet");
  Jet out(JetLayout::get(dim(), degree() - 1));
  const auto& table = layout_->derivative_table(i);
  for (std::size_t k = 0; k < table.size(); ++k) out.coeffs_[k] = table[k].second * coeffs_[table[k].first];
  return out;
}

Jet Jet::truncate(int degree) const {
  if (degree > this->degree()) throw std::invalid_argument("cannot raise jet degree by truncation");
  if (degree == this->degree()) return *this;
  Jet out(JetLayout::get(dim(), degree));
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

void Jet::require_same(const Jet& o) const {
  if (layout_ != o.layout_) {
    throw std::invalid_argument("jet layout mismatch: (" + std::to_string(dim()) + "," +
                                std::to_string(degree()) + ") vs (" + std::to_string(o.dim()) + "," +
                                std::to_string(o.degree()) + ")");
  }
}

Jet& Jet::operator+=(const Jet& o) {
  require_same(o);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same(o);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

void Jet::add_product(const Jet& a, const Jet& b, double scale) {
  require_same(a);
  require_same(b);
  for (const auto& t : layout_->products()) coeffs_[t.out] += scale * a.coeffs_[t.lhs] * b.coeffs_[t.rhs];
}

Jet& Jet::operator*=(const Jet& o) {
  Jet r(layout_);
  r.coeffs_[0] = 0.0;
  r.add_product(*this, o);
  *this = std::move(r);
  return *this;
}

Jet& Jet::operator/=(const Jet& o) { return *this *= reciprocal(o); }

Jet& Jet::operator+=(double c) {
  coeffs_[0] += c;
  return *this;
}
Jet& Jet::operator-=(double c) {
  coeffs_[0] -= c;
  return *this;
}
Jet& Jet::operator*=(double c) {
  for (double& x : coeffs_) x *= c;
  return *this;
}
Jet& Jet::operator/=(double c) {
  for (double& x : coeffs_) x /= c;
  return *this;
}

Jet Jet::compose(std::span<const double> taylor) const {
  if (taylor.size() != static_cast<std::size_t>(degree()) + 1)
    throw std::invalid_argument("Taylor coefficient count must be degree + 1");
  Jet h = *this;
  h.coeffs_[0] = 0.0;
  Jet out(layout_, taylor[0]);
  Jet power = h;
  for (std::size_t k = 1; k < taylor.size(); ++k) {
    for (std::size_t q = 0; q < coeffs_.size(); ++q) out.coeffs_[q] += taylor[k] * power.coeffs_[q];
    if (k + 1 < taylor.size()) power *= h;
  }
  return out;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.layout());
  r.coeff_at(0) = 0.0;
  r.add_product(a, b);
  return r;
}
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a -= c; }
Jet operator-(double c, const Jet& a) { return -a + c; }
Jet operator*(Jet a, double c) { return a *= c; }
Jet operator*(double c, Jet a) { return a *= c; }
Jet operator/(Jet a, double c) { return a /= c; }
Jet operator/(double c, const Jet& a) { return reciprocal(a) * c; }

namespace {

std::vector<double> taylor_buffer(const Jet& a) { return std::vector<double>(static_cast<std::size_t>(a.degree()) + 1); }

}  // namespace

Jet sin(const Jet& a) {
  auto t = taylor_buffer(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  double fact = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    t[k] = cycle[k % 4] / fact;
  }
  return a.compose(t);
}

Jet cos(const Jet& a) {
  auto t = taylor_buffer(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  double fact = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    t[k] = cycle[k % 4] / fact;
  }
  return a.compose(t);
}

Jet exp(const Jet& a) {
  auto t = taylor_buffer(a);
  const double e = std::exp(a.value());
  double fact = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    t[k] = e / fact;
  }
  return a.compose(t);
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw JetDomainError("log of a non-positive value");
  auto t = taylor_buffer(a);
  t[0] = std::log(x);
  double xp = 1.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    xp *= x;
    t[k] = ((k % 2 == 1) ? 1.0 : -1.0) / (static_cast<double>(k) * xp);
  }
  return a.compose(t);
}

Jet pow(const Jet& a, double r) {
  const double x = a.value();
  if (!(x > 0.0)) throw JetDomainError("real power of a non-positive value");
  auto t = taylor_buffer(a);
  // binom(r, k) * x^(r-k)
  double binom = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) binom *= (r - static_cast<double>(k - 1)) / static_cast<double>(k);
    t[k] = binom * std::pow(x, r - static_cast<double>(k));
  }
  return a.compose(t);
}

Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0)) {
    if (a.degree() == 0 && a.value() == 0.0) return a;
    throw JetDomainError("sqrt of a non-positive value");
  }
  return pow(a, 0.5);
}

Jet reciprocal(const Jet& a) {
  const double x = a.value();
  if (x == 0.0) throw JetDomainError("division by a jet with zero value");
  auto t = taylor_buffer(a);
  double xp = x;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = ((k % 2 == 0) ? 1.0 : -1.0) / xp;
    xp *= x;
  }
  return a.compose(t);
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return reciprocal(pow(a, -k));
  Jet result(a.layout(), 1.0);
  Jet base = a;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k > 0) base *= base;
  }
  return result;
}

std::vector<Jet> coordinate_jets(std::span<const double> point, int degree) {
  const int dim = static_cast<int>(point.size());
  std::vector<Jet> xs;
  xs.reserve(point.size());
  for (int i = 0; i < dim; ++i) xs.push_back(Jet::variable(i, point[static_cast<std::size_t>(i)], dim, degree));
  return xs;
}

}  // namespace aht
