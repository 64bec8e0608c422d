#include "aht/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aht {

namespace {

std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

JetTensor::JetTensor(int dim, std::vector<Variance> slots, int degree)
    : dim_(dim), degree_(degree), slots_(std::move(slots)) {
  entries_.assign(ipow(dim, static_cast<int>(slots_.size())), Jet(dim, degree, 0.0));
}

std::size_t JetTensor::stride(int slot) const { return ipow(dim_, rank() - 1 - slot); }

Jet& JetTensor::at(std::initializer_list<int> idx) {
  std::size_t off = 0;
  for (int k : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k);
  return entries_.at(off);
}

const Jet& JetTensor::at(std::initializer_list<int> idx) const {
  std::size_t off = 0;
  for (int k : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k);
  return entries_.at(off);
}

JetTensor JetTensor::truncate(int degree) const {
  if (degree == degree_) return *this;
  JetTensor out(dim_, slots_, degree);
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k].truncate(degree);
  return out;
}

PointTensor JetTensor::value() const {
  PointTensor out(dim_, slots_);
  for (std::size_t k = 0; k < entries_.size(); ++k) out[k] = entries_[k].value();
  return out;
}

JetTensor MetricField::as_tensor(std::span<const Jet> x) const {
  const auto g = jets(x);
  const int degree = x.empty() ? 0 : x[0].degree();
  JetTensor t(dim, {Variance::Down, Variance::Down}, degree);
  if (g.size() != static_cast<std::size_t>(dim * dim)) throw std::logic_error("metric evaluator returned wrong size");
  for (std::size_t k = 0; k < g.size(); ++k) t[k] = g[k];
  return t;
}

std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& m, int n) {
  std::vector<Jet> a = m;
  const auto& layout = m.at(0).layout();
  std::vector<Jet> inv(static_cast<std::size_t>(n * n), Jet(layout, 0.0));
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = Jet(layout, 1.0);
  auto A = [&](int r, int c) -> Jet& { return a[static_cast<std::size_t>(r * n + c)]; };
  auto I = [&](int r, int c) -> Jet& { return inv[static_cast<std::size_t>(r * n + c)]; };
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A(r, col).value()) > std::abs(A(pivot, col).value())) pivot = r;
    if (A(pivot, col).value() == 0.0) throw std::domain_error("singular jet matrix");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(A(col, c), A(pivot, c));
        std::swap(I(col, c), I(pivot, c));
      }
    const Jet r = reciprocal(A(col, col));
    for (int c = 0; c < n; ++c) {
      A(col, c) = A(col, c) * r;
      I(col, c) = I(col, c) * r;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const Jet f = A(row, col);
      for (int c = 0; c < n; ++c) {
        A(row, c).add_product(f, A(col, c), -1.0);
        I(row, c).add_product(f, I(col, c), -1.0);
      }
    }
  }
  return inv;
}

LocalChart::LocalChart(const MetricField& g, std::span<const double> point, int degree)
    : dim_(g.dim), degree_(degree), point_(point.begin(), point.end()) {
  if (static_cast<int>(point.size()) != dim_) throw std::invalid_argument("point dimension mismatch");
  if (degree < 1) throw std::invalid_argument("Levi-Civita data needs jet degree >= 1");
  coords_ = coordinate_jets(point, degree);
  metric_ = g.as_tensor(coords_);
  const int n = dim_;
  metric_value_ = metric_.value().as_matrix();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const Jet diff = metric_.at({i, j}) - metric_.at({j, i});
      for (double c : diff.coeffs())
        if (std::abs(c) > 1e-12 * (1.0 + metric_value_.cwiseAbs().maxCoeff()))
          throw std::domain_error("metric jets are not symmetric");
    }
  frame_ = FramePack(point_, metric_value_);

  std::vector<Jet> flat(metric_.size());
  for (std::size_t k = 0; k < flat.size(); ++k) flat[k] = metric_[k];
  const auto inv = invert_jet_matrix(flat, n);
  inverse_ = JetTensor(n, {Variance::Up, Variance::Up}, degree);
  for (std::size_t k = 0; k < inv.size(); ++k) inverse_[k] = inv[k];

  // Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Jet> dg(ipow(n, 3));  // dg[(l*n + i)*n + j] = d_l g_ij
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dg[static_cast<std::size_t>((l * n + i) * n + j)] = metric_.at({i, j}).derivative(l);
  auto DG = [&](int l, int i, int j) -> const Jet& { return dg[static_cast<std::size_t>((l * n + i) * n + j)]; };
  const JetTensor ginv = inverse_.truncate(degree - 1);
  gamma_ = JetTensor(n, {Variance::Up, Variance::Down, Variance::Down}, degree - 1);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::vector<Jet> first(static_cast<std::size_t>(n));
      for (int l = 0; l < n; ++l) first[static_cast<std::size_t>(l)] = 0.5 * (DG(i, j, l) + DG(j, i, l) - DG(l, i, j));
      for (int k = 0; k < n; ++k) {
        Jet acc(n, degree - 1, 0.0);
        for (int l = 0; l < n; ++l) acc.add_product(ginv.at({k, l}), first[static_cast<std::size_t>(l)]);
        gamma_.at({k, i, j}) = acc;
        gamma_.at({k, j, i}) = acc;
      }
    }
}

JetTensor LocalChart::covariant_derivative(const JetTensor& t) const {
  const int d = t.degree();
  if (d < 1) throw std::invalid_argument("covariant derivative needs jet degree >= 1");
  if (t.dim() != dim_) throw std::invalid_argument("tensor dimension does not match chart");
  const int n = dim_;
  std::vector<Variance> slots{Variance::Down};
  slots.insert(slots.end(), t.slots().begin(), t.slots().end());
  JetTensor out(n, slots, d - 1);
  const JetTensor low = t.truncate(d - 1);
  const JetTensor gam = gamma_.truncate(d - 1);
  auto G = [&](int k, int i, int j) -> const Jet& { return gam[static_cast<std::size_t>((k * n + i) * n + j)]; };
  const std::size_t count = t.size();
  std::vector<int> digits(static_cast<std::size_t>(t.rank()));
  std::vector<std::size_t> strides(static_cast<std::size_t>(t.rank()));
  for (int s = 0; s < t.rank(); ++s) strides[static_cast<std::size_t>(s)] = t.stride(s);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    for (int s = t.rank() - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    for (int m = 0; m < n; ++m) {
      Jet acc = t[idx].derivative(m);
      for (int s = 0; s < t.rank(); ++s) {
        const int a = digits[static_cast<std::size_t>(s)];
        const std::size_t base = idx - static_cast<std::size_t>(a) * strides[static_cast<std::size_t>(s)];
        for (int q = 0; q < n; ++q) {
          const Jet& tq = low[base + static_cast<std::size_t>(q) * strides[static_cast<std::size_t>(s)]];
          if (t.slots()[static_cast<std::size_t>(s)] == Variance::Up)
            acc.add_product(G(a, m, q), tq);
          else
            acc.add_product(G(q, m, a), tq, -1.0);
        }
      }
      out[static_cast<std::size_t>(m) * count + idx] = std::move(acc);
    }
  }
  return out;
}

const JetTensor& LocalChart::riemann() const {
  if (riemann_) return *riemann_;
  if (degree_ < 2) throw std::invalid_argument("curvature needs jet degree >= 2");
  const int n = dim_;
  const int d = degree_ - 2;
  const JetTensor gam = gamma_.truncate(d);
  auto G = [&](int k, int i, int j) -> const Jet& { return gam[static_cast<std::size_t>((k * n + i) * n + j)]; };
  std::vector<Jet> dgam(ipow(n, 4));  // dgam[((m*n + k)*n + i)*n + j] = d_m Gamma^k_ij
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dgam[static_cast<std::size_t>(((m * n + k) * n + i) * n + j)] =
              gamma_[static_cast<std::size_t>((k * n + i) * n + j)].derivative(m);
  auto DG = [&](int m, int k, int i, int j) -> const Jet& {
    return dgam[static_cast<std::size_t>(((m * n + k) * n + i) * n + j)];
  };
  JetTensor r(n, {Variance::Down, Variance::Down, Variance::Down, Variance::Up}, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (i == j) continue;
          // standard R(d_i, d_j) d_k, negated
          Jet acc = DG(j, l, i, k) - DG(i, l, j, k);
          for (int m = 0; m < n; ++m) {
            acc.add_product(G(l, j, m), G(m, i, k));
            acc.add_product(G(l, i, m), G(m, j, k), -1.0);
          }
          r.at({i, j, k, l}) = std::move(acc);
        }
  riemann_ = std::move(r);
  return *riemann_;
}

JetTensor christoffel(const MetricField& g, std::span<const double> point, int degree) {
  return LocalChart(g, point, degree).christoffel();
}

PointTensor covariant_derivative(const TensorField& t, const LocalChart& chart) {
  return chart.covariant_derivative(t(chart.coordinates())).value();
}

CurvaturePack curvature(const LocalChart& chart, bool with_derivative) {
  if (with_derivative && chart.degree() < 3) throw std::invalid_argument("curvature derivative needs jet degree >= 3");
  CurvaturePack pack;
  pack.point = chart.point();
  const JetTensor& r = chart.riemann();
  pack.riemann = r.value();
  const int n = chart.dim();
  pack.ricci = PointTensor(n, {Variance::Down, Variance::Down});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += pack.riemann.at({i, j, k, j});
      pack.ricci.at({i, k}) = s;
    }
  const PointTensor ginv = chart.inverse_metric().value();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) pack.scalar += ginv.at({i, k}) * pack.ricci.at({i, k});
  if (with_derivative) pack.riemann_derivative = chart.covariant_derivative(r).value();
  return pack;
}

CurvaturePack curvature(const MetricField& g, std::span<const double> point, int degree, bool with_derivative) {
  return curvature(LocalChart(g, point, degree), with_derivative);
}

PointTensor second_cov_derivative(const TensorField& t, const LocalChart& chart) {
  if (chart.degree() < 2) throw std::invalid_argument("second covariant derivative needs jet degree >= 2");
  const JetTensor field = t(chart.coordinates());
  const JetTensor first = chart.covariant_derivative(field);
  return chart.covariant_derivative(first).value();
}

PointTensor connection_laplacian(const TensorField& t, const LocalChart& chart) {
  const PointTensor d2 = second_cov_derivative(t, chart);
  const int n = chart.dim();
  std::vector<Variance> slots(d2.slots().begin() + 2, d2.slots().end());
  PointTensor out(n, slots);
  const PointTensor ginv = chart.inverse_metric().value();
  const std::size_t inner = out.size();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double w = ginv.at({a, b});
      const std::size_t base = (static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)) * inner;
      for (std::size_t k = 0; k < inner; ++k) out[k] -= w * d2[base + k];
    }
  return out;
}

}  // namespace aht
