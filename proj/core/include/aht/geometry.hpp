#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "aht/jet.hpp"
#include "aht/tensor.hpp"

namespace aht {

/// Tensor germ at a point: coordinate components stored as jets of one degree.
class JetTensor {
 public:
  JetTensor() = default;
  JetTensor(int dim, std::vector<Variance> slots, int degree);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  int degree() const { return degree_; }
  const std::vector<Variance>& slots() const { return slots_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t stride(int slot) const;

  Jet& operator[](std::size_t k) { return entries_[k]; }
  const Jet& operator[](std::size_t k) const { return entries_[k]; }
  Jet& at(std::initializer_list<int> idx);
  const Jet& at(std::initializer_list<int> idx) const;

  JetTensor truncate(int degree) const;
  /// Constant terms.
  PointTensor value() const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<Variance> slots_;
  std::vector<Jet> entries_;
};

/// Coordinate jets at a point -> tensor germ.
using TensorField = std::function<JetTensor(std::span<const Jet>)>;

/// Metric g_ij as a field of jets (row-major dim x dim) with a cheap double path.
struct MetricField {
  int dim = 0;
  std::function<std::vector<Jet>(std::span<const Jet>)> jets;
  std::function<Mat(std::span<const double>)> values;

  JetTensor as_tensor(std::span<const Jet> x) const;
};

/// Levi-Civita data at one point: metric jets, inverse, Christoffel symbols.
class LocalChart {
 public:
  LocalChart(const MetricField& g, std::span<const double> point, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& point() const { return point_; }
  const std::vector<Jet>& coordinates() const { return coords_; }
  const JetTensor& metric() const { return metric_; }
  const JetTensor& inverse_metric() const { return inverse_; }
  const Mat& metric_value() const { return metric_value_; }
  const FramePack& frame() const { return frame_; }

  /// Gamma^k_ij at entry (k, i, j); degree K-1.
  const JetTensor& christoffel() const { return gamma_; }

  /// Covariant derivative; the direction is prepended as slot 0 and the
  /// result has one jet order less than the input.
  JetTensor covariant_derivative(const JetTensor& t) const;

  /// R(d_i, d_j) d_k = R[i, j, k, l] d_l in the convention
  /// R(X,Y) = nabla_[X,Y] - [nabla_X, nabla_Y]; degree K-2.
  const JetTensor& riemann() const;

 private:
  int dim_;
  int degree_;
  std::vector<double> point_;
  std::vector<Jet> coords_;
  JetTensor metric_, inverse_, gamma_;
  Mat metric_value_;
  FramePack frame_;
  mutable std::optional<JetTensor> riemann_;
};

/// Invert a square matrix of jets (row-major) by Gauss-Jordan elimination.
std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& m, int n);

JetTensor christoffel(const MetricField& g, std::span<const double> point, int degree);
PointTensor covariant_derivative(const TensorField& t, const LocalChart& chart);

struct CurvaturePack {
  std::vector<double> point;
  PointTensor riemann;            // (i, j, k; l), see LocalChart::riemann
  PointTensor ricci;              // Ric(X, Y) = <R(X, e_a) Y, e_a>
  double scalar = 0.0;
  std::optional<PointTensor> riemann_derivative;  // (m, i, j, k; l)
};

/// Sign of Ric relative to the trace <R(e_a, X) Y, e_a>.
inline constexpr int kRicciSignRelativeToFirstSlotTrace = -1;

CurvaturePack curvature(const MetricField& g, std::span<const double> point, int degree, bool with_derivative);
CurvaturePack curvature(const LocalChart& chart, bool with_derivative);

/// (nabla^2 T)_{X,Y} with X in slot 0 and Y in slot 1.
PointTensor second_cov_derivative(const TensorField& t, const LocalChart& chart);
/// -(nabla^2 T)_{e_a, e_a}, returned in coordinate components with T's valence.
PointTensor connection_laplacian(const TensorField& t, const LocalChart& chart);

}  // namespace aht
