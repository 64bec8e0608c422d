#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aht/unstruct.hpp"

namespace aht {

/// Almost complex structure sampled on the periodic grid of the flat torus
/// (R / 2 pi Z)^{2n}, m nodes per axis, metric delta.
class JGrid {
 public:
  JGrid() = default;
  JGrid(int n, int m);

  static JGrid constant(int n, int m, const Mat& J);
  /// Samples `s` at the nodes; the metric must be flat (checked at 16 off-grid points).
  static JGrid sample(const AlmostHermitianStructure& s, int m);

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  int resolution() const { return m_; }
  double spacing() const;
  double cell_volume() const;  // h^{2n}
  std::size_t nodes() const { return nodes_; }

  Mat J(std::size_t node) const;
  void set_J(std::size_t node, const Mat& J);
  std::vector<double> coordinates(std::size_t node) const;
  std::size_t neighbor(std::size_t node, int axis, int offset) const;
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Max over nodes of |J^2 + I| and |J^T J - I|.
  double structure_defect() const;

  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

 private:
  int n_ = 0, m_ = 0;
  std::size_t nodes_ = 0;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;  // dim x dim column-major per node
};

/// Per-node dim x dim matrices (same layout as JGrid).
struct NodeField {
  int dim = 0;
  std::vector<double> data;

  NodeField() = default;
  NodeField(int dim, std::size_t nodes) : dim(dim), data(nodes * static_cast<std::size_t>(dim * dim), 0.0) {}
  std::size_t nodes() const { return data.size() / static_cast<std::size_t>(dim * dim); }
  Mat at(std::size_t node) const;
  void set(std::size_t node, const Mat& a);
};

/// Weighted inner product h^{2n} sum_nodes <a, b>.
double l2_inner(const JGrid& g, const NodeField& a, const NodeField& b);
double l2_norm(const JGrid& g, const NodeField& a);

/// 4th-order central differences; throws std::invalid_argument for m < 4.
TorsionTensor grid_torsion(const JGrid& g, std::size_t node);
/// Same stencil evaluated on a field at arbitrary points (no stored grid).
TorsionTensor stencil_torsion(const std::function<Mat(std::span<const double>)>& J, int n, int m,
                              std::span<const double> point);

/// 1/2 h^{2n} sum |xi|^2.
double energy(const JGrid& g);

/// d* xi as the exact L2 gradient of the discrete energy: along
/// J_eps = e^{eps phi} J e^{-eps phi}, dE/deps = -h^{2n} sum <d* xi, phi>.
/// Values lie in u(n)-perp at each node.
NodeField gradient(const JGrid& g);
/// -sum_a D_a xi_a with the same stencil (differs from `gradient` by O(h^4)).
NodeField pointwise_coderivative(const JGrid& g);

/// J <- e^{eps phi} J e^{-eps phi} node by node.
JGrid vary(const JGrid& g, const NodeField& phi, double eps);
/// Smooth random u(n)-perp field (low Fourier modes), unit L2 norm.
NodeField random_variation(const JGrid& g, std::uint64_t seed);

/// -h^{2n} sum <d* xi, phi>: the first-variation prediction of dE(phi).
double first_variation(const JGrid& g, const NodeField& phi);
/// (E(J_eps) - E(J_{-eps})) / (2 eps).
double directional_difference(const JGrid& g, const NodeField& phi, double eps);
/// (E(J_eps) + E(J_{-eps}) - 2 E(J)) / eps^2.
double second_difference(const JGrid& g, const NodeField& phi, double eps);

struct HessianValue {
  bool applicable = false;  // false when the grid is not critical
  double value = 0.0;
  double gradient_norm = 0.0;
};
/// h^{2n} sum (|D phi|^2 - 2 sum_a |[xi_a, phi]|^2); inapplicable when the L2
/// gradient norm exceeds `critical_tol`.
HessianValue hessian_form(const JGrid& g, const NodeField& phi, double critical_tol);

/// Directional finite differences against the first-variation prediction on
/// random fields. The sign s is the one global factor with
/// fd = -s h^{2n} sum <d* xi, phi>; errors are |fd - s * predicted| / max(|fd|, |predicted|).
struct GradientCheck {
  double sign = 1.0;
  double max_rel_error = 0.0;
  int fields = 0;
  std::vector<double> rel_errors;
};
GradientCheck gradient_check(const JGrid& g, int fields = 10, double eps = 1e-4, std::uint64_t seed = 1);

/// Second differences against hessian_form at a critical grid. The constant is
/// fixed once from an eps sweep on the first field; every field is then
/// compared with that constant at the chosen eps.
struct HessianCheck {
  bool applicable = false;
  double constant = 0.0;
  double eps = 0.0;
  double max_rel_error = 0.0;
  double min_value = 0.0;  // smallest Hess E(phi) seen
  std::vector<double> values, second_differences;
};
HessianCheck hessian_check(const JGrid& g, int fields, double critical_tol, std::uint64_t seed = 101);

/// Max |[a, b]_{u-perp}| over random pairs a, b in u(n)-perp(J).
double bracket_closure_defect(const Mat& J, int pairs, std::uint64_t seed);

struct FlowOptions {
  int max_iter = 5000;
  double tol_grad = 1e-5;
  double initial_step = 1e-2;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double grow = 2.0;
  double min_step = 1e-14;
  double drift_limit = 1e-8;
  /// Called after each accepted step; return false to stop.
  std::function<bool(int iteration, double energy, double grad_norm)> on_step;
};

struct FlowStep {
  int iteration = 0;
  double energy = 0, grad_norm = 0, step = 0, millis = 0;
};

struct FlowResult {
  std::vector<FlowStep> trace;
  JGrid grid;
  bool converged = false;
  bool stalled = false;
  std::string stall_reason;
  double max_drift = 0;            // largest per-step constraint drift before re-projection
  double terminal_pointwise = 0;   // max node |d* xi|
  double terminal_pointwise_naive = 0;
};

/// Projected gradient descent with Armijo backtracking.
FlowResult descend(JGrid g, const FlowOptions& opts = {});

/// CSV with header iteration,energy,grad_norm,step,millis.
std::string trace_csv(const std::vector<FlowStep>& trace);

/// Nearest orthogonal almost complex structure: polar factor, then skew part, repeated.
Mat reproject_structure(const Mat& J);

}  // namespace aht
