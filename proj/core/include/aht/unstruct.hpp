#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aht/geometry.hpp"
#include "aht/tensor.hpp"

namespace aht {

/// Internal convention check failed; the numbers cannot be trusted.
class ConventionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Almost complex structure J^i_j as a field (row-major, entry (i, j) = J^i_j).
struct ComplexStructureField {
  int dim = 0;
  std::function<std::vector<Jet>(std::span<const Jet>)> jets;
  std::function<Mat(std::span<const double>)> values;

  JetTensor as_tensor(std::span<const Jet> x) const;
};

struct AlmostHermitianStructure {
  std::string name;
  MetricField metric;
  ComplexStructureField complex_structure;

  int dim() const { return metric.dim; }
  int n() const { return metric.dim / 2; }

  /// Max of |J^2 + I| and |J^T g J - g| over constant and first-order jet terms.
  double compatibility_defect(std::span<const double> point) const;
};

/// Standard J0: e_{2k} -> e_{2k+1} (0-based), i.e. J0(2k+1, 2k) = 1.
Mat standard_complex_structure(int dim);

/// Endomorphism-valued one-form in an orthonormal frame: field[a] = A(e_a).
using EndoForm = std::vector<Mat>;
/// Two-index version: field[a][b].
using EndoForm2 = std::vector<EndoForm>;

EndoForm zero_form(int dim);
EndoForm2 zero_form2(int dim);
double norm_sq(const EndoForm& f);
double norm_sq(const EndoForm2& f);
EndoForm operator+(const EndoForm& a, const EndoForm& b);
EndoForm operator-(const EndoForm& a, const EndoForm& b);
EndoForm operator*(double c, const EndoForm& a);
/// f_{v} = sum_a v_a f[a].
Mat evaluate(const EndoForm& f, const Vec& v);

/// Everything the diagnostics need at one point, in an orthonormal frame.
struct StructurePoint {
  int dim = 0;
  std::vector<double> point;
  FramePack frame;
  Mat J;
  EndoForm dJ;         // dJ[a] = (nabla_{e_a} J)
  EndoForm domega;     // domega[a](b, c) = (nabla_{e_a} omega)(e_b, e_c), from the coordinate Kahler form
  EndoForm2 ddJ;       // ddJ[a][b] = (nabla^2 J)_{e_a, e_b}
  EndoForm2 R;         // R[a][b] = R(e_a, e_b), convention R(X,Y) = nabla_[X,Y] - [nabla_X, nabla_Y]
  std::vector<EndoForm2> dR;  // dR[m][a][b] = (nabla_{e_m} R)(e_a, e_b); empty when not requested
  int n() const { return dim / 2; }
};

struct EvaluateOptions {
  int degree = 4;
  bool curvature_derivative = true;
  /// Orthogonal matrix q: use frame * q instead of the Cholesky frame.
  const Mat* rotation = nullptr;
};

StructurePoint evaluate_structure(const AlmostHermitianStructure& s, std::span<const double> point,
                                  const EvaluateOptions& opts = {});

/// Frame components of omega(X, Y) = <X, J Y> (entry (a, b)).
Mat kahler_form_frame(const Mat& J);
/// Kahler form as a coordinate (0,2) jet tensor: omega_ij = g_ik J^k_j.
JetTensor kahler_form(const AlmostHermitianStructure& s, std::span<const Jet> x);

struct UnitaryProjection {
  Mat algebra;     // commutes with J
  Mat complement;  // anticommutes with J
};
UnitaryProjection project_u_uperp(const Mat& a, const Mat& J, double skew_tol = 1e-9);

/// Structure-group interface: projectors onto the Lie algebra g and its
/// complement m inside so(dim), plus the tensors the group stabilizes.
class StructureGroup {
 public:
  virtual ~StructureGroup() = default;
  virtual std::string name() const = 0;
  virtual Mat project_algebra(const Mat& a) const = 0;
  virtual Mat project_complement(const Mat& a) const = 0;
  virtual std::vector<PointTensor> stabilized_tensors() const = 0;
};

class UnitaryGroup final : public StructureGroup {
 public:
  explicit UnitaryGroup(Mat J) : J_(std::move(J)) {}
  std::string name() const override { return "U(" + std::to_string(J_.rows() / 2) + ")"; }
  Mat project_algebra(const Mat& a) const override { return 0.5 * (a - J_ * a * J_); }
  Mat project_complement(const Mat& a) const override { return 0.5 * (a + J_ * a * J_); }
  std::vector<PointTensor> stabilized_tensors() const override;

 private:
  Mat J_;
};

struct GrayHervellaParts {
  EndoForm w1, w2, w3, w4;
};

/// Split of a T* (x) u(n)-perp tensor into its four U(n)-types.
/// `dstar_omega` (frame components of d* omega) feeds the W4 part; for tensors
/// that are not the torsion of a structure pass `codifferential_from_trace`.
GrayHervellaParts gray_hervella_decompose(const EndoForm& xi, const Mat& J, const Vec& dstar_omega);
/// (d* omega)^sharp reconstructed from the trace v = xi_{e_a} e_a via 2v = -J (d* omega)^sharp.
Vec codifferential_from_trace(const EndoForm& xi, const Mat& J);
/// Second formula for the W4 part, from the trace vector.
EndoForm w4_from_trace(const Vec& trace, const Mat& J);

/// xi_{e_a} e_a.
Vec torsion_trace(const EndoForm& xi);

struct TorsionTensor {
  std::vector<double> point;
  int dim = 0;
  EndoForm xi;
  EndoForm xi1, xi2, xi3, xi4;
  Vec lee_vector;        // xi_{e_a} e_a by frame sum
  Vec dstar_omega;       // d*omega(X) = -(nabla_{e_a} omega)(e_a, X)
  double skew_defect = 0.0;
  double anticommute_defect = 0.0;
  double omega_crosscheck = 0.0;  // 2<xi_X Y, Z> + (nabla_X omega)(Y, JZ)
  double lee_crosscheck = 0.0;    // trace vs -1/2 J (d* omega)^sharp
  double w4_crosscheck = 0.0;     // two W4 formulas

  int n() const { return dim / 2; }
  double norm() const;
  double component_norm(int k) const;
};

/// Builds xi = -1/2 J (nabla J) and its decomposition from frame data.
/// Cross-checks are recorded; when `abort_tol` > 0 a failure above
/// abort_tol * (1 + |xi|) throws ConventionError.
TorsionTensor torsion_from_frame(const Mat& J, const EndoForm& dJ, std::vector<double> point = {},
                                 double abort_tol = 1e-9);

TorsionTensor intrinsic_torsion(const StructurePoint& sp, double abort_tol = 1e-9);
TorsionTensor intrinsic_torsion(const AlmostHermitianStructure& s, std::span<const double> point, int degree = 4);

/// xi_{e_a} e_a in frame components, checked against -1/2 J (d* omega)^sharp.
Vec lee_vector(const AlmostHermitianStructure& s, std::span<const double> point, int degree = 4);

/// Intrinsic torsion as a coordinate (1,2) field, entry (k, i, j) = (xi_{d_i} d_j)^k.
/// One jet order is lost to nabla J.
TensorField torsion_field(const AlmostHermitianStructure& s);

/// (A . T) for frame components: up slots get +A, down slots -A^T.
PointTensor act(const Mat& a, const PointTensor& t);

/// nabla^{U(n)} T = nabla T + xi . T in frame components, direction in slot 0.
PointTensor minimal_derivative(const TensorField& t, const AlmostHermitianStructure& s,
                               std::span<const double> point, int degree = 4);

/// Max frame-component norm of nabla^{U(n)} applied to g, J and omega. Throws
/// ConventionError above abort_tol * (1 + |xi|) when abort_tol > 0.
double minimal_connection_contract(const AlmostHermitianStructure& s, std::span<const double> point,
                                   int degree = 4, double abort_tol = 1e-9);

/// Action of a skew endomorphism on a (1,2) tensor field written as an EndoForm:
/// (A . f)_X Y = A f_X Y - f_{AX} Y - f_X A Y.
EndoForm act_on_form(const Mat& a, const EndoForm& f);

struct RandomStructureOptions {
  double metric_amplitude = 0.0;  // g = exp(f) delta with f a random trigonometric polynomial
};

AlmostHermitianStructure random_structure(std::uint64_t seed, int n, double amplitude,
                                          const RandomStructureOptions& opts = {});

}  // namespace aht
