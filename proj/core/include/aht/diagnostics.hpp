#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aht/catalog.hpp"
#include "aht/unstruct.hpp"

namespace aht {

/// Pointwise frame data plus the derived tensors every residual draws on.
struct PointAnalysis {
  StructurePoint sp;
  TorsionTensor torsion;
  EndoForm2 dxi;   // dxi[a][b] = (nabla_{e_a} xi)_{e_b}
  EndoForm2 duxi;  // same for the minimal connection
  Mat ricci;       // frame components, Ric(X, Y) = <R(X, e_i) Y, e_i>
  double scale = 1.0;  // 1 + |xi| + |R|

  int dim() const { return sp.dim; }
  int n() const { return sp.dim / 2; }
};

struct AnalysisOptions {
  int degree = 3;
  const Mat* rotation = nullptr;
  double abort_tol = 1e-8;  // relative tolerance of the built-in cross-checks
};

PointAnalysis analyze_point(const AlmostHermitianStructure& s, std::span<const double> point,
                            const AnalysisOptions& opts = {});

struct Coderivative {
  Mat by_definition;     // -(nabla_{e_i} xi)_{e_i}
  Mat by_minimal;        // -(nabla^U_{e_i} xi)_{e_i} - xi_{xi_{e_i} e_i}
  double agreement = 0;  // |difference|
  double uperp_defect = 0;  // skewness plus J-anticommutation defect
};
Coderivative coderivative_xi(const PointAnalysis& pa, double abort_tol = 1e-8);

struct SectionResiduals {
  double harmonic = 0, harmonic_map = 0, vert_geodesic = 0, horiz_geodesic = 0;
  double flatness = 0, superflat = 0, torsion_iv_a = 0, torsion_iv_b = 0;
  Vec harmonic_map_form;  // frame components of X -> <xi_{e_i}, R(e_i, X)>
};
SectionResiduals section_residuals(const PointAnalysis& pa);

struct StarRicci {
  Mat ric_star;  // frame (X, Y)
  double s_star = 0;
  Mat sym, alt;
  Mat alt_formula;  // skew part from the minimal-connection expression
  double crosscheck = 0;
  double j_symmetry_defect = 0;   // Ric*(JX, JY) - Ric*(Y, X)
  double alt_hermitian_defect = 0;  // alt must be anti-Hermitian
};
StarRicci star_ricci(const PointAnalysis& pa, double abort_tol = 1e-8);

struct HermitianHarmonicity {
  double comm_JLapJ = 0, herm_defect = 0, cond_iv = 0;
  Mat rough_laplacian_omega;  // frame components of nabla* nabla omega
  double lck_laplacian = 0;   // |nabla* nabla omega - 2 |theta|^2 omega|, theta = 1/2 J d* omega
};
HermitianHarmonicity hermitian_harmonicity(const PointAnalysis& pa);

struct NamedResidual {
  std::string name;
  double value = 0;
};

/// Identities that hold on every almost Hermitian structure.
std::vector<NamedResidual> identity_suite(const PointAnalysis& pa);
/// nabla* nabla omega from frame data vs the generic coordinate connection Laplacian.
double rough_laplacian_crosscheck(const AlmostHermitianStructure& s, const PointAnalysis& pa);

/// The eight residuals that vanish exactly for harmonic structures.
std::vector<NamedResidual> harmonicity_equivalents(const PointAnalysis& pa);

enum class ClassCondition {
  W1W2W4,
  QuasiKahler,
  LocallyConformalAlmostKahler,
  W1W4,
  Hermitian,
  HarmonicMapW1W2W4,
  HarmonicMapQuasiKahler,
  HarmonicMapHermitian,
  /// (i) re-derived from the Ric* divergence identity: 2 Ric(X, v) - 2n Ric*(X, v) on the right.
  HarmonicMapW1W2W4Derived,
};
std::string to_string(ClassCondition c);

struct ClassCriterion {
  bool applicable = false;
  std::string reason;           // why it is inapplicable
  double class_residual = 0;    // left minus right of the stated condition
  double harmonic_residual = 0;  // |d* xi|, plus the harmonic-map one-form for map criteria
};
ClassCriterion class_criteria(const PointAnalysis& pa, ClassCondition c, double tol = 1e-7);

struct NearlyKahlerSuite {
  bool applicable = false;
  double ecxy = 0, ecjxjy = 0, ecxyzw = 0, minimal_parallel = 0, skew_flatness = 0;
  double flat_implies_kahler = 0;
  double psi_norm_sq = 0;        // full component sum of <xi_(1) X Y, Z>^2
  double einstein_alpha = 0;     // Ric = 5 alpha g in dimension 6 (scalar / (5 * 2n) in general)
  double laplacian_alpha = 0;    // |nabla* nabla omega - 4 alpha omega|
  double w1w4_laplacian = 0;     // dimension-6 W1 + W4 Laplacian formula
};
NearlyKahlerSuite nearly_kahler_suite(const PointAnalysis& pa, double tol = 1e-7);

struct ConformalCheck {
  Vec numeric;         // coordinate components of <R(e_i, d_k), xi_{e_i}>
  Vec closed_form;     // same from the flat-metric formula
  double residual = 0;  // max abs difference
  std::optional<Vec> sine_form;  // (n-1)/8 e^{-f} sin cos dx1 when f = sin(x1)
};
ConformalCheck conformal_example_check(int n, const std::string& f, std::span<const double> point, int degree = 3);

/// Max relative deviation of coordinate curvature from the conformal closed form.
double conformal_curvature_audit(int n, const std::string& f, std::span<const double> point);

struct Classification {
  std::string label;
  std::array<double, 4> component_max{};
  double torsion_max = 0;
};
Classification classify_gh(const AlmostHermitianStructure& s, const std::vector<std::vector<double>>& points,
                           double tol = 1e-7, int degree = 2);

struct DiagnosticsReport {
  std::string geometry;
  std::vector<std::vector<double>> points;
  std::vector<std::map<std::string, double>> residuals;  // raw values per point
  std::vector<double> scales;
  std::map<std::string, double> max_normalized, mean_normalized;
  std::map<std::string, bool> pass;  // max normalized < tolerance
  double tolerance = 1e-7;
  int jet_degree = 3;
  bool sign_audit = false;
  double sign_audit_error = 0;
  std::uint64_t seed = 0;
  Classification classification;
};

/// Every named residual at each point; `pass` flags are per residual.
DiagnosticsReport run_diagnostics(const GeometrySpec& spec, const std::vector<std::vector<double>>& points,
                                  double tolerance, std::uint64_t seed);

/// Conformal closed-form audit plus the minimal-connection contract at fixed points.
std::pair<bool, double> sign_audit();

}  // namespace aht
