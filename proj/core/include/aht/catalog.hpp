#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aht/expr.hpp"
#include "aht/unstruct.hpp"

namespace aht {

enum class MetricKind { Flat, Conformal, S6Round, Custom };
enum class JKind { Standard, S6Cross, Conjugated };
enum class DomainShape { Box, Ball, Annulus };

struct Domain {
  DomainShape shape = DomainShape::Box;
  std::vector<double> lo, hi;    // Box (also the sampling box for the other shapes)
  double r_min = 0.0, r_max = 0.0;  // Ball: |x| < r_max; Annulus: r_min < |x| < r_max
  bool contains(std::span<const double> x) const;
};

/// What the test suite should observe for a catalog geometry.
struct ExpectedDiagnostics {
  std::string gh_class;                      // classify_gh label
  std::vector<std::string> zero_residuals;   // below tolerance everywhere
  std::vector<std::string> positive_residuals;  // above 1e-3 at generic points
};

struct GeometrySpec {
  std::string name;
  int n = 0;
  MetricKind metric_kind = MetricKind::Flat;
  JKind j_kind = JKind::Standard;
  std::string conformal_factor;               // Expr source when metric_kind == Conformal
  std::vector<std::string> plane_factors;     // Custom: one Expr per complex plane
  std::uint64_t seed = 0;                     // Conjugated: random_structure seed
  double amplitude = 0.0;                     // Conjugated
  Domain domain;
  std::vector<bool> periodic;
  int jet_degree = 4;
  ExpectedDiagnostics expected;

  int dim() const { return 2 * n; }
  AlmostHermitianStructure build() const;
};

GeometrySpec flat_kahler(int n);
/// g = e^f delta with standard J. With `periodic`, f must agree at 2 pi shifted points.
GeometrySpec conformal(int n, const std::string& f, bool periodic);
/// g = |z|^{-2} delta on the annulus 0.5 < |z| < 2 in C^n.
GeometrySpec hopf_chart(int n);
/// Round S^6 in the graph chart over |x| < 0.9 with J_p X = p x X.
GeometrySpec s6_nearly_kahler();
/// g = e^{f_k} on the k-th complex plane, standard J; Hermitian, generally not lcK.
GeometrySpec hermitian_planes(std::vector<std::string> plane_factors);
/// random_structure wrapped as a periodic torus geometry.
GeometrySpec random_geometry(std::uint64_t seed, int n, double amplitude);

/// Catalog names addressable from JSON: flat, conformal, hopf, s6, hermitian, random.
std::vector<std::string> catalog_names();

/// Imaginary octonions: (u x v)_k for the Cayley basis e1..e7 (0-based indices).
std::array<double, 7> octonion_cross(const std::array<double, 7>& u, const std::array<double, 7>& v);
/// Full octonion product; index 0 is the real part.
std::array<double, 8> octonion_product(const std::array<double, 8>& a, const std::array<double, 8>& b);

/// Deterministic low-discrepancy points inside the domain (Halton with rejection).
std::vector<std::vector<double>> sample_points(const GeometrySpec& spec, int count, std::uint64_t seed);

}  // namespace aht
