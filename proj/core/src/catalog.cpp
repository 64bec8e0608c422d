#include "aht/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace aht {

namespace {

std::size_t sz(int k) { return static_cast<std::size_t>(k); }

// Fano-plane triples (i, j, k) with e_i e_j = e_k, 0-based.
constexpr int kFano[7][3] = {{0, 1, 3}, {1, 2, 4}, {2, 3, 5}, {3, 4, 6}, {4, 5, 0}, {5, 6, 1}, {6, 0, 2}};

template <class T, class V>
std::array<T, 7> cross7(const V& u, const V& v) {
  std::array<T, 7> out;
  for (auto& o : out) o = scalar_like(u[0], 0.0);
  for (const auto& t : kFano) {
    const int i = t[0], j = t[1], k = t[2];
    out[sz(k)] += u[sz(i)] * v[sz(j)] - u[sz(j)] * v[sz(i)];
    out[sz(i)] += u[sz(j)] * v[sz(k)] - u[sz(k)] * v[sz(j)];
    out[sz(j)] += u[sz(k)] * v[sz(i)] - u[sz(i)] * v[sz(k)];
  }
  return out;
}

Mat dense_to_mat(const std::vector<double>& d, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = d[sz(i * n + j)];
  return m;
}

template <class T>
std::vector<T> scaled_identity(const T& factor, int n) {
  std::vector<T> g(sz(n * n), scalar_like(factor, 0.0));
  for (int i = 0; i < n; ++i) g[sz(i * n + i)] = factor;
  return g;
}

template <class T>
std::vector<T> standard_j(std::span<const T> x, int n) {
  std::vector<T> j(sz(n * n), scalar_like(x[0], 0.0));
  const Mat j0 = standard_complex_structure(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) j[sz(r * n + c)] += j0(r, c);
  return j;
}

// Graph chart of the unit sphere: p = (x, w), w = sqrt(1 - |x|^2).
template <class T>
std::vector<T> s6_metric(std::span<const T> x) {
  T r2 = scalar_like(x[0], 0.0);
  for (int i = 0; i < 6; ++i) r2 += x[sz(i)] * x[sz(i)];
  const T inv = 1.0 / (1.0 - r2);
  std::vector<T> g(36, scalar_like(x[0], 0.0));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      g[sz(i * 6 + j)] = x[sz(i)] * x[sz(j)] * inv;
      if (i == j) g[sz(i * 6 + j)] += 1.0;
    }
  return g;
}

template <class T>
std::vector<T> s6_complex_structure(std::span<const T> x) {
  using std::sqrt;
  T r2 = scalar_like(x[0], 0.0);
  for (int i = 0; i < 6; ++i) r2 += x[sz(i)] * x[sz(i)];
  const T w = sqrt(1.0 - r2);
  std::array<T, 7> p;
  for (int i = 0; i < 6; ++i) p[sz(i)] = x[sz(i)];
  p[6] = w;
  std::vector<T> j(36, scalar_like(x[0], 0.0));
  for (int c = 0; c < 6; ++c) {
    std::array<T, 7> dp;
    for (int i = 0; i < 7; ++i) dp[sz(i)] = scalar_like(x[0], i == c ? 1.0 : 0.0);
    dp[6] = -1.0 * x[sz(c)] / w;
    const auto jp = cross7<T>(p, dp);
    // Tangent vectors of the graph are determined by their first six components.
    for (int r = 0; r < 6; ++r) j[sz(r * 6 + c)] = jp[sz(r)];
  }
  return j;
}

void check_periodic(const Expr& f, int dim) {
  const double two_pi = 2.0 * std::numbers::pi;
  const std::vector<std::vector<double>> probes = {
      std::vector<double>(sz(dim), 0.3), std::vector<double>(sz(dim), 1.7), std::vector<double>(sz(dim), -0.9)};
  for (const auto& base : probes)
    for (int k = 0; k < dim; ++k) {
      std::vector<double> shifted = base;
      shifted[sz(k)] += two_pi;
      const double a = f.eval<double>(base), b = f.eval<double>(shifted);
      if (std::abs(a - b) > 1e-9)
        throw std::invalid_argument("conformal factor '" + f.source() + "' is not 2pi-periodic in x" +
                                    std::to_string(k + 1));
    }
}

Domain torus_box(int dim) {
  Domain d;
  d.lo.assign(sz(dim), 0.0);
  d.hi.assign(sz(dim), 2.0 * std::numbers::pi);
  return d;
}

std::vector<std::string> all_section_residuals() {
  return {"harmonic", "harmonic_map", "vert_geodesic", "horiz_geodesic", "flatness", "superflat",
          "torsion_iv_a", "torsion_iv_b", "comm_JLapJ", "herm_defect", "cond_iv"};
}

}  // namespace

bool Domain::contains(std::span<const double> x) const {
  for (std::size_t k = 0; k < x.size() && k < lo.size(); ++k)
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  switch (shape) {
    case DomainShape::Box: return true;
    case DomainShape::Ball: return r < r_max;
    case DomainShape::Annulus: return r > r_min && r < r_max;
  }
  return false;
}

std::array<double, 7> octonion_cross(const std::array<double, 7>& u, const std::array<double, 7>& v) {
  return cross7<double>(u, v);
}

std::array<double, 8> octonion_product(const std::array<double, 8>& a, const std::array<double, 8>& b) {
  // (a0 + u)(b0 + v) = a0 b0 - <u, v> + a0 v + b0 u + u x v
  std::array<double, 7> u, v;
  for (int i = 0; i < 7; ++i) {
    u[sz(i)] = a[sz(i + 1)];
    v[sz(i)] = b[sz(i + 1)];
  }
  const auto uv = octonion_cross(u, v);
  std::array<double, 8> out{};
  out[0] = a[0] * b[0];
  for (int i = 0; i < 7; ++i) {
    out[0] -= u[sz(i)] * v[sz(i)];
    out[sz(i + 1)] = a[0] * v[sz(i)] + b[0] * u[sz(i)] + uv[sz(i)];
  }
  return out;
}

AlmostHermitianStructure GeometrySpec::build() const {
  const int d = dim();
  if (n < 1) throw std::invalid_argument("geometry needs n >= 1");
  if (j_kind == JKind::Conjugated) {
    AlmostHermitianStructure s = random_structure(seed, n, amplitude);
    s.name = name;
    return s;
  }
  AlmostHermitianStructure s;
  s.name = name;
  s.metric.dim = d;
  s.complex_structure.dim = d;

  switch (metric_kind) {
    case MetricKind::Flat:
      s.metric.jets = [d](std::span<const Jet> x) { return scaled_identity(scalar_like(x[0], 1.0), d); };
      s.metric.values = [d](std::span<const double>) { return Mat(Mat::Identity(d, d)); };
      break;
    case MetricKind::Conformal: {
      const Expr f = parse_expr(conformal_factor);
      if (f.max_variable() > d)
        throw std::invalid_argument("conformal factor references x" + std::to_string(f.max_variable()) +
                                    " beyond the chart dimension " + std::to_string(d));
      s.metric.jets = [f, d](std::span<const Jet> x) { return scaled_identity(exp(f.eval<Jet>(x)), d); };
      s.metric.values = [f, d](std::span<const double> x) {
        return Mat(std::exp(f.eval<double>(x)) * Mat::Identity(d, d));
      };
      break;
    }
    case MetricKind::S6Round:
      if (d != 6) throw std::invalid_argument("the round S^6 chart needs n = 3");
      s.metric.jets = [](std::span<const Jet> x) { return s6_metric<Jet>(x); };
      s.metric.values = [](std::span<const double> x) { return dense_to_mat(s6_metric<double>(x), 6); };
      break;
    case MetricKind::Custom: {
      if (static_cast<int>(plane_factors.size()) != n)
        throw std::invalid_argument("custom metric needs one factor per complex plane");
      std::vector<Expr> fs;
      for (const auto& src : plane_factors) fs.push_back(parse_expr(src));
      s.metric.jets = [fs, d](std::span<const Jet> x) {
        std::vector<Jet> g(sz(d * d), Jet(x[0].layout(), 0.0));
        for (int k = 0; k < d / 2; ++k) {
          const Jet e = exp(fs[sz(k)].eval<Jet>(x));
          g[sz((2 * k) * d + 2 * k)] = e;
          g[sz((2 * k + 1) * d + 2 * k + 1)] = e;
        }
        return g;
      };
      s.metric.values = [fs, d](std::span<const double> x) {
        Mat g = Mat::Zero(d, d);
        for (int k = 0; k < d / 2; ++k) {
          const double e = std::exp(fs[sz(k)].eval<double>(x));
          g(2 * k, 2 * k) = e;
          g(2 * k + 1, 2 * k + 1) = e;
        }
        return g;
      };
      break;
    }
  }

  switch (j_kind) {
    case JKind::Standard:
      s.complex_structure.jets = [d](std::span<const Jet> x) { return standard_j<Jet>(x, d); };
      s.complex_structure.values = [d](std::span<const double>) { return standard_complex_structure(d); };
      break;
    case JKind::S6Cross:
      if (d != 6) throw std::invalid_argument("the octonionic J needs n = 3");
      s.complex_structure.jets = [](std::span<const Jet> x) { return s6_complex_structure<Jet>(x); };
      s.complex_structure.values = [](std::span<const double> x) {
        return dense_to_mat(s6_complex_structure<double>(x), 6);
      };
      break;
    case JKind::Conjugated:
      break;  // handled above
  }
  return s;
}

GeometrySpec flat_kahler(int n) {
  if (n < 1) throw std::invalid_argument("flat_kahler needs n >= 1");
  GeometrySpec g;
  g.name = "flat";
  g.n = n;
  g.domain = torus_box(2 * n);
  g.periodic.assign(sz(2 * n), true);
  g.expected.gh_class = "Kahler";
  g.expected.zero_residuals = all_section_residuals();
  return g;
}

GeometrySpec conformal(int n, const std::string& f, bool periodic) {
  if (n < 2) throw std::invalid_argument("conformal geometry needs n >= 2");
  GeometrySpec g;
  g.name = "conformal";
  g.n = n;
  g.metric_kind = MetricKind::Conformal;
  g.conformal_factor = f;
  g.domain = torus_box(2 * n);
  g.periodic.assign(sz(2 * n), periodic);
  const Expr e = parse_expr(f);
  if (e.max_variable() > 2 * n)
    throw std::invalid_argument("conformal factor references a coordinate beyond the chart dimension");
  if (periodic) check_periodic(e, 2 * n);
  // A constant factor is a rescaled Kahler metric.
  const bool constant = e.max_variable() == 0;
  if (constant) {
    g.expected.gh_class = "Kahler";
    g.expected.zero_residuals = all_section_residuals();
  } else {
    g.expected.gh_class = "W4";
    g.expected.zero_residuals = {"harmonic", "comm_JLapJ", "herm_defect", "cond_iv"};
    g.expected.positive_residuals = {"harmonic_map"};
  }
  return g;
}

GeometrySpec hopf_chart(int n) {
  if (n < 2) throw std::invalid_argument("hopf_chart needs n >= 2");
  std::ostringstream f;
  f << "-2*log(sqrt(";
  for (int k = 1; k <= 2 * n; ++k) f << (k > 1 ? "+" : "") << "x" << k << "^2";
  f << "))";
  GeometrySpec g = conformal(n, f.str(), false);
  g.name = "hopf";
  g.domain.shape = DomainShape::Annulus;
  g.domain.lo.assign(sz(2 * n), -2.0);
  g.domain.hi.assign(sz(2 * n), 2.0);
  g.domain.r_min = 0.5;
  g.domain.r_max = 2.0;
  g.expected.gh_class = "W4";
  g.expected.zero_residuals = {"harmonic", "harmonic_map", "comm_JLapJ", "herm_defect", "cond_iv"};
  g.expected.positive_residuals = {"vert_geodesic", "horiz_geodesic"};
  return g;
}

GeometrySpec s6_nearly_kahler() {
  GeometrySpec g;
  g.name = "s6";
  g.n = 3;
  g.metric_kind = MetricKind::S6Round;
  g.j_kind = JKind::S6Cross;
  g.domain.shape = DomainShape::Ball;
  g.domain.lo.assign(6, -0.9);
  g.domain.hi.assign(6, 0.9);
  g.domain.r_max = 0.9;
  g.periodic.assign(6, false);
  g.expected.gh_class = "W1";
  g.expected.zero_residuals = {"harmonic", "harmonic_map", "vert_geodesic", "comm_JLapJ", "herm_defect", "cond_iv"};
  g.expected.positive_residuals = {"flatness"};
  return g;
}

GeometrySpec hermitian_planes(std::vector<std::string> plane_factors) {
  GeometrySpec g;
  g.name = "hermitian";
  g.n = static_cast<int>(plane_factors.size());
  if (g.n < 2) throw std::invalid_argument("hermitian_planes needs at least two planes");
  g.metric_kind = MetricKind::Custom;
  g.plane_factors = std::move(plane_factors);
  g.domain = torus_box(2 * g.n);
  g.periodic.assign(sz(2 * g.n), true);
  for (const auto& src : g.plane_factors) check_periodic(parse_expr(src), 2 * g.n);
  g.expected.gh_class = g.n == 2 ? "W4" : "W3+W4";
  return g;
}

GeometrySpec random_geometry(std::uint64_t seed, int n, double amplitude) {
  GeometrySpec g;
  g.name = "random";
  g.n = n;
  g.j_kind = JKind::Conjugated;
  g.seed = seed;
  g.amplitude = amplitude;
  g.domain = torus_box(2 * n);
  g.periodic.assign(sz(2 * n), true);
  if (amplitude == 0.0) {
    g.expected.gh_class = "Kahler";
    g.expected.zero_residuals = all_section_residuals();
  } else {
    g.expected.gh_class = n == 2 ? "W2+W4" : "W1+W2+W3+W4";
    g.expected.positive_residuals = {"harmonic"};
  }
  return g;
}

std::vector<std::string> catalog_names() { return {"flat", "conformal", "hopf", "s6", "hermitian", "random"}; }

std::vector<std::vector<double>> sample_points(const GeometrySpec& spec, int count, std::uint64_t seed) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const int d = spec.dim();
  if (d > 16) throw std::invalid_argument("sampling supports at most 16 coordinates");
  std::vector<std::vector<double>> out;
  std::uint64_t index = 17 + seed * 1009;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * (count + 1)) throw std::runtime_error("domain rejection sampling did not converge");
    std::vector<double> p(sz(d));
    for (int k = 0; k < d; ++k) {
      double f = 1.0, r = 0.0;
      for (std::uint64_t i = index; i > 0; i /= static_cast<std::uint64_t>(kPrimes[k])) {
        f /= kPrimes[k];
        r += f * static_cast<double>(i % static_cast<std::uint64_t>(kPrimes[k]));
      }
      p[sz(k)] = spec.domain.lo[sz(k)] + r * (spec.domain.hi[sz(k)] - spec.domain.lo[sz(k)]);
    }
    ++index;
    if (spec.domain.contains(p)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace aht
