#include "aht/unstruct.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace aht {

namespace {

std::size_t sz(int k) { return static_cast<std::size_t>(k); }

Mat slice2(const PointTensor& t, std::size_t base, int n) {
  Mat m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = t[base + sz(r * n + c)];
  return m;
}

// Frame tensor with leading slots -> nested matrices of the last two slots.
EndoForm to_form(const PointTensor& t, int n) {
  EndoForm f(sz(n));
  for (int a = 0; a < n; ++a) f[sz(a)] = slice2(t, sz(a * n * n), n);
  return f;
}

EndoForm2 to_form2(const PointTensor& t, int n) {
  EndoForm2 f(sz(n), EndoForm(sz(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) f[sz(a)][sz(b)] = slice2(t, sz((a * n + b) * n * n), n);
  return f;
}

// Riemann-type frame tensor (a, b, c; d) -> R[a][b] with matrix entry (d, c).
EndoForm2 curvature_form(const PointTensor& t, int n, std::size_t base) {
  EndoForm2 f(sz(n), EndoForm(sz(n), Mat::Zero(n, n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) f[sz(a)][sz(b)](d, c) = t[base + sz(((a * n + b) * n + c) * n + d)];
  return f;
}

void check_abort(double defect, double scale, double tol, const char* what) {
  if (tol > 0.0 && defect > tol * (1.0 + scale)) {
    std::ostringstream os;
    os << what << " cross-check failed: defect " << defect;
    throw ConventionError(os.str());
  }
}

// Dense row-major matrices over double or Jet, used by random_structure.
template <class T>
using Dense = std::vector<T>;

template <class T>
Dense<T> matmul(const Dense<T>& a, const Dense<T>& b, int n) {
  Dense<T> out(sz(n * n), scalar_like(a[0], 0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const T& aik = a[sz(i * n + k)];
      for (int j = 0; j < n; ++j) {
        if constexpr (std::is_same_v<T, double>)
          out[sz(i * n + j)] += aik * b[sz(k * n + j)];
        else
          out[sz(i * n + j)].add_product(aik, b[sz(k * n + j)]);
      }
    }
  return out;
}

template <class T>
Dense<T> transpose(const Dense<T>& a, int n) {
  Dense<T> out = a;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[sz(i * n + j)] = a[sz(j * n + i)];
  return out;
}

// exp(S) by scaling and squaring around a truncated Taylor series.
template <class T>
Dense<T> expm(Dense<T> s, int n) {
  double norm = 0.0;
  for (const T& v : s) norm = std::max(norm, std::abs(value_of(v)) * n);
  int squarings = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (T& v : s) v *= scale;
  Dense<T> result(sz(n * n), scalar_like(s[0], 0.0));
  for (int i = 0; i < n; ++i) result[sz(i * n + i)] += 1.0;
  Dense<T> term = result;
  for (int k = 1; k <= 14; ++k) {
    term = matmul(term, s, n);
    for (T& v : term) v *= 1.0 / k;
    for (std::size_t q = 0; q < result.size(); ++q) result[q] += term[q];
  }
  for (int q = 0; q < squarings; ++q) result = matmul(result, result, n);
  return result;
}

// sum_k c0 + a_k cos x_k + b_k sin x_k.
struct TrigPoly {
  double c0 = 0.0;
  std::vector<double> a, b;

  template <class T>
  T operator()(std::span<const T> x) const {
    T acc = scalar_like(x[0], c0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      using std::cos;
      using std::sin;
      acc += a[k] * cos(x[k]);
      acc += b[k] * sin(x[k]);
    }
    return acc;
  }
};

TrigPoly random_trig(std::mt19937_64& rng, int dim, double amplitude) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = amplitude / std::sqrt(1.0 + 2.0 * dim);
  TrigPoly p;
  p.c0 = scale * gauss(rng);
  for (int k = 0; k < dim; ++k) {
    p.a.push_back(scale * gauss(rng));
    p.b.push_back(scale * gauss(rng));
  }
  return p;
}

struct RandomSpec {
  int dim;
  std::vector<std::pair<std::pair<int, int>, TrigPoly>> skew;  // upper-triangle entries of S
  TrigPoly conformal;
  bool has_conformal;
  Mat j0;

  template <class T>
  Dense<T> complex_structure(std::span<const T> x) const {
    const int n = dim;
    Dense<T> s(sz(n * n), scalar_like(x[0], 0.0));
    for (const auto& [ij, poly] : skew) {
      const T v = poly(x);
      s[sz(ij.first * n + ij.second)] = v;
      s[sz(ij.second * n + ij.first)] = -1.0 * v;
    }
    const Dense<T> e = expm(s, n);
    Dense<T> j0d(sz(n * n), scalar_like(x[0], 0.0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) j0d[sz(i * n + k)] += j0(i, k);
    // E orthogonal, so E^{-1} = E^T.
    return matmul(matmul(e, j0d, n), transpose(e, n), n);
  }

  template <class T>
  Dense<T> metric(std::span<const T> x) const {
    const int n = dim;
    Dense<T> g(sz(n * n), scalar_like(x[0], 0.0));
    using std::exp;
    const T factor = has_conformal ? exp(conformal(x)) : scalar_like(x[0], 1.0);
    for (int i = 0; i < n; ++i) g[sz(i * n + i)] = factor;
    return g;
  }
};

Mat dense_to_mat(const std::vector<double>& d, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = d[sz(i * n + j)];
  return m;
}

}  // namespace

JetTensor ComplexStructureField::as_tensor(std::span<const Jet> x) const {
  const auto j = jets(x);
  if (j.size() != sz(dim * dim)) throw std::logic_error("complex structure evaluator returned wrong size");
  JetTensor t(dim, {Variance::Up, Variance::Down}, x.empty() ? 0 : x[0].degree());
  for (std::size_t k = 0; k < j.size(); ++k) t[k] = j[k];
  return t;
}

double AlmostHermitianStructure::compatibility_defect(std::span<const double> point) const {
  const int n = dim();
  const auto x = coordinate_jets(point, 1);
  const auto g = metric.jets(x);
  const auto j = complex_structure.jets(x);
  auto G = [&](int r, int c) -> const Jet& { return g[sz(r * n + c)]; };
  auto Jm = [&](int r, int c) -> const Jet& { return j[sz(r * n + c)]; };
  double worst = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      Jet sq(x[0].layout(), r == c ? 1.0 : 0.0);
      for (int k = 0; k < n; ++k) sq.add_product(Jm(r, k), Jm(k, c));
      Jet herm = -1.0 * G(r, c);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) herm += Jm(a, r) * G(a, b) * Jm(b, c);
      for (double v : sq.coeffs()) worst = std::max(worst, std::abs(v));
      for (double v : herm.coeffs()) worst = std::max(worst, std::abs(v));
    }
  return worst;
}

Mat standard_complex_structure(int dim) {
  if (dim % 2 != 0) throw std::invalid_argument("almost complex structures need even dimension");
  Mat j = Mat::Zero(dim, dim);
  for (int k = 0; k < dim / 2; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;
    j(2 * k, 2 * k + 1) = -1.0;
  }
  return j;
}

EndoForm zero_form(int dim) { return EndoForm(sz(dim), Mat::Zero(dim, dim)); }
EndoForm2 zero_form2(int dim) { return EndoForm2(sz(dim), zero_form(dim)); }

double norm_sq(const EndoForm& f) {
  double s = 0.0;
  for (const Mat& m : f) s += m.squaredNorm();
  return s;
}

double norm_sq(const EndoForm2& f) {
  double s = 0.0;
  for (const EndoForm& e : f) s += norm_sq(e);
  return s;
}

EndoForm operator+(const EndoForm& a, const EndoForm& b) {
  EndoForm out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
  return out;
}

EndoForm operator-(const EndoForm& a, const EndoForm& b) {
  EndoForm out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
  return out;
}

EndoForm operator*(double c, const EndoForm& a) {
  EndoForm out = a;
  for (Mat& m : out) m *= c;
  return out;
}

Mat evaluate(const EndoForm& f, const Vec& v) {
  Mat out = Mat::Zero(f[0].rows(), f[0].cols());
  for (std::size_t a = 0; a < f.size(); ++a) out += v(static_cast<Eigen::Index>(a)) * f[a];
  return out;
}

JetTensor kahler_form(const AlmostHermitianStructure& s, std::span<const Jet> x) {
  const int n = s.dim();
  const auto g = s.metric.jets(x);
  const auto j = s.complex_structure.jets(x);
  JetTensor w(n, {Variance::Down, Variance::Down}, x[0].degree());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet acc(x[0].layout(), 0.0);
      for (int k = 0; k < n; ++k) acc.add_product(g[sz(a * n + k)], j[sz(k * n + b)]);
      w.at({a, b}) = std::move(acc);
    }
  return w;
}

Mat kahler_form_frame(const Mat& J) { return J; }

StructurePoint evaluate_structure(const AlmostHermitianStructure& s, std::span<const double> point,
                                  const EvaluateOptions& opts) {
  const int n = s.dim();
  if (opts.degree < 2) throw std::invalid_argument("structure evaluation needs jet degree >= 2");
  if (opts.curvature_derivative && opts.degree < 3)
    throw std::invalid_argument("curvature derivative needs jet degree >= 3");
  LocalChart chart(s.metric, point, opts.degree);
  StructurePoint sp;
  sp.dim = n;
  sp.point.assign(point.begin(), point.end());
  sp.frame = opts.rotation ? chart.frame().rotated(*opts.rotation) : chart.frame();

  const JetTensor jt = s.complex_structure.as_tensor(chart.coordinates());
  const JetTensor djt = chart.covariant_derivative(jt);
  const JetTensor ddjt = chart.covariant_derivative(djt);
  const JetTensor wt = kahler_form(s, chart.coordinates());

  sp.J = sp.frame.to_frame(jt.value()).as_matrix();
  sp.dJ = to_form(sp.frame.to_frame(djt.value()), n);
  sp.ddJ = to_form2(sp.frame.to_frame(ddjt.value()), n);
  sp.domega = to_form(sp.frame.to_frame(chart.covariant_derivative(wt).value()), n);

  const JetTensor& rt = chart.riemann();
  sp.R = curvature_form(sp.frame.to_frame(rt.value()), n, 0);
  if (opts.curvature_derivative) {
    const PointTensor drt = sp.frame.to_frame(chart.covariant_derivative(rt).value());
    sp.dR.resize(sz(n));
    for (int m = 0; m < n; ++m) sp.dR[sz(m)] = curvature_form(drt, n, sz(m) * sz(n * n * n * n));
  }
  return sp;
}

UnitaryProjection project_u_uperp(const Mat& a, const Mat& J, double skew_tol) {
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > skew_tol * (1.0 + a.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("project_u_uperp expects a skew endomorphism");
  return {0.5 * (a - J * a * J), 0.5 * (a + J * a * J)};
}

std::vector<PointTensor> UnitaryGroup::stabilized_tensors() const {
  const int n = static_cast<int>(J_.rows());
  return {PointTensor::bilinear(Mat::Identity(n, n)), PointTensor::endomorphism(J_),
          PointTensor::bilinear(kahler_form_frame(J_))};
}

Vec torsion_trace(const EndoForm& xi) {
  const int n = static_cast<int>(xi.size());
  Vec v = Vec::Zero(n);
  for (int a = 0; a < n; ++a) v += xi[sz(a)].col(a);
  return v;
}

Vec codifferential_from_trace(const EndoForm& xi, const Mat& J) { return 2.0 * J * torsion_trace(xi); }

EndoForm w4_from_trace(const Vec& v, const Mat& J) {
  const int dim = static_cast<int>(v.size());
  const int n = dim / 2;
  EndoForm out = zero_form(dim);
  if (n < 2) return out;
  const Vec jv = J * v;
  for (int x = 0; x < dim; ++x) {
    const Vec ex = Vec::Unit(dim, x);
    const Vec jex = J * ex;
    out[sz(x)] = (v * ex.transpose() - ex * v.transpose() - jv * jex.transpose() + jex * jv.transpose()) /
                 (2.0 * (n - 1));
  }
  return out;
}

GrayHervellaParts gray_hervella_decompose(const EndoForm& xi, const Mat& J, const Vec& dstar_omega) {
  const int dim = static_cast<int>(xi.size());
  const int n = dim / 2;
  GrayHervellaParts p{zero_form(dim), zero_form(dim), zero_form(dim), zero_form(dim)};
  if (n < 2) return p;
  // W1 + W2 part: a_X = 1/2 (xi_X - xi_{JX} J).
  EndoForm a = zero_form(dim);
  for (int x = 0; x < dim; ++x) a[sz(x)] = 0.5 * (xi[sz(x)] - evaluate(xi, J.col(x)) * J);
  const EndoForm b = xi - a;
  // Total alternation of A(X, Y, Z) = <a_X Y, Z> = a[X](Z, Y).
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y)
      for (int z = 0; z < dim; ++z)
        p.w1[sz(x)](z, y) = (a[sz(x)](z, y) + a[sz(y)](x, z) + a[sz(z)](y, x)) / 3.0;
  p.w2 = a - p.w1;
  const Vec& w = dstar_omega;
  const Vec jw = J * w;
  for (int x = 0; x < dim; ++x) {
    const Vec ex = Vec::Unit(dim, x);
    const Vec jex = J * ex;
    const Mat form = (wedge2(ex, w) - wedge2(jex, jw)) * (-1.0 / (4.0 * (n - 1)));
    p.w4[sz(x)] = J * form.transpose();
  }
  p.w3 = b - p.w4;
  return p;
}

double TorsionTensor::norm() const { return std::sqrt(norm_sq(xi)); }

double TorsionTensor::component_norm(int k) const {
  switch (k) {
    case 1: return std::sqrt(norm_sq(xi1));
    case 2: return std::sqrt(norm_sq(xi2));
    case 3: return std::sqrt(norm_sq(xi3));
    case 4: return std::sqrt(norm_sq(xi4));
    default: throw std::out_of_range("Gray-Hervella component index must be 1..4");
  }
}

TorsionTensor torsion_from_frame(const Mat& J, const EndoForm& dJ, std::vector<double> point, double abort_tol) {
  const int dim = static_cast<int>(J.rows());
  TorsionTensor t;
  t.point = std::move(point);
  t.dim = dim;
  t.xi.resize(sz(dim));
  t.dstar_omega = Vec::Zero(dim);
  for (int a = 0; a < dim; ++a) {
    t.xi[sz(a)] = -0.5 * J * dJ[sz(a)];
    t.dstar_omega -= dJ[sz(a)].row(a).transpose();
    t.skew_defect = std::max(t.skew_defect, (t.xi[sz(a)] + t.xi[sz(a)].transpose()).cwiseAbs().maxCoeff());
    t.anticommute_defect =
        std::max(t.anticommute_defect, (t.xi[sz(a)] * J + J * t.xi[sz(a)]).cwiseAbs().maxCoeff());
  }
  t.lee_vector = torsion_trace(t.xi);
  const double scale = t.norm();
  t.lee_crosscheck = (t.lee_vector + 0.5 * J * t.dstar_omega).cwiseAbs().maxCoeff();
  check_abort(t.lee_crosscheck, scale, abort_tol, "Lee vector");

  const GrayHervellaParts parts = gray_hervella_decompose(t.xi, J, t.dstar_omega);
  t.xi1 = parts.w1;
  t.xi2 = parts.w2;
  t.xi3 = parts.w3;
  t.xi4 = parts.w4;
  if (dim >= 4) {
    const EndoForm alt = w4_from_trace(t.lee_vector, J);
    t.w4_crosscheck = std::sqrt(norm_sq(alt - t.xi4));
    check_abort(t.w4_crosscheck, scale, abort_tol, "W4 component");
  }
  return t;
}

TorsionTensor intrinsic_torsion(const StructurePoint& sp, double abort_tol) {
  TorsionTensor t = torsion_from_frame(sp.J, sp.dJ, sp.point, abort_tol);
  // 2 <xi_X Y, Z> = -(nabla_X omega)(Y, JZ), with nabla omega from the coordinate Kahler form.
  const int n = sp.dim;
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    const Mat lhs = 2.0 * t.xi[sz(x)].transpose();        // (Y, Z) -> 2 <xi_X Y, Z>
    const Mat rhs = -sp.domega[sz(x)] * sp.J;              // (Y, Z) -> -(nabla_X omega)(Y, J Z)
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  t.omega_crosscheck = worst;
  check_abort(worst, t.norm(), abort_tol, "Kahler form derivative");
  return t;
}

TorsionTensor intrinsic_torsion(const AlmostHermitianStructure& s, std::span<const double> point, int degree) {
  EvaluateOptions opts;
  opts.degree = degree;
  opts.curvature_derivative = false;
  return intrinsic_torsion(evaluate_structure(s, point, opts));
}

Vec lee_vector(const AlmostHermitianStructure& s, std::span<const double> point, int degree) {
  return intrinsic_torsion(s, point, degree).lee_vector;
}

TensorField torsion_field(const AlmostHermitianStructure& s) {
  return [s](std::span<const Jet> x) {
    const int n = s.dim();
    std::vector<double> p(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) p[k] = x[k].value();
    const int degree = x[0].degree();
    LocalChart chart(s.metric, p, degree);
    const JetTensor jt = s.complex_structure.as_tensor(chart.coordinates());
    const JetTensor dj = chart.covariant_derivative(jt);  // (i; k up; j down), degree - 1
    const JetTensor jl = jt.truncate(degree - 1);
    JetTensor xi(n, {Variance::Up, Variance::Down, Variance::Down}, degree - 1);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet acc(n, degree - 1, 0.0);
          for (int q = 0; q < n; ++q) acc.add_product(jl.at({k, q}), dj.at({i, q, j}), -0.5);
          xi.at({k, i, j}) = std::move(acc);
        }
    return xi;
  };
}

PointTensor act(const Mat& a, const PointTensor& t) {
  PointTensor out(t.dim(), t.slots());
  for (int s = 0; s < t.rank(); ++s) {
    if (t.slots()[sz(s)] == Variance::Up)
      out += transform_slot(t, s, a, Variance::Up);
    else
      out -= transform_slot(t, s, a.transpose(), Variance::Down);
  }
  return out;
}

EndoForm act_on_form(const Mat& a, const EndoForm& f) {
  const int n = static_cast<int>(f.size());
  EndoForm out(sz(n));
  for (int b = 0; b < n; ++b) {
    out[sz(b)] = a * f[sz(b)] - f[sz(b)] * a;
    for (int c = 0; c < n; ++c) out[sz(b)] -= a(c, b) * f[sz(c)];
  }
  return out;
}

PointTensor minimal_derivative(const TensorField& t, const AlmostHermitianStructure& s,
                               std::span<const double> point, int degree) {
  EvaluateOptions opts;
  opts.degree = degree;
  opts.curvature_derivative = false;
  const StructurePoint sp = evaluate_structure(s, point, opts);
  const TorsionTensor tor = intrinsic_torsion(sp);
  LocalChart chart(s.metric, point, degree);
  const JetTensor field = t(chart.coordinates());
  PointTensor out = sp.frame.to_frame(chart.covariant_derivative(field).value());
  const PointTensor base = sp.frame.to_frame(field.value());
  const std::size_t inner = base.size();
  for (int a = 0; a < sp.dim; ++a) {
    const PointTensor corr = act(tor.xi[sz(a)], base);
    for (std::size_t k = 0; k < inner; ++k) out[sz(a) * inner + k] += corr[k];
  }
  return out;
}

double minimal_connection_contract(const AlmostHermitianStructure& s, std::span<const double> point, int degree,
                                   double abort_tol) {
  const TensorField g = [&s](std::span<const Jet> x) { return s.metric.as_tensor(x); };
  const TensorField j = [&s](std::span<const Jet> x) { return s.complex_structure.as_tensor(x); };
  const TensorField w = [&s](std::span<const Jet> x) { return kahler_form(s, x); };
  double worst = 0.0;
  for (const auto& f : {g, j, w}) worst = std::max(worst, minimal_derivative(f, s, point, degree).max_abs());
  check_abort(worst, intrinsic_torsion(s, point, degree).norm(), abort_tol, "minimal connection");
  return worst;
}

AlmostHermitianStructure random_structure(std::uint64_t seed, int n, double amplitude,
                                          const RandomStructureOptions& opts) {
  if (n < 1) throw std::invalid_argument("random_structure needs n >= 1");
  const int dim = 2 * n;
  std::mt19937_64 rng(seed);
  auto spec = std::make_shared<RandomSpec>();
  spec->dim = dim;
  spec->j0 = standard_complex_structure(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) spec->skew.push_back({{i, j}, random_trig(rng, dim, amplitude)});
  spec->has_conformal = opts.metric_amplitude != 0.0;
  if (spec->has_conformal) spec->conformal = random_trig(rng, dim, opts.metric_amplitude);

  AlmostHermitianStructure s;
  s.name = "random(seed=" + std::to_string(seed) + ")";
  s.metric.dim = dim;
  s.metric.jets = [spec](std::span<const Jet> x) { return spec->metric<Jet>(x); };
  s.metric.values = [spec, dim](std::span<const double> x) { return dense_to_mat(spec->metric<double>(x), dim); };
  s.complex_structure.dim = dim;
  s.complex_structure.jets = [spec](std::span<const Jet> x) { return spec->complex_structure<Jet>(x); };
  s.complex_structure.values = [spec, dim](std::span<const double> x) {
    return dense_to_mat(spec->complex_structure<double>(x), dim);
  };
  return s;
}

}  // namespace aht
