#include "aht/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aht/expr.hpp"

namespace aht {

namespace {

std::size_t sz(int k) { return static_cast<std::size_t>(k); }

double frob(const Mat& a, const Mat& b) { return (a.array() * b.array()).sum(); }

void check_abort(double defect, double scale, double tol, const char* what) {
  if (tol > 0.0 && defect > tol * scale) {
    std::ostringstream os;
    os << what << " cross-check failed: defect " << defect << " at scale " << scale;
    throw ConventionError(os.str());
  }
}

// <R(e_a, e_b) e_c, e_d>
double r4(const PointAnalysis& pa, int a, int b, int c, int d) { return pa.sp.R[sz(a)][sz(b)](d, c); }

// W1..W4 split of a T* (x) u-perp tensor that is not itself a torsion.
GrayHervellaParts split(const EndoForm& f, const Mat& J) {
  return gray_hervella_decompose(f, J, codifferential_from_trace(f, J));
}

// Transpose so that entry (X, Y) = <M X, Y>.
Mat as_bilinear(const Mat& m) { return m.transpose(); }

// Matrix (a, Y) = <nabla_{e_a} v, e_Y> for the Lee vector v.
Mat lee_derivative(const PointAnalysis& pa) {
  const int d = pa.dim();
  Mat nv = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    Vec col = Vec::Zero(d);
    for (int b = 0; b < d; ++b) col += pa.dxi[sz(a)][sz(b)].col(b);
    nv.row(a) = col.transpose();
  }
  return nv;
}

// dv^flat(X, Y) = <nabla_X v, Y> - <nabla_Y v, X>.
Mat lee_differential(const PointAnalysis& pa) {
  const Mat nv = lee_derivative(pa);
  return nv - nv.transpose();
}

// dRicstar[W](X, Y) = (nabla_W Ric*)(X, Y).
std::vector<Mat> ricci_star_derivative(const PointAnalysis& pa) {
  const int d = pa.dim();
  const auto& sp = pa.sp;
  if (sp.dR.empty()) throw std::invalid_argument("curvature derivative was not evaluated");
  std::vector<Mat> out(sz(d), Mat::Zero(d, d));
  for (int w = 0; w < d; ++w)
    for (int x = 0; x < d; ++x)
      for (int i = 0; i < d; ++i) {
        const Mat& m = sp.R[sz(x)][sz(i)];
        const Mat t = sp.J.transpose() * sp.dR[sz(w)][sz(x)][sz(i)] * sp.J +
                      sp.J.transpose() * m * sp.dJ[sz(w)] + sp.dJ[sz(w)].transpose() * m * sp.J;
        out[sz(w)].row(x) += t.row(i);
      }
  return out;
}

Mat ricci_star_matrix(const PointAnalysis& pa) {
  const int d = pa.dim();
  Mat rs = Mat::Zero(d, d);
  for (int x = 0; x < d; ++x)
    for (int i = 0; i < d; ++i) rs.row(x) += (pa.sp.J.transpose() * pa.sp.R[sz(x)][sz(i)] * pa.sp.J).row(i);
  return rs;
}

// -sum_j (nabla_j Ric*)(X, e_j) and the trace of nabla Ric*.
std::pair<Vec, Vec> ricci_star_divergences(const PointAnalysis& pa) {
  const int d = pa.dim();
  const std::vector<Mat> drs = ricci_star_derivative(pa);
  Vec div = Vec::Zero(d), ds = Vec::Zero(d);
  for (int x = 0; x < d; ++x) {
    for (int j = 0; j < d; ++j) div(x) -= drs[sz(j)](x, j);
    ds(x) = drs[sz(x)].trace();
  }
  return {div, ds};
}

// sum_jk Ric*(j, k) <xi_X e_j, e_k>
Vec ricci_star_against_xi(const PointAnalysis& pa, const Mat& rs) {
  const int d = pa.dim();
  Vec out(d);
  for (int x = 0; x < d; ++x) out(x) = frob(rs, pa.torsion.xi[sz(x)].transpose());
  return out;
}

// Trace sum_i (nabla^U_{e_i} xi)_{e_i}.
Mat minimal_trace(const PointAnalysis& pa) {
  Mat t = Mat::Zero(pa.dim(), pa.dim());
  for (int i = 0; i < pa.dim(); ++i) t += pa.duxi[sz(i)][sz(i)];
  return t;
}

Mat coderivative_matrix(const PointAnalysis& pa) {
  Mat t = Mat::Zero(pa.dim(), pa.dim());
  for (int i = 0; i < pa.dim(); ++i) t -= pa.dxi[sz(i)][sz(i)];
  return t;
}

Mat rough_laplacian(const PointAnalysis& pa) {
  Mat l = Mat::Zero(pa.dim(), pa.dim());
  for (int a = 0; a < pa.dim(); ++a) l -= pa.sp.ddJ[sz(a)][sz(a)];
  return l;
}

Mat perp(const Mat& a, const Mat& J) { return 0.5 * (a + J * a * J); }

// Skew A acting on a 2-form with matrix Omega.
Mat act_on_two_form(const Mat& a, const Mat& omega) { return a * omega - omega * a; }

bool negligible(double v, const PointAnalysis& pa, double tol) { return v <= tol * pa.scale; }

std::string component_label(const std::array<double, 4>& c, double threshold) {
  std::string label;
  for (int k = 0; k < 4; ++k)
    if (c[sz(k)] > threshold) label += (label.empty() ? "W" : "+W") + std::to_string(k + 1);
  return label.empty() ? "Kahler" : label;
}

}  // namespace

PointAnalysis analyze_point(const AlmostHermitianStructure& s, std::span<const double> point,
                            const AnalysisOptions& opts) {
  EvaluateOptions eo;
  eo.degree = std::max(opts.degree, 3);
  eo.curvature_derivative = true;
  eo.rotation = opts.rotation;
  PointAnalysis pa;
  pa.sp = evaluate_structure(s, point, eo);
  pa.torsion = intrinsic_torsion(pa.sp, opts.abort_tol);
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  const EndoForm& xi = pa.torsion.xi;
  pa.dxi = zero_form2(d);
  pa.duxi = zero_form2(d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b)
      pa.dxi[sz(a)][sz(b)] = -0.5 * (pa.sp.dJ[sz(a)] * pa.sp.dJ[sz(b)] + J * pa.sp.ddJ[sz(a)][sz(b)]);
    pa.duxi[sz(a)] = pa.dxi[sz(a)] + act_on_form(xi[sz(a)], xi);
  }
  pa.ricci = Mat::Zero(d, d);
  for (int x = 0; x < d; ++x)
    for (int i = 0; i < d; ++i) pa.ricci.row(x) += pa.sp.R[sz(x)][sz(i)].row(i);
  pa.scale = 1.0 + pa.torsion.norm() + std::sqrt(norm_sq(pa.sp.R));
  return pa;
}

Coderivative coderivative_xi(const PointAnalysis& pa, double abort_tol) {
  Coderivative c;
  c.by_definition = coderivative_matrix(pa);
  c.by_minimal = -minimal_trace(pa) - evaluate(pa.torsion.xi, pa.torsion.lee_vector);
  c.agreement = (c.by_definition - c.by_minimal).norm();
  const Mat& J = pa.sp.J;
  c.uperp_defect = (c.by_definition + c.by_definition.transpose()).norm() +
                   (J * c.by_definition + c.by_definition * J).norm();
  check_abort(c.agreement, pa.scale * pa.scale, abort_tol, "coderivative");
  return c;
}

SectionResiduals section_residuals(const PointAnalysis& pa) {
  const int d = pa.dim();
  const auto& R = pa.sp.R;
  const auto& xi = pa.torsion.xi;
  const Mat& J = pa.sp.J;
  SectionResiduals r;
  r.harmonic = coderivative_matrix(pa).norm();

  r.harmonic_map_form = Vec::Zero(d);
  for (int m = 0; m < d; ++m)
    for (int a = 0; a < d; ++a) r.harmonic_map_form(m) += frob(xi[sz(a)], R[sz(a)][sz(m)]);
  r.harmonic_map = r.harmonic_map_form.cwiseAbs().maxCoeff();

  double vert = 0, horiz = 0, flat = 0, superflat = 0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      const Mat sym = pa.dxi[sz(x)][sz(y)] + pa.dxi[sz(y)][sz(x)];
      const Mat rp = perp(R[sz(x)][sz(y)], J);
      vert += sym.squaredNorm();
      flat += rp.squaredNorm();
      superflat += (-0.5 * (sym + rp)).squaredNorm();
      for (int z = 0; z < d; ++z) {
        const double h = frob(xi[sz(x)], R[sz(y)][sz(z)]) + frob(xi[sz(y)], R[sz(x)][sz(z)]);
        horiz += h * h;
      }
    }
  r.vert_geodesic = std::sqrt(vert);
  r.horiz_geodesic = std::sqrt(horiz);
  r.flatness = std::sqrt(flat);
  r.superflat = std::sqrt(superflat);

  // T(X, Y) = xi_X Y - xi_Y X.
  Mat a = Mat::Zero(d, d), dstar = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const auto& di = pa.dxi[sz(i)];
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) {
        a(y, z) += di[sz(y)](i, z) - di[sz(z)](i, y);
        dstar(y, z) -= di[sz(i)](z, y) - di[sz(y)](z, i);
      }
  }
  r.torsion_iv_a = a.cwiseAbs().maxCoeff();
  r.torsion_iv_b = (0.5 * (dstar + dstar.transpose())).norm();
  return r;
}

StarRicci star_ricci(const PointAnalysis& pa, double abort_tol) {
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  StarRicci s;
  s.ric_star = ricci_star_matrix(pa);
  s.s_star = s.ric_star.trace();
  s.sym = 0.5 * (s.ric_star + s.ric_star.transpose());
  s.alt = 0.5 * (s.ric_star - s.ric_star.transpose());
  const Vec v = pa.torsion.lee_vector;
  Mat m = -evaluate(pa.torsion.xi, J * v) * J;
  for (int i = 0; i < d; ++i) m += evaluate(pa.duxi[sz(i)], J.col(i)) * J;
  s.alt_formula = as_bilinear(m);
  s.crosscheck = (s.alt - s.alt_formula).norm();
  s.j_symmetry_defect = (J.transpose() * s.ric_star * J - s.ric_star.transpose()).norm();
  s.alt_hermitian_defect = (J.transpose() * s.alt * J + s.alt).norm();
  check_abort(s.crosscheck, pa.scale * pa.scale, abort_tol, "Ricci-star skew part");
  return s;
}

HermitianHarmonicity hermitian_harmonicity(const PointAnalysis& pa) {
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  HermitianHarmonicity h;
  const Mat l = rough_laplacian(pa);
  h.rough_laplacian_omega = l;
  h.comm_JLapJ = (J * l - l * J).norm();
  h.herm_defect = (J.transpose() * l * J - l).norm();
  Mat q = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) q += pa.torsion.xi[sz(i)].transpose() * J * pa.torsion.xi[sz(i)];
  h.cond_iv = (l + 4.0 * q).norm();
  const Vec theta = 0.5 * J * pa.torsion.dstar_omega;
  h.lck_laplacian = (l - 2.0 * theta.squaredNorm() * J).norm();
  return h;
}

std::vector<NamedResidual> identity_suite(const PointAnalysis& pa) {
  const int d = pa.dim();
  const int n = pa.n();
  const Mat& J = pa.sp.J;
  const TorsionTensor& t = pa.torsion;
  const Vec v = t.lee_vector;
  std::vector<NamedResidual> out;

  // Components of nabla^U xi, contracted in the direction slot.
  std::array<Mat, 4> tk;
  tk.fill(Mat::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    const GrayHervellaParts p = split(pa.duxi[sz(i)], J);
    tk[0] += p.w1[sz(i)];
    tk[1] += p.w2[sz(i)];
    tk[2] += p.w3[sz(i)];
    tk[3] += p.w4[sz(i)];
  }
  const std::array<const EndoForm*, 4> comp{&t.xi1, &t.xi2, &t.xi3, &t.xi4};
  auto xi_k_v = [&](int k) { return as_bilinear(evaluate(*comp[sz(k)], v)); };

  // d^2 omega = 0 read through the minimal connection.
  if (n >= 2) {
    auto cross = [&](const EndoForm& first, const EndoForm& second) {
      Mat m(d, d);
      for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
          double acc = 0;
          for (int i = 0; i < d; ++i) acc += first[sz(x)].col(i).dot(second[sz(i)].col(y));
          m(x, y) = acc;
        }
      return Mat(m - m.transpose());
    };
    const double nm1 = n - 1.0;
    const Mat res = 3.0 * as_bilinear(tk[0]) - as_bilinear(tk[2]) + (n - 2.0) * as_bilinear(tk[3]) +
                    cross(t.xi3, t.xi1) + cross(t.xi3, t.xi2) - (n - 5.0) / nm1 * xi_k_v(0) -
                    (n - 2.0) / nm1 * xi_k_v(1) + xi_k_v(2);
    out.push_back({"d2omega", res.norm()});

    // Divergence of the W4 part against the Lee form.
    const Mat dv = lee_differential(pa);
    const Mat prev = 2.0 * nm1 * as_bilinear(tk[3]) - (dv - J.transpose() * dv * J) + 4.0 * xi_k_v(0) -
                     2.0 * xi_k_v(1);
    out.push_back({"w4_divergence", prev.norm()});
  }

  // nabla* nabla omega expanded through the action of xi.
  {
    const Mat l = rough_laplacian(pa);
    Mat rhs = act_on_two_form(minimal_trace(pa), J) + act_on_two_form(evaluate(t.xi, v), J);
    for (int i = 0; i < d; ++i) rhs -= act_on_two_form(t.xi[sz(i)], act_on_two_form(t.xi[sz(i)], J));
    out.push_back({"laplacian_omega", (l - rhs).norm()});
  }

  // Divergence of Ric* against curvature and torsion.
  const Mat rs = ricci_star_matrix(pa);
  {
    const auto [div, ds] = ricci_star_divergences(pa);
    const Vec rx = ricci_star_against_xi(pa, rs);
    Vec res(d);
    for (int x = 0; x < d; ++x) {
      double curv = 0;
      for (int i = 0; i < d; ++i) curv += frob(pa.sp.R[sz(i)][sz(x)], evaluate(t.xi, J.col(i)) * J);
      res(x) = 2.0 * div(x) + ds(x) - (2.0 * curv - 4.0 * rs.row(x).dot(v) + 4.0 * rx(x));
    }
    out.push_back({"ricci_star_divergence", res.norm()});
  }

  // (n - 1) <xi_(4) e_i, R(e_i, X)> = (Ric - Ric*)(X, v).
  if (n >= 2) {
    Vec res(d);
    for (int x = 0; x < d; ++x) {
      double lhs = 0;
      for (int i = 0; i < d; ++i) lhs += frob(t.xi4[sz(i)], pa.sp.R[sz(i)][sz(x)]);
      res(x) = (n - 1.0) * lhs - (pa.ricci - rs).row(x).dot(v);
    }
    out.push_back({"w4_curvature", res.norm()});
  }

  const Coderivative c = coderivative_xi(pa, 0.0);
  out.push_back({"coderivative_forms", c.agreement});
  out.push_back({"coderivative_uperp", c.uperp_defect});
  const StarRicci s = star_ricci(pa, 0.0);
  out.push_back({"ricci_star_alt", s.crosscheck});
  out.push_back({"ricci_star_j_symmetry", s.j_symmetry_defect});
  out.push_back({"ricci_star_alt_hermitian", s.alt_hermitian_defect});
  out.push_back({"omega_crosscheck", t.omega_crosscheck});
  out.push_back({"lee_crosscheck", t.lee_crosscheck});
  out.push_back({"w4_crosscheck", t.w4_crosscheck});
  return out;
}

double rough_laplacian_crosscheck(const AlmostHermitianStructure& s, const PointAnalysis& pa) {
  const TensorField w = [&s](std::span<const Jet> x) { return kahler_form(s, x); };
  LocalChart chart(s.metric, pa.sp.point, 3);
  const Mat coord = pa.sp.frame.to_frame(connection_laplacian(w, chart)).as_matrix();
  return (coord - rough_laplacian(pa)).norm();
}

std::vector<NamedResidual> harmonicity_equivalents(const PointAnalysis& pa) {
  const SectionResiduals r = section_residuals(pa);
  const HermitianHarmonicity h = hermitian_harmonicity(pa);
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  const Mat minimal = minimal_trace(pa) + evaluate(pa.torsion.xi, pa.torsion.lee_vector);
  Mat action = rough_laplacian(pa);
  for (int i = 0; i < d; ++i)
    action += act_on_two_form(pa.torsion.xi[sz(i)], act_on_two_form(pa.torsion.xi[sz(i)], J));
  return {{"harmonic", r.harmonic},
          {"harmonic_minimal", minimal.norm()},
          {"torsion_iv_a", r.torsion_iv_a},
          {"torsion_iv_b", r.torsion_iv_b},
          {"comm_JLapJ", h.comm_JLapJ},
          {"herm_defect", h.herm_defect},
          {"cond_iv", h.cond_iv},
          {"laplacian_action", action.norm()}};
}

std::string to_string(ClassCondition c) {
  switch (c) {
    case ClassCondition::W1W2W4: return "W1+W2+W4";
    case ClassCondition::QuasiKahler: return "quasi-Kahler";
    case ClassCondition::LocallyConformalAlmostKahler: return "W2+W4";
    case ClassCondition::W1W4: return "W1+W4";
    case ClassCondition::Hermitian: return "Hermitian";
    case ClassCondition::HarmonicMapW1W2W4: return "harmonic-map W1+W2+W4";
    case ClassCondition::HarmonicMapQuasiKahler: return "harmonic-map quasi-Kahler";
    case ClassCondition::HarmonicMapHermitian: return "harmonic-map Hermitian";
    case ClassCondition::HarmonicMapW1W2W4Derived: return "harmonic-map W1+W2+W4 (derived)";
  }
  return "?";
}

ClassCriterion class_criteria(const PointAnalysis& pa, ClassCondition c, double tol) {
  const TorsionTensor& t = pa.torsion;
  const int n = pa.n();
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  ClassCriterion out;
  std::vector<int> absent;
  switch (c) {
    case ClassCondition::W1W2W4:
    case ClassCondition::HarmonicMapW1W2W4:
    case ClassCondition::HarmonicMapW1W2W4Derived: absent = {3}; break;
    case ClassCondition::QuasiKahler:
    case ClassCondition::HarmonicMapQuasiKahler: absent = {3, 4}; break;
    case ClassCondition::LocallyConformalAlmostKahler: absent = {1, 3}; break;
    case ClassCondition::W1W4: absent = {2, 3}; break;
    case ClassCondition::Hermitian:
    case ClassCondition::HarmonicMapHermitian: absent = {1, 2}; break;
  }
  for (int k : absent)
    if (!negligible(t.component_norm(k), pa, tol)) {
      out.reason = "W" + std::to_string(k) + " component present";
      return out;
    }
  if (c == ClassCondition::W1W4 && n == 2) {
    out.reason = "criterion needs n != 2";
    return out;
  }
  if (n < 2) {
    out.reason = "criterion needs n >= 2";
    return out;
  }
  out.applicable = true;
  out.harmonic_residual = coderivative_matrix(pa).norm();

  const StarRicci s = star_ricci(pa, 0.0);
  const Vec v = t.lee_vector;
  const double nm1 = n - 1.0;
  auto xv = [&](const EndoForm& f) { return as_bilinear(evaluate(f, v)); };
  Mat res;
  switch (c) {
    case ClassCondition::W1W2W4: {
      const Mat dv = lee_differential(pa);
      res = nm1 * s.alt - (dv - J.transpose() * dv * J) - 2.0 * (n - 3.0) * xv(t.xi1) - 2.0 * n * xv(t.xi2);
      break;
    }
    case ClassCondition::QuasiKahler: res = s.alt; break;
    case ClassCondition::LocallyConformalAlmostKahler: res = nm1 * s.alt - 2.0 * n * xv(t.xi); break;
    case ClassCondition::W1W4:
      res = nm1 * (n - 5.0) * s.alt - 2.0 * (n + 1.0) * (n - 3.0) * xv(t.xi);
      break;
    case ClassCondition::Hermitian: res = s.alt + 2.0 * xv(t.xi); break;
    default: break;
  }
  if (res.size() > 0) {
    out.class_residual = res.norm();
    return out;
  }

  const auto [div, ds] = ricci_star_divergences(pa);
  const Vec rx = ricci_star_against_xi(pa, s.ric_star);
  Vec r(d);
  for (int x = 0; x < d; ++x) {
    const double rsv = s.ric_star.row(x).dot(v);
    switch (c) {
      case ClassCondition::HarmonicMapW1W2W4:
        r(x) = nm1 * div(x) + 0.5 * nm1 * ds(x) -
               (pa.ricci.row(x).dot(v) - (2.0 * n - 1.0) * rsv + 2.0 * nm1 * rx(x));
        break;
      case ClassCondition::HarmonicMapW1W2W4Derived:
        r(x) = nm1 * div(x) + 0.5 * nm1 * ds(x) -
               (2.0 * pa.ricci.row(x).dot(v) - 2.0 * n * rsv + 2.0 * nm1 * rx(x));
        break;
      case ClassCondition::HarmonicMapQuasiKahler: r(x) = 2.0 * div(x) + ds(x); break;
      case ClassCondition::HarmonicMapHermitian: r(x) = 2.0 * div(x) + ds(x) + 4.0 * rsv - 4.0 * rx(x); break;
      default: break;
    }
  }
  out.class_residual = r.norm();
  if (c == ClassCondition::HarmonicMapQuasiKahler) out.class_residual += s.alt.norm();
  return out;
}

NearlyKahlerSuite nearly_kahler_suite(const PointAnalysis& pa, double tol) {
  const int d = pa.dim();
  const Mat& J = pa.sp.J;
  const TorsionTensor& t = pa.torsion;
  NearlyKahlerSuite s;
  s.applicable = negligible(t.component_norm(2), pa, tol) && negligible(t.component_norm(3), pa, tol) &&
                 negligible(t.component_norm(4), pa, tol);

  // Frame Riemann tensor and its J-rotated copies.
  const std::size_t d4 = sz(d * d * d * d);
  auto idx = [d](int a, int b, int c, int e) { return sz(((a * d + b) * d + c) * d + e); };
  std::vector<double> rt(d4), rj(d4), rjj(d4);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) rt[idx(a, b, c, e)] = r4(pa, a, b, c, e);
  // Rotate the last two slots, then the first two.
  auto rotate = [&](const std::vector<double>& in, int slot) {
    std::vector<double> o(d4, 0.0);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            int ix[4] = {a, b, c, e};
            double acc = 0;
            for (int p = 0; p < d; ++p) {
              int jx[4] = {a, b, c, e};
              jx[slot] = p;
              acc += J(p, ix[slot]) * in[idx(jx[0], jx[1], jx[2], jx[3])];
            }
            o[idx(a, b, c, e)] = acc;
          }
    return o;
  };
  rj = rotate(rotate(rt, 2), 3);  // <R(X,Y)JZ,JW>
  rjj = rotate(rotate(rj, 0), 1);  // <R(JX,JY)JZ,JW>

  double ecxy = 0, ecjxjy = 0, ecxyzw = 0, skew = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Vec xab = t.xi[sz(a)].col(b);
      ecxy = std::max(ecxy, std::abs(rt[idx(a, b, a, b)] - rj[idx(a, b, a, b)] - 4.0 * xab.squaredNorm()));
      const Mat rp = perp(pa.sp.R[sz(a)][sz(b)], J);
      skew = std::max(skew, std::abs(rp(b, a) - 2.0 * xab.squaredNorm()));
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          const std::size_t k = idx(a, b, c, e);
          ecjxjy = std::max(ecjxjy, std::abs(rjj[k] - rt[k]));
          ecxyzw = std::max(ecxyzw, std::abs(rt[k] - rj[k] - 4.0 * xab.dot(t.xi[sz(c)].col(e))));
        }
    }
  s.ecxy = ecxy;
  s.ecjxjy = ecjxjy;
  s.ecxyzw = ecxyzw;
  s.skew_flatness = skew;
  s.minimal_parallel = std::sqrt(norm_sq(pa.duxi));
  const SectionResiduals sr = section_residuals(pa);
  s.flat_implies_kahler = negligible(sr.flatness, pa, tol) ? t.norm() : 0.0;
  s.psi_norm_sq = norm_sq(t.xi1);
  s.einstein_alpha = pa.ricci.trace() / (5.0 * d);
  const Mat l = rough_laplacian(pa);
  s.laplacian_alpha = (l - 4.0 * s.einstein_alpha * J).norm();

  // Psi(X, Y, Z) = <xi_(1) X Y, Z>, w = d* omega.
  Mat contraction = Mat::Zero(d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) contraction(x, y) = frob(t.xi1[sz(x)], evaluate(t.xi1, J.col(y)));
  const Vec& w = t.dstar_omega;
  const double nm1 = pa.n() - 1.0;
  const Mat rhs = 4.0 * contraction + wedge2(w, Vec(J * w)) / (4.0 * nm1 * nm1);
  s.w1w4_laplacian = (l - rhs).norm();
  return s;
}

ConformalCheck conformal_example_check(int n, const std::string& f, std::span<const double> point, int degree) {
  const GeometrySpec spec = conformal(n, f, false);
  const AlmostHermitianStructure s = spec.build();
  const int d = 2 * n;
  AnalysisOptions opts;
  opts.degree = degree;
  const PointAnalysis pa = analyze_point(s, point, opts);
  const SectionResiduals sr = section_residuals(pa);
  ConformalCheck c;
  c.numeric = pa.sp.frame.coframe().transpose() * sr.harmonic_map_form;

  // Flat-metric quantities of f.
  const Expr e = parse_expr(f);
  const Jet fj = eval_expr(e, point, 3);
  Vec df(d);
  Mat hess(d, d);
  std::vector<Mat> third(sz(d), Mat::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    const Jet di = fj.derivative(i);
    df(i) = di.value();
    for (int j = 0; j < d; ++j) {
      const Jet dij = di.derivative(j);
      hess(i, j) = dij.value();
      for (int k = 0; k < d; ++k) third[sz(k)](i, j) = dij.derivative(k).value();
    }
  }
  const Mat J0 = standard_complex_structure(d);
  const double laplace = hess.trace();
  const Vec jgrad = J0 * df;
  c.closed_form = Vec::Zero(d);
  const double ef = std::exp(fj.value());
  for (int k = 0; k < d; ++k) {
    const double dnorm = 2.0 * df.dot(hess.col(k));  // d(|df|^2)(d_k)
    const double hterm = J0.col(k).dot(hess * jgrad);
    c.closed_form(k) = (-(2.0 * n - 3.0) / 2.0 * dnorm - laplace * df(k) + hterm) / (16.0 * ef);
  }
  c.residual = (c.numeric - c.closed_form).cwiseAbs().maxCoeff();
  if (e.to_string() == parse_expr("sin(x1)").to_string()) {
    Vec sf = Vec::Zero(d);
    sf(0) = (n - 1.0) / 8.0 * std::exp(-std::sin(point[0])) * std::sin(point[0]) * std::cos(point[0]);
    c.sine_form = sf;
  }
  return c;
}

double conformal_curvature_audit(int n, const std::string& f, std::span<const double> point) {
  const AlmostHermitianStructure s = conformal(n, f, false).build();
  const int d = 2 * n;
  const CurvaturePack cp = curvature(s.metric, point, 2, false);
  const Jet fj = eval_expr(parse_expr(f), point, 2);
  Vec df(d);
  Mat hess(d, d);
  for (int i = 0; i < d; ++i) {
    const Jet di = fj.derivative(i);
    df(i) = di.value();
    for (int j = 0; j < d; ++j) hess(i, j) = di.derivative(j).value();
  }
  const Mat L = hess - 0.5 * df * df.transpose();
  const double q = 0.5 * df.squaredNorm();
  auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  double worst = 0, size = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const double rhs = L(i, k) * delta(j, l) + L(j, l) * delta(i, k) - L(i, l) * delta(j, k) -
                             L(j, k) * delta(i, l) + q * (delta(i, k) * delta(j, l) - delta(j, k) * delta(i, l));
          const double lhs = -2.0 * cp.riemann.at({i, j, k, l});
          worst = std::max(worst, std::abs(lhs - rhs));
          size = std::max(size, std::abs(rhs));
        }
  return worst / (1.0 + size);
}

Classification classify_gh(const AlmostHermitianStructure& s, const std::vector<std::vector<double>>& points,
                           double tol, int degree) {
  Classification c;
  for (const auto& p : points) {
    const TorsionTensor t = intrinsic_torsion(s, p, std::max(degree, 2));
    c.torsion_max = std::max(c.torsion_max, t.norm());
    for (int k = 0; k < 4; ++k) c.component_max[sz(k)] = std::max(c.component_max[sz(k)], t.component_norm(k + 1));
  }
  c.label = component_label(c.component_max, tol * (1.0 + c.torsion_max));
  return c;
}

std::pair<bool, double> sign_audit() {
  double err = 0;
  const std::vector<std::vector<double>> pts{{0.3, -0.7, 1.1, 0.4}, {-1.2, 0.5, 0.2, 2.0}};
  for (const auto& p : pts) err = std::max(err, conformal_curvature_audit(2, "sin(x1) + 0.3*cos(x2)*x3", p));
  const AlmostHermitianStructure r = random_structure(7, 2, 0.3);
  for (const auto& p : pts) err = std::max(err, minimal_connection_contract(r, p, 3, 0.0));
  return {err < 1e-8, err};
}

DiagnosticsReport run_diagnostics(const GeometrySpec& spec, const std::vector<std::vector<double>>& points,
                                  double tolerance, std::uint64_t seed) {
  const AlmostHermitianStructure s = spec.build();
  DiagnosticsReport rep;
  rep.geometry = spec.name;
  rep.points = points;
  rep.tolerance = tolerance;
  rep.jet_degree = std::max(spec.jet_degree, 3);
  rep.seed = seed;
  std::tie(rep.sign_audit, rep.sign_audit_error) = sign_audit();
  AnalysisOptions opts;
  opts.degree = rep.jet_degree;
  for (const auto& p : points) {
    const PointAnalysis pa = analyze_point(s, p, opts);
    std::map<std::string, double> m;
    const SectionResiduals sr = section_residuals(pa);
    m["harmonic"] = sr.harmonic;
    m["harmonic_map"] = sr.harmonic_map;
    m["vert_geodesic"] = sr.vert_geodesic;
    m["horiz_geodesic"] = sr.horiz_geodesic;
    m["flatness"] = sr.flatness;
    m["superflat"] = sr.superflat;
    m["torsion_iv_a"] = sr.torsion_iv_a;
    m["torsion_iv_b"] = sr.torsion_iv_b;
    const HermitianHarmonicity h = hermitian_harmonicity(pa);
    m["comm_JLapJ"] = h.comm_JLapJ;
    m["herm_defect"] = h.herm_defect;
    m["cond_iv"] = h.cond_iv;
    for (const auto& r : identity_suite(pa)) m["identity." + r.name] = r.value;
    rep.residuals.push_back(std::move(m));
    rep.scales.push_back(pa.scale);
  }
  for (std::size_t i = 0; i < rep.residuals.size(); ++i)
    for (const auto& [k, v] : rep.residuals[i]) {
      const double x = v / rep.scales[i];
      rep.max_normalized[k] = std::max(rep.max_normalized[k], x);
      rep.mean_normalized[k] += x / static_cast<double>(rep.residuals.size());
    }
  for (const auto& [k, v] : rep.max_normalized) rep.pass[k] = v < tolerance;
  rep.classification = classify_gh(s, points, tolerance);
  return rep;
}

}  // namespace aht
