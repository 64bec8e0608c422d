#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aht/catalog.hpp"
#include "aht/diagnostics.hpp"

using namespace aht;

namespace {

AlmostHermitianStructure curved_random(std::uint64_t seed, int n) {
  RandomStructureOptions o;
  o.metric_amplitude = 0.3;
  return random_structure(seed, n, 0.4, o);
}

std::vector<double> generic_point(int dim, double shift) {
  std::vector<double> p(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = 0.37 * i - 0.5 + shift;
  return p;
}

// Round S^6 chart with the metric multiplied by exp(f); J unchanged. Type W1 + W4.
AlmostHermitianStructure rescaled_s6(const std::string& f) {
  AlmostHermitianStructure s = s6_nearly_kahler().build();
  const Expr e = parse_expr(f);
  const MetricField base = s.metric;
  s.name = "s6-rescaled";
  s.metric.jets = [base, e](std::span<const Jet> x) {
    std::vector<Jet> g = base.jets(x);
    const Jet w = exp(e.eval<Jet>(x));
    for (auto& gij : g) gij = gij * w;
    return g;
  };
  s.metric.values = [base, e](std::span<const double> x) { return Mat(base.values(x) * std::exp(e.eval_double(x))); };
  return s;
}

double value_of(const std::vector<NamedResidual>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r.value;
  ADD_FAILURE() << "no residual named " << name;
  return 0.0;
}

}  // namespace

TEST(Diagnostics, FlatKahlerHasNoResiduals) {
  const auto spec = flat_kahler(3);
  const auto s = spec.build();
  for (const auto& p : sample_points(spec, 5, 3)) {
    const PointAnalysis pa = analyze_point(s, p);
    const SectionResiduals r = section_residuals(pa);
    for (double v : {r.harmonic, r.harmonic_map, r.vert_geodesic, r.horiz_geodesic, r.flatness, r.superflat,
                     r.torsion_iv_a, r.torsion_iv_b})
      EXPECT_EQ(v, 0.0);
    for (const auto& id : identity_suite(pa)) EXPECT_EQ(id.value, 0.0) << id.name;
  }
}

TEST(Diagnostics, IdentityBatteryOnCurvedRandomStructures) {
  for (int n : {2, 3})
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto s = curved_random(seed, n);
      for (double shift : {0.0, 1.3}) {
        const PointAnalysis pa = analyze_point(s, generic_point(2 * n, shift));
        ASSERT_GT(pa.torsion.norm(), 0.1);
        ASSERT_GT(section_residuals(pa).flatness, 1e-3);  // curvature is really present
        for (const auto& id : identity_suite(pa)) EXPECT_LT(id.value, 1e-10 * pa.scale) << id.name << " n=" << n;
        EXPECT_LT(rough_laplacian_crosscheck(s, pa), 1e-10 * pa.scale);
      }
    }
}

TEST(Diagnostics, GenericThreeFoldCarriesAllComponentsInTheBattery) {
  const PointAnalysis pa = analyze_point(curved_random(11, 3), generic_point(6, 0.2));
  for (int k = 1; k <= 4; ++k) EXPECT_GT(pa.torsion.component_norm(k), 1e-3) << k;
  EXPECT_LT(value_of(identity_suite(pa), "d2omega"), 1e-10 * pa.scale);
}

TEST(Diagnostics, ResidualsAreFrameIndependent) {
  const auto s = curved_random(5, 3);
  const auto p = generic_point(6, 0.4);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = g(rng);
  const Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();
  AnalysisOptions rot;
  rot.rotation = &q;
  const SectionResiduals r0 = section_residuals(analyze_point(s, p));
  const SectionResiduals r1 = section_residuals(analyze_point(s, p, rot));
  // harmonic_map and torsion_iv_a are frame maxima; the rest are full norms.
  EXPECT_NEAR(r0.harmonic, r1.harmonic, 1e-12);
  EXPECT_NEAR(r0.harmonic_map_form.norm(), r1.harmonic_map_form.norm(), 1e-12);
  EXPECT_NEAR(r0.vert_geodesic, r1.vert_geodesic, 1e-12);
  EXPECT_NEAR(r0.horiz_geodesic, r1.horiz_geodesic, 1e-12);
  EXPECT_NEAR(r0.flatness, r1.flatness, 1e-12);
  EXPECT_NEAR(r0.superflat, r1.superflat, 1e-12);
  EXPECT_NEAR(r0.torsion_iv_b, r1.torsion_iv_b, 1e-12);
}

TEST(Diagnostics, SixSphereNearlyKahlerSuite) {
  const auto spec = s6_nearly_kahler();
  const auto s = spec.build();
  const auto pts = sample_points(spec, 4, 5);
  EXPECT_EQ(classify_gh(s, pts).label, "W1");
  for (const auto& p : pts) {
    const PointAnalysis pa = analyze_point(s, p);
    const NearlyKahlerSuite nk = nearly_kahler_suite(pa);
    EXPECT_TRUE(nk.applicable);
    EXPECT_LT(nk.ecxy, 1e-10);
    EXPECT_LT(nk.ecjxjy, 1e-10);
    EXPECT_LT(nk.ecxyzw, 1e-10);
    EXPECT_LT(nk.minimal_parallel, 1e-10);
    EXPECT_LT(nk.skew_flatness, 1e-10);
    EXPECT_NEAR(nk.einstein_alpha, 1.0, 1e-10);
    EXPECT_LT((pa.ricci - 5.0 * Mat::Identity(6, 6)).norm(), 1e-10);
    EXPECT_LT(nk.laplacian_alpha, 1e-10);
    EXPECT_LT(nk.w1w4_laplacian, 1e-10);
    // |xi_X Y|^2 = 1/4 for orthonormal X, Y with Y orthogonal to JX, and 0 on span{X, JX}: 6 * 4 / 4.
    EXPECT_NEAR(nk.psi_norm_sq, 6.0, 1e-10);
    EXPECT_LT(star_ricci(pa).alt.norm(), 1e-10);
    const SectionResiduals r = section_residuals(pa);
    EXPECT_LT(r.harmonic, 1e-10);
    EXPECT_LT(r.harmonic_map, 1e-10);
    EXPECT_LT(r.vert_geodesic, 1e-10);
    EXPECT_LT(r.horiz_geodesic, 1e-10);
    EXPECT_GT(r.flatness, 1.0);
    EXPECT_EQ(nk.flat_implies_kahler, 0.0);
  }
}

TEST(Diagnostics, NearlyKahlerSuiteDetectsOtherClasses) {
  const auto spec = conformal(3, "sin(x1)", true);
  const PointAnalysis pa = analyze_point(spec.build(), generic_point(6, 0.1));
  const NearlyKahlerSuite nk = nearly_kahler_suite(pa);
  EXPECT_FALSE(nk.applicable);
  EXPECT_GT(nk.ecxyzw, 1e-3);
}

TEST(Diagnostics, ConformalCurvatureClosedForm) {
  for (int n : {2, 3})
    for (const char* f : {"sin(x1)", "sin(x1)*cos(x2)", "0.4*sin(x1+x3)*cos(x2) + 0.2*x2*x2"})
      EXPECT_LT(conformal_curvature_audit(n, f, generic_point(2 * n, 0.3)), 1e-12) << f;
  const auto [ok, err] = sign_audit();
  EXPECT_TRUE(ok) << err;
}

TEST(Diagnostics, SineConformalHarmonicMapFormByHand) {
  // (n - 1) h = (Ric - Ric*)(X, v) with the conformal curvature closed form and
  // v = (n-1)/2 e^{-f} grad f gives h(d_1) = (n - 1)/2 e^{-f} sin cos.
  for (int n : {2, 3})
    for (double x1 : {0.3, 1.1, 2.5, -0.8}) {
      std::vector<double> p = generic_point(2 * n, 0.0);
      p[0] = x1;
      const ConformalCheck c = conformal_example_check(n, "sin(x1)", p);
      const double expect = 0.5 * (n - 1) * std::exp(-std::sin(x1)) * std::sin(x1) * std::cos(x1);
      EXPECT_NEAR(c.numeric(0), expect, 1e-12);
      for (int k = 1; k < 2 * n; ++k) EXPECT_NEAR(c.numeric(k), 0.0, 1e-12);
      ASSERT_TRUE(c.sine_form.has_value());
      EXPECT_NEAR((*c.sine_form)(0), c.closed_form(0), 1e-12);
    }
}

TEST(Diagnostics, ConformalHarmonicMapFormIsFourTimesTheClosedForm) {
  for (int n : {2, 3}) {
    const auto p = generic_point(2 * n, 0.7);
    const ConformalCheck c = conformal_example_check(n, "sin(x1)*cos(x2) + 0.3*cos(x3)*x4", p);
    EXPECT_GT(c.closed_form.norm(), 1e-2);
    EXPECT_LT((c.numeric - 4.0 * c.closed_form).norm(), 1e-12);
  }
}

TEST(Diagnostics, ConformalTorusIsHarmonicButNotHarmonicMap) {
  for (int n : {2, 3}) {
    const auto spec = conformal(n, "sin(x1)", true);
    const auto s = spec.build();
    for (const auto& p : sample_points(spec, 3, 1)) {
      const PointAnalysis pa = analyze_point(s, p);
      const SectionResiduals r = section_residuals(pa);
      EXPECT_LT(r.harmonic, 1e-12 * pa.scale);
      if (std::abs(std::sin(p[0]) * std::cos(p[0])) > 0.05) EXPECT_GT(r.harmonic_map, 1e-3);
    }
  }
}

TEST(Diagnostics, HopfChartHarmonicMapNeitherGeodesic) {
  for (int n : {2, 3}) {
    const auto spec = hopf_chart(n);
    const auto s = spec.build();
    for (const auto& p : sample_points(spec, 3, 2)) {
      const PointAnalysis pa = analyze_point(s, p);
      const SectionResiduals r = section_residuals(pa);
      EXPECT_LT(r.harmonic, 1e-12 * pa.scale);
      EXPECT_LT(r.harmonic_map, 1e-12 * pa.scale);
      EXPECT_GT(r.vert_geodesic, 1e-3);
      EXPECT_GT(r.horiz_geodesic, 1e-3);
    }
  }
}

TEST(Diagnostics, LckFourManifoldLaplacian) {
  for (const char* f : {"sin(x1)*cos(x2)", "0.5*cos(x3) + 0.2*sin(x1+x4)"}) {
    const auto spec = conformal(2, f, true);
    const auto s = spec.build();
    for (const auto& p : sample_points(spec, 3, 4)) {
      const HermitianHarmonicity h = hermitian_harmonicity(analyze_point(s, p));
      EXPECT_LT(h.lck_laplacian, 1e-12);
      EXPECT_LT(h.cond_iv, 1e-12);
    }
  }
}

TEST(Diagnostics, LckLaplacianInHigherDimensions) {
  // Pure W4 harmonic: nabla* nabla omega = (|w|^2 omega - (n-2) w ^ Jw) / (2 (n-1)^2), w = d* omega.
  for (int n : {3, 4}) {
    const auto spec = conformal(n, "sin(x1)*cos(x2) + 0.3*sin(x3)", true);
    const PointAnalysis pa = analyze_point(spec.build(), generic_point(2 * n, 0.2));
    const Vec& w = pa.torsion.dstar_omega;
    const Mat& J = pa.sp.J;
    const Mat expect = (w.squaredNorm() * J - (n - 2.0) * wedge2(w, Vec(J * w))) / (2.0 * (n - 1) * (n - 1));
    EXPECT_LT((hermitian_harmonicity(pa).rough_laplacian_omega - expect).norm(), 1e-12);
    EXPECT_GT(nearly_kahler_suite(pa).w1w4_laplacian, 1e-3);
  }
}

TEST(Diagnostics, ClassCriteriaAgreeWithHarmonicity) {
  struct Case {
    AlmostHermitianStructure s;
    std::vector<double> p;
  };
  std::vector<Case> cases;
  cases.push_back({s6_nearly_kahler().build(), {0.1, -0.2, 0.3, 0.05, 0.2, -0.1}});
  cases.push_back({rescaled_s6("0.3*x1 + 0.2*x2*x3"), {0.1, -0.2, 0.3, 0.05, 0.2, -0.1}});
  cases.push_back({conformal(3, "sin(x1)*cos(x2)", true).build(), generic_point(6, 0.1)});
  cases.push_back({conformal(2, "sin(x1)*cos(x2)", true).build(), generic_point(4, 0.1)});
  cases.push_back({hopf_chart(3).build(), {0.6, 0.2, -0.3, 0.4, 0.1, 0.5}});
  cases.push_back({hermitian_planes({"sin(x1)", "0.3*cos(x3)*sin(x2)"}).build(), generic_point(4, 0.1)});
  cases.push_back({curved_random(3, 2), generic_point(4, 0.1)});
  int applicable = 0;
  for (const auto& c : cases) {
    const PointAnalysis pa = analyze_point(c.s, c.p);
    for (ClassCondition cond : {ClassCondition::W1W2W4, ClassCondition::QuasiKahler,
                                ClassCondition::LocallyConformalAlmostKahler, ClassCondition::W1W4,
                                ClassCondition::Hermitian}) {
      const ClassCriterion cc = class_criteria(pa, cond);
      if (!cc.applicable) continue;
      ++applicable;
      const bool harmonic = cc.harmonic_residual < 1e-9 * pa.scale;
      const bool holds = cc.class_residual < 1e-9 * pa.scale;
      EXPECT_EQ(harmonic, holds) << c.s.name << " " << to_string(cond) << " harm " << cc.harmonic_residual
                                 << " class " << cc.class_residual;
    }
  }
  EXPECT_GE(applicable, 12);
}

TEST(Diagnostics, HarmonicMapCriteria) {
  // Quasi-Kahler S^6 and the Hopf chart are harmonic maps; the conformal torus is not.
  {
    const PointAnalysis pa = analyze_point(s6_nearly_kahler().build(), std::vector<double>{0.2, 0.1, -0.3, 0.4, 0.0, 0.1});
    const ClassCriterion cc = class_criteria(pa, ClassCondition::HarmonicMapQuasiKahler);
    ASSERT_TRUE(cc.applicable);
    EXPECT_LT(cc.class_residual, 1e-10 * pa.scale);
  }
  for (ClassCondition c : {ClassCondition::HarmonicMapHermitian, ClassCondition::HarmonicMapW1W2W4Derived}) {
    const PointAnalysis hopf = analyze_point(hopf_chart(2).build(), std::vector<double>{0.6, 0.2, -0.3, 0.4});
    EXPECT_LT(class_criteria(hopf, c).class_residual, 1e-10 * hopf.scale) << to_string(c);
    const PointAnalysis conf = analyze_point(conformal(3, "sin(x1)", true).build(), generic_point(6, 1.2));
    EXPECT_GT(class_criteria(conf, c).class_residual, 1e-4) << to_string(c);
  }
}

TEST(Diagnostics, DerivedMapConditionTracksTheHarmonicMapForm) {
  std::vector<std::pair<AlmostHermitianStructure, std::vector<double>>> cases{
      {conformal(3, "sin(x1)*cos(x2)", true).build(), generic_point(6, 0.3)},
      {curved_random(8, 2), generic_point(4, 0.3)},
      {rescaled_s6("0.3*x1 + 0.2*x2*x3"), {0.1, -0.2, 0.3, 0.05, 0.2, -0.1}}};
  for (const auto& [s, p] : cases) {
    const PointAnalysis pa = analyze_point(s, p);
    const ClassCriterion cc = class_criteria(pa, ClassCondition::HarmonicMapW1W2W4Derived);
    ASSERT_TRUE(cc.applicable) << s.name << " " << cc.reason;
    const double h = section_residuals(pa).harmonic_map_form.norm();
    EXPECT_GT(h, 1e-4) << s.name;
    EXPECT_NEAR(cc.class_residual, (pa.n() - 1) * h, 1e-10 * pa.scale) << s.name;
  }
}

TEST(Diagnostics, StatedMapConditionIsBlindOnLocallyConformalKahler) {
  // Holds identically on W4 structures although the harmonic-map form is nonzero.
  const PointAnalysis pa = analyze_point(conformal(3, "sin(x1)*cos(x2)", true).build(), generic_point(6, 0.3));
  EXPECT_LT(class_criteria(pa, ClassCondition::HarmonicMapW1W2W4).class_residual, 1e-10 * pa.scale);
  EXPECT_GT(section_residuals(pa).harmonic_map, 1e-4);
}

TEST(Diagnostics, ClassCriterionReportsInapplicability) {
  const PointAnalysis pa = analyze_point(s6_nearly_kahler().build(), std::vector<double>{0.2, 0.1, -0.3, 0.4, 0.0, 0.1});
  const ClassCriterion herm = class_criteria(pa, ClassCondition::Hermitian);
  EXPECT_FALSE(herm.applicable);
  EXPECT_EQ(herm.reason, "W1 component present");
  const PointAnalysis four = analyze_point(flat_kahler(2).build(), std::vector<double>{0.1, 0.2, 0.3, 0.4});
  EXPECT_FALSE(class_criteria(four, ClassCondition::W1W4).applicable);
}

TEST(Diagnostics, TorsionOfMinimalConnectionDoesNotCaptureHarmonicity) {
  // d* xi = 1/2 a + skew part of d* T, so harmonic lcK structures keep sym(d* T) != 0.
  const PointAnalysis pa = analyze_point(hopf_chart(2).build(), std::vector<double>{0.6, 0.2, -0.3, 0.4});
  const SectionResiduals r = section_residuals(pa);
  EXPECT_LT(r.harmonic, 1e-12 * pa.scale);
  EXPECT_LT(r.torsion_iv_a, 1e-12 * pa.scale);
  EXPECT_GT(r.torsion_iv_b, 0.1);
}

TEST(Diagnostics, HarmonicityEquivalentsVanishOnNearlyKahler) {
  const PointAnalysis pa = analyze_point(s6_nearly_kahler().build(), std::vector<double>{0.2, 0.1, -0.3, 0.4, 0.0, 0.1});
  const auto eq = harmonicity_equivalents(pa);
  EXPECT_EQ(eq.size(), 8u);
  for (const auto& r : eq) EXPECT_LT(r.value, 1e-10 * pa.scale) << r.name;
  const PointAnalysis rnd = analyze_point(curved_random(2, 3), generic_point(6, 0.0));
  for (const auto& r : harmonicity_equivalents(rnd)) EXPECT_GT(r.value, 1e-4) << r.name;
}

TEST(Diagnostics, ClassifyCatalog) {
  for (const GeometrySpec& spec : {flat_kahler(2), conformal(3, "sin(x1)", true), hopf_chart(2), s6_nearly_kahler(),
                                   hermitian_planes({"sin(x1)", "0.3*cos(x3)*sin(x2)", "0.2*sin(x5)"}),
                                   random_geometry(4, 3, 0.3), random_geometry(4, 2, 0.3)})
    EXPECT_EQ(classify_gh(spec.build(), sample_points(spec, 3, 1)).label, spec.expected.gh_class) << spec.name;
}

TEST(Diagnostics, ReportMatchesExpectations) {
  for (const GeometrySpec& spec : {flat_kahler(2), hopf_chart(2), s6_nearly_kahler()}) {
    const DiagnosticsReport rep = run_diagnostics(spec, sample_points(spec, 3, 2), 1e-8, 2);
    EXPECT_TRUE(rep.sign_audit);
    EXPECT_EQ(rep.classification.label, spec.expected.gh_class);
    for (const auto& name : spec.expected.zero_residuals) EXPECT_TRUE(rep.pass.at(name)) << spec.name << " " << name;
    for (const auto& name : spec.expected.positive_residuals)
      EXPECT_FALSE(rep.pass.at(name)) << spec.name << " " << name;
    for (const auto& [name, ok] : rep.pass)
      if (name.rfind("identity.", 0) == 0) EXPECT_TRUE(ok) << spec.name << " " << name;
  }
}
