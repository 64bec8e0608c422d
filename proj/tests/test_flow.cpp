#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "aht/flow.hpp"

using namespace aht;

namespace {

double torsion_mismatch(const AlmostHermitianStructure& s, int m, const std::vector<std::vector<double>>& points,
                        bool relative) {
  double worst = 0.0;
  for (const auto& x : points) {
    const TorsionTensor grid = stencil_torsion(s.complex_structure.values, s.n(), m, x);
    const TorsionTensor jet = intrinsic_torsion(s, x, 2);
    double diff = 0.0, ref = 0.0;
    for (int a = 0; a < s.dim(); ++a) {
      diff += (grid.xi[a] - jet.xi[a]).squaredNorm();
      ref += jet.xi[a].squaredNorm();
    }
    worst = std::max(worst, std::sqrt(relative ? diff / ref : diff));
  }
  return worst;
}

std::vector<std::vector<double>> probe_points() {
  std::vector<std::vector<double>> pts;
  for (int q = 0; q < 5; ++q) pts.push_back({0.3 + q, 1.1 * q, 2.0 - 0.4 * q, 0.7 * q + 0.2});
  return pts;
}

double max_uperp_defect(const JGrid& g, const NodeField& f) {
  double worst = 0.0;
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const Mat a = f.at(node), J = g.J(node);
    worst = std::max({worst, (a + a.transpose()).norm(), (a * J + J * a).norm()});
  }
  return worst;
}

}  // namespace

TEST(FlowGrid, ConstantStructureHasNoTorsionOrEnergy) {
  const Mat J0 = standard_complex_structure(4);
  const JGrid g = JGrid::constant(2, 6, J0);
  EXPECT_EQ(g.nodes(), 1296u);
  EXPECT_LT(grid_torsion(g, 17).norm(), 1e-14);
  EXPECT_EQ(energy(g), 0.0);
  const NodeField grad = gradient(g);
  EXPECT_LT(l2_norm(g, grad), 1e-14);
  const FlowResult r = descend(g);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.converged);
}

TEST(FlowGrid, RejectsResolutionBelowFour) {
  const JGrid g = JGrid::constant(2, 3, standard_complex_structure(4));
  EXPECT_THROW(grid_torsion(g, 0), std::invalid_argument);
  EXPECT_THROW(energy(g), std::invalid_argument);
  EXPECT_THROW(gradient(g), std::invalid_argument);
  const auto J0 = [](std::span<const double>) { return standard_complex_structure(4); };
  EXPECT_THROW(stencil_torsion(J0, 2, 2, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST(FlowGrid, SampleRequiresFlatMetric) {
  RandomStructureOptions o;
  o.metric_amplitude = 0.3;
  EXPECT_THROW(JGrid::sample(random_structure(3, 2, 0.3, o), 4), std::invalid_argument);
}

TEST(FlowGrid, NodeIndexingWrapsPeriodically) {
  const JGrid g(2, 5);
  EXPECT_EQ(g.neighbor(0, 0, -1), 4u);
  EXPECT_EQ(g.neighbor(0, 1, -2), 15u);
  EXPECT_EQ(g.neighbor(4, 0, 1), 0u);
  const std::vector<double> x = g.coordinates(g.neighbor(0, 3, 2));
  EXPECT_NEAR(x[3], 2.0 * g.spacing(), 1e-15);
  EXPECT_NEAR(g.cell_volume(), std::pow(g.spacing(), 4), 1e-15);
}

TEST(FlowGrid, StencilTorsionMatchesJetsAtThirtyTwoNodes) {
  const AlmostHermitianStructure s = random_structure(7, 2, 0.3);
  EXPECT_LT(torsion_mismatch(s, 32, probe_points(), true), 1e-5);
}

TEST(FlowGrid, StencilTorsionConvergesAtFourthOrder) {
  const AlmostHermitianStructure s = random_structure(7, 2, 0.3);
  const double e16 = torsion_mismatch(s, 16, probe_points(), false);
  const double e32 = torsion_mismatch(s, 32, probe_points(), false);
  const double e64 = torsion_mismatch(s, 64, probe_points(), false);
  EXPECT_GT(e16 / e32, 12.0);
  EXPECT_LT(e16 / e32, 20.0);
  EXPECT_GT(e32 / e64, 12.0);
  EXPECT_LT(e32 / e64, 20.0);
}

TEST(FlowGrid, GridTorsionEqualsStencilTorsionAtNodes) {
  const AlmostHermitianStructure s = random_structure(5, 2, 0.3);
  const JGrid g = JGrid::sample(s, 8);
  for (std::size_t node : {0u, 77u, 1234u, 4095u}) {
    const TorsionTensor a = grid_torsion(g, node);
    const TorsionTensor b = stencil_torsion(s.complex_structure.values, 2, 8, g.coordinates(node));
    for (int k = 0; k < 4; ++k) EXPECT_LT((a.xi[k] - b.xi[k]).norm(), 1e-12);
  }
}

TEST(FlowEnergy, MatchesJetQuadrature) {
  const AlmostHermitianStructure s = random_structure(7, 2, 0.3);
  // The jet density is a trigonometric polynomial of low degree in each angle,
  // so the periodic trapezoid rule on 8 nodes per axis is converged.
  const JGrid quad(2, 8);
  double sum = 0.0;
  for (std::size_t node = 0; node < quad.nodes(); ++node)
    sum += std::pow(intrinsic_torsion(s, quad.coordinates(node), 2).norm(), 2);
  const double reference = 0.5 * sum * quad.cell_volume();
  const double e40 = energy(JGrid::sample(s, 40));
  EXPECT_GT(e40, 0.0);
  EXPECT_LT(std::abs(e40 - reference) / reference, 1e-4);
}

TEST(FlowEnergy, EqualsHalfSquaredTorsionSum) {
  const JGrid g = JGrid::sample(random_structure(2, 2, 0.5), 6);
  double sum = 0.0;
  for (std::size_t node = 0; node < g.nodes(); ++node) sum += std::pow(grid_torsion(g, node).norm(), 2);
  EXPECT_NEAR(energy(g), 0.5 * sum * g.cell_volume(), 1e-10 * energy(g));
}

TEST(FlowGradient, LiesInUnitaryComplement) {
  const JGrid g = JGrid::sample(random_structure(11, 2, 0.3), 8);
  EXPECT_LT(max_uperp_defect(g, gradient(g)), 1e-10);
  EXPECT_LT(max_uperp_defect(g, random_variation(g, 4)), 1e-12);
}

TEST(FlowGradient, DirectionalDerivativesMatchFirstVariation) {
  const JGrid g = JGrid::sample(random_structure(7, 2, 0.3), 16);
  const GradientCheck check = gradient_check(g, 10, 1e-4, 1);
  EXPECT_EQ(check.sign, 1.0);
  EXPECT_LT(check.max_rel_error, 1e-4);
}

TEST(FlowGradient, SixDimensionalGrid) {
  const JGrid g = JGrid::sample(random_structure(3, 3, 0.3), 4);
  EXPECT_LT(max_uperp_defect(g, gradient(g)), 1e-10);
  const GradientCheck check = gradient_check(g, 3, 1e-4, 9);
  EXPECT_LT(check.max_rel_error, 1e-4);
}

TEST(FlowGradient, PointwiseCoderivativeAgreesToTruncationOrder) {
  const AlmostHermitianStructure s = random_structure(7, 2, 0.3);
  auto gap = [&](int m) {
    const JGrid g = JGrid::sample(s, m);
    const NodeField exact = gradient(g), naive = pointwise_coderivative(g);
    double worst = 0.0, scale = 0.0;
    for (std::size_t node = 0; node < g.nodes(); ++node) {
      worst = std::max(worst, (exact.at(node) + naive.at(node)).norm());
      scale = std::max(scale, naive.at(node).norm());
    }
    return worst / scale;
  };
  const double g8 = gap(8), g16 = gap(16);
  EXPECT_LT(g16, 1e-2);
  EXPECT_GT(g8 / g16, 8.0);
}

TEST(FlowVariation, ConjugationPreservesStructure) {
  const JGrid g = JGrid::sample(random_structure(7, 2, 0.3), 6);
  const NodeField phi = random_variation(g, 3);
  EXPECT_LT(vary(g, phi, 0.7).structure_defect(), 1e-13);
  EXPECT_NEAR(l2_norm(g, phi), 1.0, 1e-12);
}

TEST(FlowVariation, ReprojectionRestoresConstraints) {
  Mat J = standard_complex_structure(6);
  J(0, 3) += 1e-4;
  J(2, 5) -= 3e-5;
  J(1, 0) += 2e-5;
  const Mat P = reproject_structure(J);
  EXPECT_LT((P * P + Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((P.transpose() * P - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((P - J).norm(), 1e-3);
}

TEST(FlowVariation, BracketOfComplementLiesInUnitaryAlgebra) {
  EXPECT_LT(bracket_closure_defect(standard_complex_structure(4), 50, 1), 1e-12);
  EXPECT_LT(bracket_closure_defect(standard_complex_structure(8), 50, 2), 1e-12);
  const Mat J = random_structure(4, 3, 0.8).complex_structure.values(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  EXPECT_LT(bracket_closure_defect(J, 50, 3), 1e-12);
}

TEST(FlowHessian, QuadraticAndNonNegativeAtKahler) {
  const JGrid g = JGrid::constant(2, 8, standard_complex_structure(4));
  const NodeField phi = random_variation(g, 5);
  NodeField scaled = phi;
  for (double& v : scaled.data) v *= 2.5;
  const HessianValue h = hessian_form(g, phi, 1e-4);
  const HessianValue hs = hessian_form(g, scaled, 1e-4);
  ASSERT_TRUE(h.applicable);
  EXPECT_GT(h.value, 0.0);
  EXPECT_NEAR(hs.value, 6.25 * h.value, 1e-10 * hs.value);
  EXPECT_NEAR(second_difference(g, phi, 1e-3), h.value, 1e-5 * h.value);
}

TEST(FlowHessian, ConstantFieldIsInTheKernel) {
  const Mat J0 = standard_complex_structure(4);
  const JGrid g = JGrid::constant(2, 6, J0);
  Mat a = Mat::Zero(4, 4);
  a(0, 2) = 1.0;
  a(2, 0) = -1.0;
  a = 0.5 * (a + J0 * a * J0);
  NodeField phi(4, g.nodes());
  for (std::size_t node = 0; node < g.nodes(); ++node) phi.set(node, a);
  EXPECT_LT(std::abs(hessian_form(g, phi, 1e-6).value), 1e-12);
}

TEST(FlowHessian, InapplicableAwayFromCriticalPoints) {
  const JGrid g = JGrid::sample(random_structure(7, 2, 0.3), 8);
  const HessianValue h = hessian_form(g, random_variation(g, 1), 1e-4);
  EXPECT_FALSE(h.applicable);
  EXPECT_GT(h.gradient_norm, 1e-4);
}

class FlowDescent : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    start_ = std::make_unique<JGrid>(JGrid::sample(random_structure(7, 2, 0.3), 16));
    result_ = std::make_unique<FlowResult>(descend(*start_));
  }
  static void TearDownTestSuite() {
    start_.reset();
    result_.reset();
  }
  static std::unique_ptr<JGrid> start_;
  static std::unique_ptr<FlowResult> result_;
};
std::unique_ptr<JGrid> FlowDescent::start_;
std::unique_ptr<FlowResult> FlowDescent::result_;

TEST_F(FlowDescent, ReachesCriticalPointMonotonically) {
  const FlowResult& r = *result_;
  ASSERT_TRUE(r.converged) << r.stall_reason;
  EXPECT_FALSE(r.stalled);
  EXPECT_LE(static_cast<int>(r.trace.size()), 5001);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].energy, r.trace[i - 1].energy);
  EXPECT_LT(r.trace.back().grad_norm, 1e-5);
  EXPECT_LT(r.terminal_pointwise, 1e-4);
  EXPECT_LT(r.terminal_pointwise_naive, 1e-4);
}

TEST_F(FlowDescent, EndpointIsKahler) {
  const FlowResult& r = *result_;
  EXPECT_LT(r.trace.back().energy, 1e-8 * r.trace.front().energy);
  EXPECT_LT(r.max_drift, 1e-8);
  EXPECT_LT(r.grid.structure_defect(), 1e-10);
}

TEST_F(FlowDescent, SecondVariationMatchesSecondDifferences) {
  const HessianCheck h = hessian_check(result_->grid, 10, 1e-4);
  ASSERT_TRUE(h.applicable);
  EXPECT_NEAR(h.constant, 1.0, 1e-3);
  EXPECT_LT(h.max_rel_error, 5e-3);
  EXPECT_GE(h.min_value, 0.0);
}

TEST_F(FlowDescent, TraceCsvHasOneRowPerStep) {
  const std::string csv = trace_csv(result_->trace);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,energy,grad_norm,step,millis");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, result_->trace.size());
}

TEST_F(FlowDescent, CallbackCanStopEarly) {
  FlowOptions o;
  int calls = 0;
  o.on_step = [&](int, double, double) { return ++calls < 3; };
  const FlowResult r = descend(*start_, o);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(r.trace.size(), 4u);
  EXPECT_FALSE(r.converged);
}
