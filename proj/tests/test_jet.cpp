#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aht/jet.hpp"
#include "support/finite_difference.hpp"

using aht::Jet;
using aht::MultiIndex;

TEST(JetVariable, CoordinateFunctionHasUnitGradient) {
  const Jet x = aht::jet_variable(0, 2.0, 2, 2);
  EXPECT_EQ(x.size(), 6u);
  EXPECT_DOUBLE_EQ(x.coeff({0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(x.coeff({1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(x.coeff({0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(x.coeff({2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(x.coeff({1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(x.coeff({0, 2}), 0.0);

  const Jet y = aht::jet_variable(1, 0.0, 2, 1);
  EXPECT_DOUBLE_EQ(y.coeff({0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(y.coeff({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(y.coeff({1, 0}), 0.0);
}

TEST(JetVariable, RejectsOutOfRangeIndex) {
  EXPECT_THROW(aht::jet_variable(2, 0.0, 2, 2), std::out_of_range);
  EXPECT_THROW(aht::jet_variable(-1, 0.0, 2, 2), std::out_of_range);
}

TEST(JetArith, SquareHasUnitSecondCoefficient) {
  const Jet x = aht::jet_variable(0, 0.37, 2, 3);
  const Jet sq = x * x;
  EXPECT_DOUBLE_EQ(sq.coeff({2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(aht::extract_partial(sq, {2, 0}), 2.0);
  EXPECT_DOUBLE_EQ(sq.coeff({3, 0}), 0.0);
}

TEST(JetArith, SineMaclaurinSeries) {
  const Jet s = aht::sin(aht::jet_variable(0, 0.0, 1, 3));
  EXPECT_DOUBLE_EQ(s.coeff({0}), 0.0);
  EXPECT_DOUBLE_EQ(s.coeff({1}), 1.0);
  EXPECT_DOUBLE_EQ(s.coeff({2}), 0.0);
  EXPECT_NEAR(s.coeff({3}), -1.0 / 6.0, 1e-16);
}

TEST(JetArith, ExpOfSineComposition) {
  const Jet e = aht::exp(aht::sin(aht::jet_variable(0, 0.0, 1, 2)));
  EXPECT_DOUBLE_EQ(e.coeff({0}), 1.0);
  EXPECT_DOUBLE_EQ(e.coeff({1}), 1.0);
  EXPECT_DOUBLE_EQ(e.coeff({2}), 0.5);
  EXPECT_DOUBLE_EQ(aht::extract_partial(e, {2}), 1.0);
}

TEST(JetArith, ConstantHasNoDerivatives) {
  const Jet c(3, 3, 4.5);
  EXPECT_EQ(aht::extract_partial(c, {0, 0, 0}), 4.5);
  EXPECT_EQ(aht::extract_partial(c, {1, 0, 0}), 0.0);
  EXPECT_EQ(aht::extract_partial(c, {1, 1, 1}), 0.0);
  EXPECT_THROW(aht::extract_partial(c, {2, 1, 1}), std::out_of_range);
}

TEST(JetArith, DomainErrors) {
  const Jet zero(2, 2, 0.0);
  const Jet one(2, 2, 1.0);
  EXPECT_THROW(one / zero, aht::JetDomainError);
  EXPECT_THROW(aht::log(zero), aht::JetDomainError);
  EXPECT_THROW(aht::log(-one), aht::JetDomainError);
  EXPECT_THROW(aht::sqrt(-one), aht::JetDomainError);
  EXPECT_THROW(aht::sqrt(zero), aht::JetDomainError);
}

TEST(JetArith, MixingLayoutsIsAnError) {
  const Jet a(2, 2, 1.0);
  const Jet b(2, 3, 1.0);
  const Jet c(3, 2, 1.0);
  EXPECT_THROW(a + b, std::invalid_argument);
  EXPECT_THROW(a * c, std::invalid_argument);
}

namespace {

// Each case evaluates the same formula on doubles (for finite differences) and jets.
struct Case {
  const char* name;
  std::function<double(const std::vector<double>&)> f;
  std::function<Jet(const std::vector<Jet>&)> jet;
};

std::vector<Case> elementary_cases() {
  return {
      {"mul", [](const auto& x) { return x[0] * x[1] * x[1]; }, [](const auto& x) { return x[0] * x[1] * x[1]; }},
      {"div", [](const auto& x) { return x[0] / (2.0 + x[1]); }, [](const auto& x) { return x[0] / (2.0 + x[1]); }},
      {"sin", [](const auto& x) { return std::sin(x[0] * x[1]); }, [](const auto& x) { return aht::sin(x[0] * x[1]); }},
      {"cos", [](const auto& x) { return std::cos(x[0] + 2 * x[1]); },
       [](const auto& x) { return aht::cos(x[0] + 2 * x[1]); }},
      {"exp", [](const auto& x) { return std::exp(x[0] - x[1]); }, [](const auto& x) { return aht::exp(x[0] - x[1]); }},
      {"log", [](const auto& x) { return std::log(3.0 + x[0] * x[1]); },
       [](const auto& x) { return aht::log(3.0 + x[0] * x[1]); }},
      {"sqrt", [](const auto& x) { return std::sqrt(2.0 + x[0] + x[1] * x[1]); },
       [](const auto& x) { return aht::sqrt(2.0 + x[0] + x[1] * x[1]); }},
      {"pow", [](const auto& x) { return std::pow(1.5 + x[0], 2.5) * x[1]; },
       [](const auto& x) { return aht::pow(1.5 + x[0], 2.5) * x[1]; }},
      {"neg_sub", [](const auto& x) { return -(x[0] - x[1]) * x[0]; },
       [](const auto& x) { return -(x[0] - x[1]) * x[0]; }},
  };
}

}  // namespace

TEST(JetArith, MatchesRichardsonFiniteDifferencesUpToDegreeThree) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (const auto& c : elementary_cases()) {
    for (int trial = 0; trial < 4; ++trial) {
      const std::vector<double> x{u(rng), u(rng)};
      const auto xs = aht::coordinate_jets(x, 3);
      const Jet j = c.jet(xs);
      for (std::size_t k = 1; k < j.size(); ++k) {
        const MultiIndex alpha = j.layout()->monomial(k);
        const double exact = j.partial(alpha);
        const double fd = aht::testing::richardson_partial(c.f, x, alpha, 1e-2);
        EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(exact)))
            << c.name << " alpha=(" << alpha[0] << "," << alpha[1] << ")";
      }
    }
  }
}

TEST(JetArith, ProductMatchesCentralDifferences) {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const double p = u(rng), q = u(rng);
    auto fa = [&](const auto& y) { return std::sin(p * y[0] + y[1]) + q * y[2]; };
    auto fb = [&](const auto& y) { return std::exp(q * y[1]) * y[0]; };
    auto fprod = [&](const std::vector<double>& y) { return fa(y) * fb(y); };
    const auto xs = aht::coordinate_jets(x, 2);
    const Jet a = aht::sin(p * xs[0] + xs[1]) + q * xs[2];
    const Jet b = aht::exp(q * xs[1]) * xs[0];
    const Jet ab = a * b;
    for (std::size_t k = 1; k < ab.size(); ++k) {
      const MultiIndex alpha = ab.layout()->monomial(k);
      const double fd = aht::testing::richardson_partial(fprod, x, alpha, 1e-3);
      EXPECT_NEAR(ab.partial(alpha), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(JetProperties, RingAxioms) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_jet = [&] {
    Jet j(4, 4, 0.0);
    for (std::size_t k = 0; k < j.size(); ++k) j.coeff_at(k) = u(rng);
    return j;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Jet a = random_jet(), b = random_jet(), c = random_jet();
    const Jet assoc = ((a + b) + c) - (a + (b + c));
    const Jet distrib = a * (b + c) - (a * b + a * c);
    const Jet mul_assoc = (a * b) * c - a * (b * c);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR(assoc.coeff_at(k), 0.0, 1e-14);
      EXPECT_NEAR(distrib.coeff_at(k), 0.0, 1e-14);
      EXPECT_NEAR(mul_assoc.coeff_at(k), 0.0, 1e-13);
    }
  }
}

TEST(JetProperties, PythagoreanIdentity) {
  const std::vector<double> x{0.3, -1.1, 2.0};
  const auto xs = aht::coordinate_jets(x, 4);
  const Jet arg = xs[0] * xs[1] + aht::exp(xs[2]) / 3.0;
  const Jet one = aht::sin(arg) * aht::sin(arg) + aht::cos(arg) * aht::cos(arg);
  EXPECT_NEAR(one.value(), 1.0, 1e-15);
  for (std::size_t k = 1; k < one.size(); ++k) EXPECT_LT(std::abs(one.coeff_at(k)), 1e-13);
}

TEST(JetCalculus, DerivativeAndTruncation) {
  const std::vector<double> x{0.4, 0.9};
  const auto xs = aht::coordinate_jets(x, 4);
  const Jet f = aht::sin(xs[0]) * xs[1] * xs[1];
  const Jet df = f.derivative(0);
  EXPECT_EQ(df.degree(), 3);
  EXPECT_NEAR(df.value(), std::cos(0.4) * 0.81, 1e-15);
  EXPECT_NEAR(df.partial({1, 1}), -std::sin(0.4) * 2 * 0.9, 1e-14);
  const Jet t = f.truncate(2);
  EXPECT_EQ(t.degree(), 2);
  EXPECT_DOUBLE_EQ(t.coeff({1, 1}), f.coeff({1, 1}));
}

TEST(JetCalculus, IntegerAndReciprocalPowers) {
  const auto xs = aht::coordinate_jets(std::vector<double>{1.3}, 4);
  const Jet p = aht::pow(xs[0], 3);
  const Jet q = xs[0] * xs[0] * xs[0];
  const Jet r = aht::pow(xs[0], -2) * xs[0] * xs[0];
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(p.coeff_at(k), q.coeff_at(k), 1e-14);
    EXPECT_NEAR(r.coeff_at(k), k == 0 ? 1.0 : 0.0, 1e-14);
  }
}
