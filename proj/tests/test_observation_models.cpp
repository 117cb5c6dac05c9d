#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sparsebound/observation_models.hpp"

using namespace sparsebound;

TEST(Models, ConstructionValidates) {
  EXPECT_THROW(ObservationModel(GroupTestingModel{0.5}), DomainError);
  EXPECT_THROW(ObservationModel(GroupTestingModel{-0.1}), DomainError);
  EXPECT_THROW(ObservationModel(OneBitCsModel{0.0}), DomainError);
  EXPECT_THROW(ObservationModel(LinearCsModel{-1.0}), DomainError);
  EXPECT_EQ(ObservationModel(GroupTestingModel{0.1}).name(), "group_testing");
  EXPECT_EQ(ObservationModel(LinearCsModel{2.0}).output_alphabet(), OutputAlphabet::kReal);
}

TEST(GroupTesting, NoiselessIsOr) {
  const ObservationModel m(GroupTestingModel{0.0});
  const auto beta = LatentCoefficients::ones(3);
  Rng rng = make_rng({1});
  EXPECT_EQ(m.sample(std::vector<double>{0, 0, 0}, beta, rng), 0.0);
  EXPECT_EQ(m.sample(std::vector<double>{0, 1, 0}, beta, rng), 1.0);
  EXPECT_EQ(m.sample(std::vector<double>{1, 1, 1}, beta, rng), 1.0);
  EXPECT_EQ(m.log_likelihood(1.0, std::vector<double>{0, 0, 0}, beta),
            -std::numeric_limits<double>::infinity());
  EXPECT_EQ(m.log_likelihood(0.0, std::vector<double>{0, 0, 0}, beta), 0.0);
}

TEST(GroupTesting, CrossoverFlipsBothWays) {
  const double rho = 0.2;
  const ObservationModel m(GroupTestingModel{rho});
  const auto beta = LatentCoefficients::ones(2);
  EXPECT_NEAR(m.positive_probability(std::vector<double>{0, 0}, beta), rho, 1e-15);
  EXPECT_NEAR(m.positive_probability(std::vector<double>{1, 0}, beta), 1 - rho, 1e-15);
  Rng rng = make_rng({2});
  int ones = 0;
  for (int i = 0; i < 20000; ++i) ones += m.sample(std::vector<double>{0, 0}, beta, rng) != 0.0;
  EXPECT_NEAR(ones / 20000.0, rho, 0.015);
}

TEST(OneBitCs, ProbitProbability) {
  const double snr = 4.0;
  const ObservationModel m(OneBitCsModel{snr});
  const LatentCoefficients beta{{1.0, -1.0}};
  const std::vector<double> x{0.3, -0.2};
  const double z = std::sqrt(snr) * (0.3 + 0.2);
  const double expected = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  EXPECT_NEAR(m.positive_probability(x, beta), expected, 1e-15);
  EXPECT_NEAR(m.log_likelihood(1.0, x, beta), std::log(expected), 1e-12);
  EXPECT_NEAR(m.log_likelihood(0.0, x, beta), std::log1p(-expected), 1e-12);
}

TEST(OneBitCs, ZeroInnerProductIsFairCoinAndTiesGoPositive) {
  const ObservationModel m(OneBitCsModel{1.0});
  const auto beta = LatentCoefficients::ones(2);
  EXPECT_DOUBLE_EQ(m.positive_probability(std::vector<double>{0.0, 0.0}, beta), 0.5);
}

TEST(LinearCs, GaussianDensityAndMoments) {
  const double snr = 2.0;
  const ObservationModel m(LinearCsModel{snr});
  const LatentCoefficients beta{{1.0, -1.0}};
  const std::vector<double> x{1.5, 0.5};
  const double mean = 1.0;
  const double y = 1.7;
  const double expected =
      0.5 * std::log(snr / (2 * std::numbers::pi)) - 0.5 * snr * (y - mean) * (y - mean);
  EXPECT_NEAR(m.log_likelihood(y, x, beta), expected, 1e-13);
  EXPECT_THROW((void)m.positive_probability(x, beta), UnsupportedError);

  Rng rng = make_rng({3});
  double s = 0.0, s2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double v = m.sample(x, beta, rng);
    s += v;
    s2 += v * v;
  }
  const double mu = s / n;
  EXPECT_NEAR(mu, mean, 0.02);
  EXPECT_NEAR(s2 / n - mu * mu, 1.0 / snr, 0.02);
}

TEST(Models, LengthMismatchIsDomainError) {
  const ObservationModel m(GroupTestingModel{0.0});
  EXPECT_THROW((void)m.log_likelihood(0.0, std::vector<double>{1.0}, LatentCoefficients::ones(2)),
               DomainError);
}

TEST(Models, LikelihoodDependsOnlyOnSupportCoordinates) {
  const SupportSet s({1, 3});
  const std::vector<double> x1{9.0, 1.0, 9.0, 0.0};
  const std::vector<double> x2{-4.0, 1.0, 2.0, 0.0};
  EXPECT_EQ(restrict_to_support(x1, s), restrict_to_support(x2, s));
}

TEST(NormalCdf, LogTailIsAccurate) {
  for (double z : {-1.0, -5.0, -20.0, -35.0, -50.0}) {
    const double direct = std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    if (std::isfinite(direct)) EXPECT_NEAR(log_normal_cdf(z), direct, 1e-9 * std::abs(direct));
  }
  // Mills-ratio leading term deep in the tail.
  const double z = -60.0;
  const double approx = -0.5 * z * z - std::log(-z) - 0.5 * std::log(2 * std::numbers::pi);
  EXPECT_NEAR(log_normal_cdf(z), approx, 1e-3);
  EXPECT_NEAR(log_normal_cdf(3.0), std::log(normal_cdf(3.0)), 1e-15);
}
