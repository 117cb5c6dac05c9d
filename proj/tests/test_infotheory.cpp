#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "sparsebound/infotheory.hpp"
#include "sparsebound/strategies.hpp"

using namespace sparsebound;

namespace {

double entropy(const std::map<std::vector<double>, double>& p) {
  double h = 0.0;
  for (const auto& [key, v] : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

/// I(X_{S'}; Y | X_{S~}) from the full joint table, S~ = first j positions.
double joint_table_mi(const ObservationModel& model, const DiscreteDesign& d, std::size_t k,
                      std::size_t j, const LatentCoefficients& beta) {
  std::map<std::vector<double>, double> p_c, p_cx, p_cy, p_cxy;
  const std::size_t a = d.values.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= a;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<double> x(k);
    double px = 1.0;
    std::size_t r = code;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = d.values[r % a];
      px *= d.pmf[r % a];
      r /= a;
    }
    const double q = model.positive_probability(x, beta);
    const std::vector<double> c(x.begin(), x.begin() + static_cast<long>(j));
    for (double y : {0.0, 1.0}) {
      const double pxy = px * (y == 1.0 ? q : 1.0 - q);
      auto cy = c;
      cy.push_back(y);
      auto cxy = x;
      cxy.push_back(y);
      p_cy[cy] += pxy;
      p_cxy[cxy] += pxy;
    }
    p_c[c] += px;
    p_cx[x] += px;
  }
  return entropy(p_cy) + entropy(p_cx) - entropy(p_c) - entropy(p_cxy);
}

/// ∫ f(z) φ(z) dz by the trapezoid rule on [-12, 12].
template <class F>
double gauss_expect(F f) {
  const int steps = 48000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    s += w * f(z) * std::exp(-0.5 * z * z);
  }
  return s * h / std::sqrt(2 * std::numbers::pi);
}

}  // namespace

TEST(BinaryEntropy, KnownValues) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), std::numbers::ln2, 1e-16);
  EXPECT_THROW(binary_entropy(1.5), DomainError);
}

TEST(ExactMi, NoiselessGroupTestingExample) {
  const ObservationModel gt(GroupTestingModel{0.0});
  const auto d = DesignDistribution::bernoulli(0.5);
  const auto est = exact_conditional_mi(gt, d, 2, 0, LatentCoefficients::ones(2));
  EXPECT_NEAR(est.value, binary_entropy(0.75), 1e-15);
  EXPECT_NEAR(est.value, 0.56234, 1e-5);
  EXPECT_EQ(est.method, MiMethod::kExactEnumeration);
}

TEST(ExactMi, MatchesJointTableOracle) {
  const std::vector<ObservationModel> models{
      ObservationModel(GroupTestingModel{0.0}), ObservationModel(GroupTestingModel{0.1}),
      ObservationModel(OneBitCsModel{2.0}), ObservationModel(OneBitCsModel{0.3})};
  const std::vector<DiscreteDesign> designs{{{0.0, 1.0}, {0.7, 0.3}},
                                            {{-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}}};
  for (const auto& m : models) {
    for (const auto& d : designs) {
      for (std::size_t k : {1, 2, 3}) {
        for (std::size_t j = 0; j < k; ++j) {
          LatentCoefficients beta = LatentCoefficients::ones(k);
          if (k > 1) beta.values[1] = -1.0;
          const double got = exact_conditional_mi(m, DesignDistribution(d), k, j, beta).value;
          EXPECT_NEAR(got, joint_table_mi(m, d, k, j, beta), 1e-12)
              << m.name() << " k=" << k << " j=" << j;
          EXPECT_LE(got, std::numbers::ln2 + 1e-12);
        }
      }
    }
  }
}

TEST(ExactMi, RejectsUnsupportedInputs) {
  const ObservationModel lin(LinearCsModel{1.0});
  const auto d = DesignDistribution::bernoulli(0.5);
  EXPECT_THROW(exact_conditional_mi(lin, d, 2, 0, LatentCoefficients::ones(2)), UnsupportedError);
  const ObservationModel gt(GroupTestingModel{0.0});
  EXPECT_THROW(exact_conditional_mi(gt, d, 2, 2, LatentCoefficients::ones(2)), DomainError);
  EXPECT_THROW(exact_conditional_mi(gt, d, 30, 0, LatentCoefficients::ones(30), 1000),
               ResourceError);
}

TEST(DesignDistribution, Validates) {
  EXPECT_THROW(DesignDistribution(DiscreteDesign{{0.0, 1.0}, {0.5, 0.6}}), DomainError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(DesignDistribution(GaussianDesign{bad}), DomainError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  EXPECT_THROW(DesignDistribution(GaussianDesign{asym}), DomainError);
}

TEST(LinearClosedForm, FormulaAndEdges) {
  EXPECT_NEAR(linear_cs_mi_closed_form(2.0, 64, 4, 1, 0.25), 0.5 * std::log1p(2.0 * 3 * 64 * 0.25 / 4),
              1e-15);
  EXPECT_EQ(linear_cs_mi_closed_form(0.0, 64, 4, 0, 0.5), 0.0);
  EXPECT_EQ(linear_cs_mi_closed_form(5.0, 64, 4, 0, 0.0), 0.0);
  EXPECT_THROW(linear_cs_mi_closed_form(1.0, 64, 4, 4, 0.5), DomainError);
  EXPECT_THROW(linear_cs_mi_closed_form(1.0, 64, 4, 0, 1.5), DomainError);
}

TEST(LinearMonteCarlo, IdentityCovarianceIsExact) {
  Rng rng = make_rng({4});
  const double snr = 3.0, power = 0.2;
  const Eigen::MatrixXd cov = power * Eigen::MatrixXd::Identity(4, 4);
  const auto est = linear_cs_mi_mc(snr, cov, 1, 5000, rng);
  EXPECT_NEAR(est.value, 0.5 * std::log1p(snr * 3 * power), 1e-12);
  EXPECT_NEAR(*est.std_error, 0.0, 1e-12);
}

TEST(ConditionalCovariance, MatchesSchurComplementOracle) {
  Rng rng = make_rng({8});
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(5, 5);
    for (int i = 0; i < 25; ++i) a.data()[i] = g(rng);
    const Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
    for (int j = 0; j < 5; ++j) {
      Eigen::MatrixXd expected = cov.bottomRightCorner(5 - j, 5 - j);
      if (j > 0) {
        expected -= cov.bottomLeftCorner(5 - j, j) * cov.topLeftCorner(j, j).inverse() *
                    cov.topRightCorner(j, 5 - j);
      }
      EXPECT_LT((conditional_covariance(cov, j) - expected).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(BinaryChannelMc, SingleCoordinateMatchesQuadrature) {
  const double snr = 2.0, var = 0.5;
  const double oracle = std::numbers::ln2 - gauss_expect([&](double z) {
                          return binary_entropy(normal_cdf(std::sqrt(snr * var) * z));
                        });
  Rng rng = make_rng({12});
  const DesignDistribution d(GaussianDesign{var * Eigen::MatrixXd::Identity(1, 1)});
  const auto est = binary_channel_mi_mc(OneBitCsModel{snr}, d, 1, 0, LatentCoefficients::ones(1),
                                        20000, rng);
  ASSERT_TRUE(est.std_error);
  EXPECT_NEAR(est.value, oracle, 4.0 * *est.std_error + 1e-4);
  EXPECT_LE(est.value, std::numbers::ln2);
}

TEST(BinaryChannelMc, RevealedCoordinateMatchesQuadrature) {
  const double snr = 5.0;
  // I(X2; Y | X1) with x ~ N(0, I), β = (1, 1).
  const double h_marginal = gauss_expect([&](double z) {
    return binary_entropy(normal_cdf(z / std::sqrt(1.0 + 1.0 / snr)));
  });
  const double h_full = gauss_expect([&](double z) {
    return binary_entropy(normal_cdf(std::sqrt(snr * 2.0) * z));
  });
  Rng rng = make_rng({13});
  const DesignDistribution d(GaussianDesign{Eigen::MatrixXd::Identity(2, 2)});
  const auto est = binary_channel_mi_mc(OneBitCsModel{snr}, d, 2, 1, LatentCoefficients::ones(2),
                                        40000, rng);
  EXPECT_NEAR(est.value, h_marginal - h_full, 4.0 * *est.std_error + 1e-4);
}

TEST(Profile, ConstantProfileAverageIsExact) {
  const double v = 0.1 + 0.2;
  std::vector<MiEstimate> steps(37, MiEstimate{v, MiMethod::kClosedForm, {}, {}});
  EXPECT_EQ(make_profile(steps).average, v);
  EXPECT_THROW(make_profile({}), DomainError);
}

TEST(PlugIn, ApproachesExactValueForNonadaptiveDesign) {
  const ObservationModel gt(GroupTestingModel{0.0});
  const std::size_t n = 6, k = 2, t_len = 3, traces_count = 20000;
  const auto dims = ProblemDims(n, k);
  std::vector<SupportTrace> traces;
  traces.reserve(traces_count);
  Rng rng = make_rng({21});
  for (std::size_t m = 0; m < traces_count; ++m) {
    SupportTrace tr{MeasurementHistory(n), draw_support(dims, rng), {}, LatentCoefficients::ones(k)};
    for (std::size_t t = 0; t < t_len; ++t) {
      auto x = bernoulli_design(n, 0.5, rng);
      const double y = gt.sample(restrict_to_support(x, tr.support), tr.beta, rng);
      tr.history.push(std::move(x), y);
    }
    traces.push_back(std::move(tr));
  }
  const auto profile = plugin_sequence_mi(traces);
  ASSERT_EQ(profile.per_step.size(), t_len);
  const double exact = binary_entropy(0.75);
  EXPECT_NEAR(profile.average, exact, 0.01);
  ASSERT_TRUE(profile.std_error);
  EXPECT_GT(*profile.std_error, 0.0);
}

TEST(PlugIn, RejectsTooFewTraces) {
  std::vector<SupportTrace> traces(10, SupportTrace{MeasurementHistory(3), SupportSet({0}), {},
                                                    LatentCoefficients::ones(1)});
  EXPECT_THROW(plugin_sequence_mi(traces), DomainError);
}

TEST(Bootstrap, StandardErrorOfMean) {
  Rng rng = make_rng({30});
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> v(4000);
  for (auto& x : v) x = g(rng);
  const double se = bootstrap_std_error(v, 400, rng);
  EXPECT_NEAR(se, 2.0 / std::sqrt(4000.0), 0.2 * 2.0 / std::sqrt(4000.0));
}
