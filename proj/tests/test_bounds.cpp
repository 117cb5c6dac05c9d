#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sparsebound/bounds.hpp"

using namespace sparsebound;

namespace {

std::map<std::size_t, double> constant_mi(std::size_t k, double v) {
  std::map<std::size_t, double> m;
  for (std::size_t j = 0; j < k; ++j) m[j] = v;
  return m;
}

}  // namespace

TEST(BoundForm, ParseAndSlack) {
  EXPECT_EQ(parse_bound_form("asymptotic"), BoundForm::kAsymptotic);
  EXPECT_EQ(parse_bound_form("finite-fano"), BoundForm::kFiniteFano);
  EXPECT_THROW(parse_bound_form("loose"), DomainError);
  EXPECT_EQ(fano_slack(BoundForm::kAsymptotic), 0.0);
  EXPECT_EQ(fano_slack(BoundForm::kFiniteFano), std::numbers::ln2);
}

TEST(Nonadaptive, BinaryCapGivesLog2Binomial) {
  const auto r = binary_output_lower_bound(ProblemDims(8, 2), BoundForm::kAsymptotic);
  EXPECT_NEAR(r.overall.value, std::log2(28.0), 1e-12);
  EXPECT_NEAR(r.overall.value, 4.807, 1e-3);
  EXPECT_EQ(r.argmax_revealed_size, 0U);
  ASSERT_EQ(r.per_subset_terms.size(), 2U);
  EXPECT_NEAR(r.per_subset_terms[1].t_bound.value, std::log2(7.0), 1e-12);
}

TEST(Nonadaptive, FiniteFormSubtractsOneBit) {
  const auto r = binary_output_lower_bound(ProblemDims(8, 2), BoundForm::kFiniteFano);
  EXPECT_NEAR(r.overall.value, std::log2(28.0) - 1.0, 1e-12);
}

TEST(Nonadaptive, PicksTheLargestTerm) {
  auto mi = constant_mi(3, 0.5);
  mi[2] = 0.01;  // information about the last item is tiny
  const auto r = nonadaptive_lower_bound(ProblemDims(20, 3), mi, BoundForm::kAsymptotic);
  EXPECT_EQ(r.argmax_revealed_size, 2U);
  EXPECT_NEAR(r.overall.value, std::log(18.0) / 0.01, 1e-9);
}

TEST(Nonadaptive, ZeroInformationIsUnbounded) {
  const auto r = nonadaptive_lower_bound(ProblemDims(10, 2), constant_mi(2, 0.0), BoundForm::kAsymptotic);
  EXPECT_TRUE(r.overall.unbounded);
}

TEST(Nonadaptive, NothingLeftToLearnGivesZero) {
  // K = N: a single candidate.
  const auto r = nonadaptive_lower_bound(ProblemDims(3, 3), constant_mi(3, 0.0), BoundForm::kAsymptotic);
  EXPECT_FALSE(r.overall.unbounded);
  EXPECT_EQ(r.overall.value, 0.0);
  // Finite form where the uncertainty is below one bit.
  const auto f = nonadaptive_lower_bound(ProblemDims(2, 1), constant_mi(1, 0.0), BoundForm::kFiniteFano);
  EXPECT_FALSE(f.overall.unbounded);
  EXPECT_EQ(f.overall.value, 0.0);
}

TEST(Nonadaptive, Validation) {
  std::map<std::size_t, double> missing{{0, 0.3}};
  EXPECT_THROW(nonadaptive_lower_bound(ProblemDims(10, 2), missing, BoundForm::kAsymptotic), DomainError);
  EXPECT_THROW(nonadaptive_lower_bound(ProblemDims(10, 2), constant_mi(2, -0.1), BoundForm::kAsymptotic),
               DomainError);
}

TEST(Adaptive, ConstantProfileReducesBitExactly) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = 1 + rng() % 5;
    const std::size_t n = k + 1 + rng() % 40;
    std::map<std::size_t, double> mi;
    std::map<std::size_t, SequenceMiProfile> profiles;
    for (std::size_t j = 0; j < k; ++j) {
      mi[j] = u(rng);
      profiles[j] = make_profile(std::vector<MiEstimate>(1 + rng() % 50, {mi[j], MiMethod::kClosedForm, {}, {}}));
    }
    for (auto form : {BoundForm::kAsymptotic, BoundForm::kFiniteFano}) {
      const auto dims = ProblemDims::uncapped(n, k);
      EXPECT_EQ(adaptive_lower_bound(dims, profiles, form), nonadaptive_lower_bound(dims, mi, form));
    }
  }
}

TEST(Fano, SpecExampleAtSingleTest) {
  // N=8, K=2, T=1, I = H(0.75).
  const double mi = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
  const double expected = 1.0 - (mi + std::numbers::ln2) / std::log(28.0);
  EXPECT_NEAR(fano_error_lower_bound(1, mi, 8, 2, 0), expected, 1e-15);
  EXPECT_NEAR(fano_error_lower_bound(1, mi, 8, 2, 0), 0.623, 1e-3);
  EXPECT_EQ(fano_error_lower_bound(100, mi, 8, 2, 0), 0.0);
  EXPECT_EQ(fano_error_lower_bound(1, 0.1, 5, 5, 0), 0.0);
  EXPECT_THROW(fano_error_lower_bound(1, 0.1, 5, 2, 2), DomainError);
}

TEST(Circulant, MatchesDenseEigensolver) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t d = 1; d <= 8; ++d) {
    for (int rep = 0; rep < 30; ++rep) {
      const double diag = 0.5 + 3.0 * (u(rng) + 1.0);
      double rho = diag * u(rng);
      if (d > 1) rho = std::max(rho, -diag / static_cast<double>(d - 1));
      Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, rho);
      m.diagonal().setConstant(diag);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
      std::vector<double> oracle(eig.eigenvalues().data(), eig.eigenvalues().data() + d);
      auto got = circulant_eigenvalues(d, diag, rho);
      std::sort(got.begin(), got.end());
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(got[i], oracle[i], 1e-10);
    }
  }
}

TEST(Circulant, NegativeEigenvalueIsNamed) {
  try {
    circulant_eigenvalues(4, 1.0, -0.5);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue 0"), std::string::npos);
  }
  EXPECT_THROW(circulant_eigenvalues(3, 1.0, 1.5), DomainError);
  EXPECT_THROW(circulant_eigenvalues(0, 1.0, 0.0), DomainError);
}

TEST(PowerAllocation, ValidationAndUniform) {
  EXPECT_THROW(PowerAllocation({0.5, 0.6}), DomainError);
  EXPECT_THROW(PowerAllocation({1.2, -0.2}), DomainError);
  EXPECT_THROW(PowerAllocation::uniform(0), DomainError);
  const auto u = PowerAllocation::uniform(1000000);
  EXPECT_EQ(u.steps(), 1000000U);
  EXPECT_EQ(u.weights()[0], 1e-6);
}

TEST(SequenceCap, UniformBeatsRandomAllocations) {
  std::mt19937_64 rng(3);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (std::size_t t : {2, 5, 17}) {
    const double uni = sequence_mi_cap(4.0, 64, 4, 1, PowerAllocation::uniform(t));
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> w(t);
      double s = 0.0;
      for (auto& v : w) s += v = gamma(rng);
      for (auto& v : w) v /= s;
      w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
      w.back() = std::max(0.0, w.back());
      EXPECT_GE(uni, sequence_mi_cap(4.0, 64, 4, 1, PowerAllocation(w)));
    }
  }
}

TEST(CsFeasibility, LhsIsMonotoneInT) {
  double prev = 0.0;
  for (std::uint64_t t = 1; t < 5000; t = t * 3 / 2 + 1) {
    const auto r = cs_feasibility(t, 1.3, 64, 8, BoundForm::kAsymptotic);
    EXPECT_GE(r.per_i_terms[0].lhs, prev);
    prev = r.per_i_terms[0].lhs;
  }
}

TEST(CsFeasibility, ThresholdExample) {
  const double s = snr_necessary(64, 32, BoundForm::kAsymptotic);
  EXPECT_NEAR(s, std::log(33.0), 1e-14);
  EXPECT_NEAR(s, 3.497, 1e-3);
  EXPECT_FALSE(cs_feasibility(1000000, 3.4, 64, 32, BoundForm::kAsymptotic).feasible);
  EXPECT_FALSE(min_feasible_t(3.4, 64, 32, BoundForm::kAsymptotic, 1000000).has_value());
  EXPECT_THROW(snr_necessary(4, 4, BoundForm::kAsymptotic), DomainError);
}

TEST(CsFeasibility, MinimumIsTight) {
  for (double snr : {5.0, 10.0, 40.0}) {
    const auto t = min_feasible_t(snr, 64, 32, BoundForm::kFiniteFano);
    ASSERT_TRUE(t.has_value());
    EXPECT_TRUE(cs_feasibility(*t, snr, 64, 32, BoundForm::kFiniteFano).feasible);
    if (*t > 1) EXPECT_FALSE(cs_feasibility(*t - 1, snr, 64, 32, BoundForm::kFiniteFano).feasible);
  }
}

TEST(CsFeasibility, ThresholdScalesWithK) {
  const double a = snr_necessary(1000, 5, BoundForm::kAsymptotic);
  const double b = snr_necessary(1000, 10, BoundForm::kAsymptotic);
  EXPECT_NEAR(b / a, 2.0 * std::log(991.0) / std::log(996.0), 1e-12);
  EXPECT_LT(snr_necessary(10000, 1, BoundForm::kAsymptotic), snr_necessary(1000, 1, BoundForm::kAsymptotic));
}
