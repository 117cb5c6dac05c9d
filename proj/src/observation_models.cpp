#include "sparsebound/observation_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sparsebound {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_lengths(std::span<const double> x_support, const LatentCoefficients& beta) {
  if (x_support.size() != beta.values.size()) {
    throw DomainError("x_S has " + std::to_string(x_support.size()) + " entries but beta_S has " +
                      std::to_string(beta.values.size()));
  }
}

bool any_positive(std::span<const double> x_support) {
  for (double v : x_support) {
    if (v != 0.0) return true;
  }
  return false;
}

double inner(std::span<const double> x_support, const LatentCoefficients& beta) {
  double s = 0.0;
  for (std::size_t k = 0; k < x_support.size(); ++k) s += x_support[k] * beta.values[k];
  return s;
}

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  // Lower-tail asymptotic series of the Mills ratio.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

std::vector<double> restrict_to_support(std::span<const double> x, const SupportSet& support) {
  std::vector<double> out;
  out.reserve(support.size());
  for (std::size_t idx : support.members()) out.push_back(x[idx]);
  return out;
}

ObservationModel::ObservationModel(Variant model) : model_(model) {
  std::visit(Overloaded{
                 [](const GroupTestingModel& m) {
                   if (!(m.crossover >= 0.0 && m.crossover < 0.5)) {
                     throw DomainError("group testing crossover must lie in [0, 0.5)");
                   }
                 },
                 [](const auto& m) {
                   if (!(m.snr > 0.0)) throw DomainError("snr must be positive");
                 },
             },
             model_);
}

OutputAlphabet ObservationModel::output_alphabet() const noexcept {
  return std::holds_alternative<LinearCsModel>(model_) ? OutputAlphabet::kReal
                                                       : OutputAlphabet::kBinary;
}

std::string ObservationModel::name() const {
  return std::visit(Overloaded{
                        [](const GroupTestingModel&) { return std::string("group_testing"); },
                        [](const OneBitCsModel&) { return std::string("one_bit_cs"); },
                        [](const LinearCsModel&) { return std::string("linear_cs"); },
                    },
                    model_);
}

double ObservationModel::positive_probability(std::span<const double> x_support,
                                              const LatentCoefficients& beta) const {
  check_lengths(x_support, beta);
  return std::visit(
      Overloaded{
          [&](const GroupTestingModel& m) {
            return any_positive(x_support) ? 1.0 - m.crossover : m.crossover;
          },
          [&](const OneBitCsModel& m) { return normal_cdf(std::sqrt(m.snr) * inner(x_support, beta)); },
          [](const LinearCsModel&) -> double {
            throw UnsupportedError("positive_probability is undefined for real-valued outputs");
          },
      },
      model_);
}

double ObservationModel::sample(std::span<const double> x_support, const LatentCoefficients& beta,
                                Rng& rng) const {
  check_lengths(x_support, beta);
  return std::visit(
      Overloaded{
          [&](const GroupTestingModel& m) {
            double y = any_positive(x_support) ? 1.0 : 0.0;
            if (m.crossover > 0.0) {
              std::bernoulli_distribution flip(m.crossover);
              if (flip(rng)) y = 1.0 - y;
            }
            return y;
          },
          [&](const OneBitCsModel& m) {
            std::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(m.snr));
            return inner(x_support, beta) + noise(rng) >= 0.0 ? 1.0 : 0.0;
          },
          [&](const LinearCsModel& m) {
            std::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(m.snr));
            return inner(x_support, beta) + noise(rng);
          },
      },
      model_);
}

double ObservationModel::log_likelihood(double y, std::span<const double> x_support,
                                        const LatentCoefficients& beta) const {
  check_lengths(x_support, beta);
  return std::visit(
      Overloaded{
          [&](const GroupTestingModel& m) {
            const double p1 = any_positive(x_support) ? 1.0 - m.crossover : m.crossover;
            return log_or_neg_inf(y != 0.0 ? p1 : 1.0 - p1);
          },
          [&](const OneBitCsModel& m) {
            const double z = std::sqrt(m.snr) * inner(x_support, beta);
            return log_normal_cdf(y != 0.0 ? z : -z);
          },
          [&](const LinearCsModel& m) {
            const double r = y - inner(x_support, beta);
            return 0.5 * std::log(m.snr / (2.0 * std::numbers::pi)) - 0.5 * m.snr * r * r;
          },
      },
      model_);
}

}  // namespace sparsebound
