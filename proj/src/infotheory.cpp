#include "sparsebound/infotheory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace sparsebound {

namespace {

constexpr double kNegativeClamp = 1e-9;

double clamp_nonnegative(double v) {
  if (v < 0.0 && v >= -kNegativeClamp) return 0.0;
  return v;
}

double psd_tolerance(const Eigen::MatrixXd& m) {
  return 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

void validate_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols()) {
    throw DomainError("covariance must be a non-empty square matrix");
  }
  if (!cov.allFinite()) throw DomainError("covariance has non-finite entries");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > psd_tolerance(cov)) {
    throw DomainError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -psd_tolerance(cov)) {
    throw DomainError("covariance is not positive semidefinite (min eigenvalue " +
                      std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
}

/// Symmetric factor L with L·Lᵀ = cov, tolerant of singular covariances.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const double cutoff = psd_tolerance(m);
  Eigen::VectorXd inv = eig.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > cutoff ? 1.0 / inv[i] : 0.0;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double entropy_from_counts(const std::unordered_map<std::uint64_t, std::uint64_t>& counts,
                           double total) {
  // Summed in key order for run-to-run stability of the last bits.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  double h = 0.0;
  for (const auto& [key, c] : sorted) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

std::string to_string(MiMethod method) {
  switch (method) {
    case MiMethod::kExactEnumeration:
      return "exact-enumeration";
    case MiMethod::kClosedForm:
      return "closed-form";
    case MiMethod::kPlugIn:
      return "plug-in";
    case MiMethod::kMonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

SequenceMiProfile make_profile(std::vector<MiEstimate> per_step) {
  SequenceMiProfile profile;
  if (per_step.empty()) throw DomainError("profile needs at least one step");
  // Mean as v0 + mean(v_t - v0): exact for constant profiles.
  const double v0 = per_step.front().value;
  double offset = 0.0;
  bool all_have_se = true;
  double se_sq = 0.0;
  for (const auto& step : per_step) {
    offset += step.value - v0;
    if (step.std_error) {
      se_sq += *step.std_error * *step.std_error;
    } else {
      all_have_se = false;
    }
  }
  const auto t = static_cast<double>(per_step.size());
  profile.average = v0 + offset / t;
  if (all_have_se) profile.std_error = std::sqrt(se_sq) / t;
  profile.per_step = std::move(per_step);
  return profile;
}

DesignDistribution::DesignDistribution(DiscreteDesign d) : d_(std::move(d)) {
  const auto& dd = std::get<DiscreteDesign>(d_);
  if (dd.values.empty() || dd.values.size() != dd.pmf.size()) {
    throw DomainError("discrete design needs matching non-empty values and pmf");
  }
  double total = 0.0;
  for (double p : dd.pmf) {
    if (!(p >= 0.0)) throw DomainError("pmf entries must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("pmf must sum to 1");
}

DesignDistribution::DesignDistribution(GaussianDesign g) : d_(std::move(g)) {
  validate_covariance(std::get<GaussianDesign>(d_).covariance);
}

DesignDistribution DesignDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("Bernoulli parameter must lie in [0, 1]");
  return DesignDistribution(DiscreteDesign{{0.0, 1.0}, {1.0 - p, p}});
}

DesignDistribution DesignDistribution::point_mass(double value) {
  return DesignDistribution(DiscreteDesign{{value}, {1.0}});
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_entropy: p outside [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

MiEstimate exact_conditional_mi(const ObservationModel& model, const DesignDistribution& dist,
                                std::size_t k, std::size_t revealed_size,
                                const LatentCoefficients& beta, std::uint64_t enumeration_cap) {
  if (model.output_alphabet() != OutputAlphabet::kBinary) {
    throw UnsupportedError("exact_conditional_mi needs a binary-output model");
  }
  if (!dist.is_discrete()) {
    throw UnsupportedError("exact_conditional_mi needs a discrete design distribution");
  }
  if (k == 0 || revealed_size >= k) throw DomainError("need 0 <= |S~| < K");
  if (beta.values.size() != k) throw DomainError("beta_S must have K entries");
  const auto& design = std::get<DiscreteDesign>(dist.variant());
  const std::size_t a = design.values.size();

  std::uint64_t outer = 1;
  std::uint64_t inner = 1;
  for (std::size_t i = 0; i < k; ++i) {
    auto& slot = i < revealed_size ? outer : inner;
    if (slot > enumeration_cap / a) {
      throw ResourceError("exact_conditional_mi: alphabet^K exceeds the enumeration cap");
    }
    slot *= a;
  }
  if (outer * inner > enumeration_cap) {
    throw ResourceError("exact_conditional_mi: alphabet^K exceeds the enumeration cap");
  }

  std::vector<std::size_t> digits(k, 0);
  std::vector<double> x(k, 0.0);
  double h_y_given_revealed = 0.0;
  double h_y_given_support = 0.0;
  for (std::uint64_t o = 0; o < outer; ++o) {
    std::uint64_t rest = o;
    double p_outer = 1.0;
    for (std::size_t i = 0; i < revealed_size; ++i) {
      digits[i] = rest % a;
      rest /= a;
      x[i] = design.values[digits[i]];
      p_outer *= design.pmf[digits[i]];
    }
    if (p_outer == 0.0) continue;
    double p_positive = 0.0;
    double h_inner = 0.0;
    for (std::uint64_t in = 0; in < inner; ++in) {
      std::uint64_t r = in;
      double p_in = 1.0;
      for (std::size_t i = revealed_size; i < k; ++i) {
        digits[i] = r % a;
        r /= a;
        x[i] = design.values[digits[i]];
        p_in *= design.pmf[digits[i]];
      }
      if (p_in == 0.0) continue;
      const double q = model.positive_probability(x, beta);
      p_positive += p_in * q;
      h_inner += p_in * binary_entropy(q);
    }
    h_y_given_revealed += p_outer * binary_entropy(std::clamp(p_positive, 0.0, 1.0));
    h_y_given_support += p_outer * h_inner;
  }
  return {clamp_nonnegative(h_y_given_revealed - h_y_given_support),
          MiMethod::kExactEnumeration, std::nullopt, std::nullopt};
}

Eigen::MatrixXd conditional_covariance(const Eigen::MatrixXd& covariance,
                                       std::size_t revealed_size) {
  const auto k = static_cast<Eigen::Index>(covariance.rows());
  const auto j = static_cast<Eigen::Index>(revealed_size);
  if (j >= k) throw DomainError("need |S~| < K");
  const Eigen::MatrixXd rest = covariance.bottomRightCorner(k - j, k - j);
  if (j == 0) return rest;
  const Eigen::MatrixXd cross = covariance.bottomLeftCorner(k - j, j);
  const Eigen::MatrixXd revealed = covariance.topLeftCorner(j, j);
  Eigen::MatrixXd schur = rest - cross * psd_pseudo_inverse(revealed) * cross.transpose();
  return 0.5 * (schur + schur.transpose());
}

MiEstimate binary_channel_mi_mc(const OneBitCsModel& model, const DesignDistribution& dist,
                                std::size_t k, std::size_t revealed_size,
                                const LatentCoefficients& beta, std::size_t samples, Rng& rng) {
  if (!(model.snr > 0.0)) throw DomainError("snr must be positive");
  if (dist.is_discrete()) {
    throw UnsupportedError("binary_channel_mi_mc needs a Gaussian design; use exact_conditional_mi");
  }
  if (samples < 1000) throw DomainError("binary_channel_mi_mc needs at least 1000 samples");
  const auto& cov = std::get<GaussianDesign>(dist.variant()).covariance;
  if (static_cast<std::size_t>(cov.rows()) != k || beta.values.size() != k) {
    throw DomainError("covariance and beta_S must both have K entries");
  }
  if (revealed_size >= k) throw DomainError("need |S~| < K");

  const auto kk = static_cast<Eigen::Index>(k);
  const auto j = static_cast<Eigen::Index>(revealed_size);
  const Eigen::Map<const Eigen::VectorXd> b(beta.values.data(), kk);
  const Eigen::VectorXd b_rest = b.tail(kk - j);
  const Eigen::MatrixXd factor = psd_factor(cov);
  const Eigen::MatrixXd schur = conditional_covariance(cov, revealed_size);
  const double residual_var = b_rest.dot(schur * b_rest) + 1.0 / model.snr;
  if (!(residual_var > 0.0)) throw DomainError("degenerate conditional variance");
  // Regression of β_{S'}ᵀ x_{S'} on x_{S̃}.
  Eigen::RowVectorXd regress = Eigen::RowVectorXd::Zero(j);
  if (j > 0) {
    regress = b_rest.transpose() * cov.bottomLeftCorner(kk - j, j) *
              psd_pseudo_inverse(cov.topLeftCorner(j, j));
  }
  const double sqrt_snr = std::sqrt(model.snr);
  const double marginal_scale = 1.0 / std::sqrt(residual_var);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(kk);
  std::vector<double> diffs(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < kk; ++i) z[i] = gauss(rng);
    const Eigen::VectorXd x = factor * z;
    const double full = b.dot(x);
    double partial = 0.0;
    if (j > 0) partial = b.head(j).dot(x.head(j)) + regress.dot(x.head(j));
    const double p_full = normal_cdf(sqrt_snr * full);
    const double p_marginal = normal_cdf(partial * marginal_scale);
    diffs[s] = binary_entropy(p_marginal) - binary_entropy(p_full);
  }
  const double se = bootstrap_std_error(diffs, kBootstrapResamples, rng);
  return {clamp_nonnegative(mean_of(diffs)), MiMethod::kMonteCarlo, samples, se};
}

double linear_cs_mi_closed_form(double snr, std::size_t n, std::size_t k,
                                std::size_t revealed_size, double power_fraction) {
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw DomainError("snr must be finite and >= 0");
  if (!(power_fraction >= 0.0 && power_fraction <= 1.0)) {
    throw DomainError("P_t must lie in [0, 1]");
  }
  if (k == 0 || k > n || revealed_size >= k) {
    throw DomainError("need 1 <= K <= N and |S~| < K");
  }
  const double remaining = static_cast<double>(k - revealed_size);
  return 0.5 * std::log1p(snr * remaining * static_cast<double>(n) * power_fraction /
                          static_cast<double>(k));
}

MiEstimate linear_cs_mi_mc(double snr, const Eigen::MatrixXd& covariance,
                           std::size_t revealed_size, std::size_t samples, Rng& rng) {
  if (!(snr > 0.0)) throw DomainError("snr must be positive");
  if (samples < 2) throw DomainError("linear_cs_mi_mc needs at least 2 samples");
  validate_covariance(covariance);
  const Eigen::MatrixXd schur = conditional_covariance(covariance, revealed_size);
  const Eigen::Index m = schur.rows();
  Eigen::VectorXd b(m);
  std::vector<double> draws(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < m; ++i) b[i] = (rng() & 1U) ? 1.0 : -1.0;
    const double quad = std::max(0.0, b.dot(schur * b));
    draws[s] = 0.5 * std::log1p(snr * quad);
  }
  const double se = bootstrap_std_error(draws, kBootstrapResamples, rng);
  return {clamp_nonnegative(mean_of(draws)), MiMethod::kMonteCarlo, samples, se};
}

double bootstrap_std_error(std::span<const double> values, std::size_t resamples, Rng& rng) {
  if (values.empty() || resamples < 2) throw DomainError("bootstrap needs data and >= 2 resamples");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(resamples);
  for (auto& mean : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
    mean = s / static_cast<double>(values.size());
  }
  const double mu = mean_of(means);
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  return std::sqrt(var / static_cast<double>(resamples - 1));
}

SequenceMiProfile plugin_sequence_mi(std::span<const SupportTrace> traces) {
  if (traces.size() < 100) throw DomainError("plugin_sequence_mi needs at least 100 traces");
  const std::size_t t_len = traces.front().history.length();
  const std::size_t k = traces.front().support.size();
  const std::size_t j = traces.front().revealed.size();
  if (t_len == 0) throw DomainError("traces are empty");
  for (const auto& tr : traces) {
    if (tr.history.length() != t_len || tr.support.size() != k || tr.revealed.size() != j ||
        tr.beta.values.size() != k) {
      throw DomainError("plugin_sequence_mi: traces disagree in T, K, |S~| or beta length");
    }
  }

  // Position orders: revealed members first, then the rest, per trace.
  std::vector<std::vector<std::size_t>> order(traces.size());
  for (std::size_t m = 0; m < traces.size(); ++m) {
    const auto& tr = traces[m];
    std::vector<std::size_t> revealed_pos;
    std::vector<std::size_t> rest_pos;
    std::size_t r = 0;
    for (std::size_t p = 0; p < k; ++p) {
      if (r < j && tr.revealed.members()[r] == tr.support[p]) {
        revealed_pos.push_back(p);
        ++r;
      } else {
        rest_pos.push_back(p);
      }
    }
    order[m] = std::move(revealed_pos);
    order[m].insert(order[m].end(), rest_pos.begin(), rest_pos.end());
  }

  constexpr std::size_t kMaxAlphabet = 16;
  const auto total = static_cast<double>(traces.size());
  std::vector<MiEstimate> per_step;
  per_step.reserve(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    std::map<double, std::uint64_t> alphabet;
    for (std::size_t m = 0; m < traces.size(); ++m) {
      const auto& step = traces[m].history[t];
      if (step.y != 0.0 && step.y != 1.0) {
        throw UnsupportedError("plugin_sequence_mi needs binary observations");
      }
      for (std::size_t idx : traces[m].support.members()) {
        alphabet.emplace(step.x[idx], 0);
        if (alphabet.size() > kMaxAlphabet) {
          throw UnsupportedError("plugin_sequence_mi needs finite-alphabet designs");
        }
      }
    }
    std::uint64_t code = 0;
    for (auto& [value, c] : alphabet) c = code++;
    const std::uint64_t a = alphabet.size();
    // Key layout: [beta signs | x_S̃ | x_S'] in base a (signs in base 2).
    double key_space = std::pow(static_cast<double>(a), static_cast<double>(k)) *
                       std::pow(2.0, static_cast<double>(k)) * 2.0;
    if (key_space > 9e18) throw ResourceError("plugin_sequence_mi: joint table too large");

    std::unordered_map<std::uint64_t, std::uint64_t> c_cnt, cy_cnt, cx_cnt, cxy_cnt;
    std::vector<std::array<std::uint64_t, 4>> keys(traces.size());
    for (std::size_t m = 0; m < traces.size(); ++m) {
      const auto& tr = traces[m];
      const auto& step = tr.history[t];
      std::uint64_t cond = 0;
      for (std::size_t p = 0; p < k; ++p) cond = cond * 2 + (tr.beta.values[p] > 0.0 ? 1 : 0);
      for (std::size_t i = 0; i < j; ++i) {
        cond = cond * a + alphabet.at(step.x[tr.support[order[m][i]]]);
      }
      std::uint64_t target = 0;
      for (std::size_t i = j; i < k; ++i) {
        target = target * a + alphabet.at(step.x[tr.support[order[m][i]]]);
      }
      std::uint64_t inner = 1;
      for (std::size_t i = j; i < k; ++i) inner *= a;
      const std::uint64_t y = step.y != 0.0 ? 1 : 0;
      const std::uint64_t cx = cond * inner + target;
      keys[m] = {cond, cond * 2 + y, cx, cx * 2 + y};
      ++c_cnt[keys[m][0]];
      ++cy_cnt[keys[m][1]];
      ++cx_cnt[keys[m][2]];
      ++cxy_cnt[keys[m][3]];
    }
    const double mi = entropy_from_counts(cy_cnt, total) + entropy_from_counts(cx_cnt, total) -
                      entropy_from_counts(c_cnt, total) - entropy_from_counts(cxy_cnt, total);

    // Delta-method variance: Var of the empirical information density / M.
    double dens_sum = 0.0;
    double dens_sq = 0.0;
    for (const auto& key : keys) {
      const double d = std::log(static_cast<double>(cxy_cnt[key[3]])) +
                       std::log(static_cast<double>(c_cnt[key[0]])) -
                       std::log(static_cast<double>(cx_cnt[key[2]])) -
                       std::log(static_cast<double>(cy_cnt[key[1]]));
      dens_sum += d;
      dens_sq += d * d;
    }
    const double dens_mean = dens_sum / total;
    const double dens_var = std::max(0.0, dens_sq / total - dens_mean * dens_mean);
    per_step.push_back({clamp_nonnegative(mi), MiMethod::kPlugIn,
                        static_cast<std::uint64_t>(traces.size()), std::sqrt(dens_var / total)});
  }
  return make_profile(std::move(per_step));
}

}  // namespace sparsebound
