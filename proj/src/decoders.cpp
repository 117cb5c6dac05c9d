#include "sparsebound/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>

namespace sparsebound {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  const double peak = *std::max_element(v.begin(), v.end());
  if (peak == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - peak);
  return peak + std::log(s);
}

std::vector<double> sign_pattern(std::size_t k, std::uint64_t code) {
  std::vector<double> b(k);
  for (std::size_t i = 0; i < k; ++i) b[i] = ((code >> i) & 1U) ? -1.0 : 1.0;
  return b;
}

void check_sign_cap(std::size_t k, std::uint64_t cap) {
  if (k >= 63 || (1ULL << k) > cap) {
    throw ResourceError("2^K sign patterns exceed the cap");
  }
}

/// Advances an ascending r-combination of {0..n-1}; false after the last one.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t r = c.size();
  for (std::size_t i = r; i-- > 0;) {
    if (c[i] < n - r + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < r; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

ColumnarHistory::ColumnarHistory(const MeasurementHistory& history, bool pack_bits)
    : n_(history.n_vars()), t_(history.length()) {
  values_.assign(n_ * t_, 0.0);
  y_.resize(t_);
  for (std::size_t t = 0; t < t_; ++t) {
    const auto& step = history[t];
    y_[t] = step.y;
    for (std::size_t i = 0; i < n_; ++i) values_[i * t_ + t] = step.x[i];
  }
  if (pack_bits) {
    words_ = (t_ + 63) / 64;
    bits_.assign(n_ * words_, 0);
    y_bits_.assign(words_, 0);
    for (std::size_t t = 0; t < t_; ++t) {
      const std::uint64_t bit = 1ULL << (t % 64);
      if (y_[t] != 0.0) y_bits_[t / 64] |= bit;
      for (std::size_t i = 0; i < n_; ++i) {
        if (values_[i * t_ + t] != 0.0) bits_[i * words_ + t / 64] |= bit;
      }
    }
  }
}

double support_log_likelihood(const ColumnarHistory& columns, const ObservationModel& model,
                              const SupportSet& support, const kernels::KernelSet& kernels) {
  const std::size_t k = support.size();
  const std::size_t t_len = columns.steps();
  if (const auto* gt = std::get_if<GroupTestingModel>(&model.variant())) {
    std::vector<const std::uint64_t*> cols(k);
    for (std::size_t i = 0; i < k; ++i) cols[i] = columns.bit_column(support[i]);
    const std::uint64_t mismatches = kernels.or_mismatch_count(cols, columns.y_bits());
    if (gt->crossover == 0.0) return mismatches == 0 ? 0.0 : kNegInf;
    const auto miss = static_cast<double>(mismatches);
    return miss * std::log(gt->crossover) +
           (static_cast<double>(t_len) - miss) * std::log1p(-gt->crossover);
  }

  std::vector<const double*> cols(k);
  for (std::size_t i = 0; i < k; ++i) cols[i] = columns.column(support[i]);
  const std::uint64_t patterns = 1ULL << k;
  std::vector<double> per_pattern(patterns);

  if (const auto* cs = std::get_if<LinearCsModel>(&model.variant())) {
    const double constant =
        static_cast<double>(t_len) * 0.5 * std::log(cs->snr / (2.0 * std::numbers::pi));
    for (std::uint64_t code = 0; code < patterns; ++code) {
      const auto beta = sign_pattern(k, code);
      const double rss = kernels.sum_squared_residual(columns.y(), cols, beta);
      per_pattern[code] = constant - 0.5 * cs->snr * rss;
    }
  } else {
    const auto& onebit = std::get<OneBitCsModel>(model.variant());
    const double scale = std::sqrt(onebit.snr);
    std::vector<double> pred(t_len);
    const auto y = columns.y();
    for (std::uint64_t code = 0; code < patterns; ++code) {
      const auto beta = sign_pattern(k, code);
      kernels.combine_columns(cols, beta, pred);
      double ll = 0.0;
      for (std::size_t t = 0; t < t_len; ++t) {
        const double z = scale * pred[t];
        ll += log_normal_cdf(y[t] != 0.0 ? z : -z);
      }
      per_pattern[code] = ll;
    }
  }
  return log_sum_exp(per_pattern) - static_cast<double>(k) * std::numbers::ln2;
}

double support_log_likelihood_reference(const MeasurementHistory& history,
                                        const ObservationModel& model, const SupportSet& support) {
  const std::size_t k = support.size();
  const bool needs_signs = !std::holds_alternative<GroupTestingModel>(model.variant());
  const std::uint64_t patterns = needs_signs ? (1ULL << k) : 1;
  std::vector<double> per_pattern(patterns, 0.0);
  for (std::uint64_t code = 0; code < patterns; ++code) {
    const LatentCoefficients beta =
        needs_signs ? LatentCoefficients{sign_pattern(k, code)} : LatentCoefficients::ones(k);
    double ll = 0.0;
    for (const auto& step : history.steps()) {
      ll += model.log_likelihood(step.y, restrict_to_support(step.x, support), beta);
    }
    per_pattern[code] = ll;
  }
  if (!needs_signs) return per_pattern.front();
  return log_sum_exp(per_pattern) - static_cast<double>(k) * std::numbers::ln2;
}

SupportIndex ml_decode(const MeasurementHistory& history, const ObservationModel& model,
                       const ProblemDims& dims, const RevealedSubset& revealed,
                       const MlDecodeOptions& options) {
  const std::size_t n = dims.n_vars();
  const std::size_t k = dims.sparsity();
  if (history.n_vars() != n) throw DomainError("history width does not match N");
  if (revealed.size() >= k) throw DomainError("revealed subset must be smaller than K");
  if (dims.candidate_count() == 0 || dims.candidate_count() > options.candidate_cap) {
    throw ResourceError("ml_decode: C(N,K) exceeds the candidate cap");
  }
  if (!std::holds_alternative<GroupTestingModel>(model.variant())) {
    check_sign_cap(k, options.sign_pattern_cap);
  }
  const auto& kern = options.kernels != nullptr ? *options.kernels : kernels::active();
  const ColumnarHistory columns(history, model.output_alphabet() == OutputAlphabet::kBinary);

  // Free items: everything outside the revealed subset, ascending.
  std::vector<std::size_t> free_items;
  free_items.reserve(n - revealed.size());
  for (std::size_t i = 0, r = 0; i < n; ++i) {
    if (r < revealed.size() && revealed.members()[r] == i) {
      ++r;
    } else {
      free_items.push_back(i);
    }
  }
  const std::size_t choose = k - revealed.size();
  std::vector<std::size_t> combo(choose);
  std::iota(combo.begin(), combo.end(), std::size_t{0});

  bool have_best = false;
  double best_score = kNegInf;
  SupportIndex best_index{};
  std::vector<std::size_t> members(k);
  do {
    std::vector<std::size_t> picked(choose);
    for (std::size_t i = 0; i < choose; ++i) picked[i] = free_items[combo[i]];
    std::merge(picked.begin(), picked.end(), revealed.members().begin(), revealed.members().end(),
               members.begin());
    const SupportSet candidate(members);
    const double score = support_log_likelihood(columns, model, candidate, kern);
    if (!have_best || score > best_score) {
      have_best = true;
      best_score = score;
      best_index = rank_support(dims, candidate);
    } else if (score == best_score) {
      const SupportIndex idx = rank_support(dims, candidate);
      if (idx < best_index) best_index = idx;
    }
  } while (next_combination(combo, free_items.size()));
  return best_index;
}

std::vector<std::size_t> comp_survivors(const MeasurementHistory& history) {
  const std::size_t n = history.n_vars();
  std::vector<bool> cleared(n, false);
  for (const auto& step : history.steps()) {
    if (step.y != 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (step.x[i] != 0.0) cleared[i] = true;
    }
  }
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cleared[i]) survivors.push_back(i);
  }
  return survivors;
}

std::optional<SupportIndex> comp_decode(const MeasurementHistory& history, const ProblemDims& dims) {
  if (history.n_vars() != dims.n_vars()) throw DomainError("history width does not match N");
  auto survivors = comp_survivors(history);
  if (survivors.size() != dims.sparsity()) return std::nullopt;
  return rank_support(dims, SupportSet(std::move(survivors)));
}

}  // namespace sparsebound
