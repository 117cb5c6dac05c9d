#include "sparsebound/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsebound {

std::vector<double> bernoulli_design(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("Bernoulli design needs p in [0, 1]");
  std::bernoulli_distribution coin(p);
  std::vector<double> x(n);
  for (auto& v : x) v = coin(rng) ? 1.0 : 0.0;
  return x;
}

std::vector<double> gaussian_design(std::size_t n, std::size_t /*k*/, double power_fraction,
                                    bool on_support_only, const std::optional<SupportSet>& support_hint,
                                    Rng& rng) {
  if (!(power_fraction >= 0.0)) throw DomainError("P_t must be nonnegative");
  std::vector<double> x(n, 0.0);
  if (on_support_only) {
    if (!support_hint || support_hint->size() == 0) {
      throw DomainError("concentrated Gaussian design needs a support hint");
    }
    const double var = static_cast<double>(n) * power_fraction / static_cast<double>(support_hint->size());
    if (var == 0.0) return x;
    std::normal_distribution<double> g(0.0, std::sqrt(var));
    for (std::size_t idx : support_hint->members()) {
      if (idx >= n) throw DomainError("support hint index out of range");
      x[idx] = g(rng);
    }
    return x;
  }
  if (power_fraction == 0.0) return x;
  std::normal_distribution<double> g(0.0, std::sqrt(power_fraction));
  for (auto& v : x) v = g(rng);
  return x;
}

// --- BernoulliStrategy ------------------------------------------------------

BernoulliStrategy::BernoulliStrategy(std::size_t n, double p) : n_(n), p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("Bernoulli strategy needs p in [0, 1]");
}

std::vector<double> BernoulliStrategy::next_design(const MeasurementHistory&, Rng& rng) {
  return bernoulli_design(n_, p_, rng);
}

std::unique_ptr<Strategy> BernoulliStrategy::fresh() const {
  return std::make_unique<BernoulliStrategy>(*this);
}

// --- GaussianStrategy -------------------------------------------------------

GaussianStrategy::GaussianStrategy(std::size_t n, std::size_t k, PowerAllocation allocation)
    : n_(n), k_(k), allocation_(std::move(allocation)) {}

std::vector<double> GaussianStrategy::next_design(const MeasurementHistory& history, Rng& rng) {
  const std::size_t t = history.length();
  if (t >= allocation_.steps()) {
    throw DomainError("Gaussian strategy asked for step beyond its power allocation");
  }
  return gaussian_design(n_, k_, allocation_.weights()[t], false, std::nullopt, rng);
}

std::unique_ptr<Strategy> GaussianStrategy::fresh() const {
  return std::make_unique<GaussianStrategy>(*this);
}

// --- BinarySplittingStrategy ------------------------------------------------

BinarySplittingStrategy::BinarySplittingStrategy(const ProblemDims& dims)
    : n_(dims.n_vars()), k_(dims.sparsity()), remaining_defectives_(dims.sparsity()) {
  pool_.resize(n_);
  std::iota(pool_.begin(), pool_.end(), std::size_t{0});
}

std::unique_ptr<Strategy> BinarySplittingStrategy::fresh() const {
  return std::make_unique<BinarySplittingStrategy>(ProblemDims::uncapped(n_, k_));
}

void BinarySplittingStrategy::remove_from_pool(const std::vector<std::size_t>& items) {
  // Both ranges ascending.
  std::vector<std::size_t> kept;
  kept.reserve(pool_.size());
  std::set_difference(pool_.begin(), pool_.end(), items.begin(), items.end(),
                      std::back_inserter(kept));
  pool_ = std::move(kept);
}

void BinarySplittingStrategy::bisect() {
  if (known_positive_.size() == 1) {
    identified_.push_back(known_positive_.front());
    remove_from_pool(known_positive_);
    --remaining_defectives_;
    known_positive_.clear();
    phase_ = Phase::kIdle;
    return;
  }
  const std::size_t half = known_positive_.size() / 2;
  pending_.assign(known_positive_.begin(), known_positive_.begin() + static_cast<std::ptrdiff_t>(half));
  phase_ = Phase::kAwaitHalf;
}

void BinarySplittingStrategy::absorb(bool positive) {
  switch (phase_) {
    case Phase::kAwaitGroup:
      if (positive) {
        known_positive_ = pending_;
        bisect();
      } else {
        remove_from_pool(pending_);
        phase_ = Phase::kIdle;
      }
      break;
    case Phase::kAwaitHalf:
      if (positive) {
        known_positive_ = pending_;
      } else {
        remove_from_pool(pending_);
        known_positive_.erase(known_positive_.begin(),
                              known_positive_.begin() + static_cast<std::ptrdiff_t>(pending_.size()));
      }
      bisect();
      break;
    case Phase::kAwaitSingle:
      if (positive) {
        identified_.push_back(pending_.front());
        --remaining_defectives_;
      }
      remove_from_pool(pending_);
      phase_ = Phase::kIdle;
      break;
    case Phase::kIdle:
    case Phase::kDone:
      break;
  }
  if (phase_ == Phase::kIdle) pending_.clear();
}

void BinarySplittingStrategy::plan_next() {
  while (phase_ == Phase::kIdle) {
    const std::size_t d = remaining_defectives_;
    const std::size_t n = pool_.size();
    if (d == 0) {
      phase_ = Phase::kDone;
      return;
    }
    if (n == d) {
      identified_.insert(identified_.end(), pool_.begin(), pool_.end());
      pool_.clear();
      remaining_defectives_ = 0;
      phase_ = Phase::kDone;
      return;
    }
    if (n + 2 <= 2 * d) {
      pending_.assign(1, pool_.front());
      phase_ = Phase::kAwaitSingle;
      return;
    }
    // Largest α with 2^α·d <= n - d + 1.
    std::size_t block = 1;
    while (2 * block * d <= n - d + 1) block *= 2;
    if (block >= n) {
      known_positive_ = pool_;
      bisect();
      continue;
    }
    pending_.assign(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(block));
    phase_ = Phase::kAwaitGroup;
  }
}

std::vector<double> BinarySplittingStrategy::next_design(const MeasurementHistory& history, Rng&) {
  if (phase_ == Phase::kAwaitGroup || phase_ == Phase::kAwaitHalf ||
      phase_ == Phase::kAwaitSingle) {
    if (history.empty()) throw DomainError("binary splitting expected an outcome in the history");
    absorb(history[history.length() - 1].y != 0.0);
  }
  plan_next();
  std::vector<double> x(n_, 0.0);
  if (phase_ == Phase::kDone) return x;
  for (std::size_t idx : pending_) x[idx] = 1.0;
  ++tests_issued_;
  return x;
}

std::optional<SupportSet> BinarySplittingStrategy::conclusion() const {
  std::vector<std::size_t> guess = identified_;
  // Unfinished runs are padded with the lowest undecided items.
  for (std::size_t i = 0; guess.size() < k_ && i < pool_.size(); ++i) guess.push_back(pool_[i]);
  std::sort(guess.begin(), guess.end());
  return SupportSet(std::move(guess));
}

// --- TwoStageCsStrategy -----------------------------------------------------

TwoStageCsStrategy::TwoStageCsStrategy(const ProblemDims& dims, std::size_t total_steps,
                                       double split)
    : n_(dims.n_vars()), k_(dims.sparsity()), total_steps_(total_steps), split_(split) {
  if (!(split > 0.0 && split < 1.0)) throw DomainError("two-stage split must lie in (0, 1)");
  if (total_steps < 2) throw DomainError("two-stage strategy needs T >= 2");
  stage_one_ = static_cast<std::size_t>(std::ceil(split * static_cast<double>(total_steps)));
  stage_one_ = std::clamp<std::size_t>(stage_one_, 1, total_steps);
}

std::unique_ptr<Strategy> TwoStageCsStrategy::fresh() const {
  return std::make_unique<TwoStageCsStrategy>(ProblemDims::uncapped(n_, k_), total_steps_, split_);
}

std::vector<double> TwoStageCsStrategy::next_design(const MeasurementHistory& history, Rng& rng) {
  const std::size_t t = history.length();
  if (t >= total_steps_) throw DomainError("two-stage strategy asked for step beyond T");
  const double p_t = 1.0 / static_cast<double>(total_steps_);
  if (t < stage_one_) return gaussian_design(n_, k_, p_t, false, std::nullopt, rng);

  if (!candidates_) {
    std::vector<double> stat(n_, 0.0);
    for (const auto& step : history.steps()) {
      for (std::size_t i = 0; i < n_; ++i) stat[i] += step.x[i] * step.y;
    }
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(n_, 2 * k_);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(stat[a]) > std::abs(stat[b]);
    });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    candidates_ = SupportSet(std::move(order));
  }
  return gaussian_design(n_, k_, p_t, true, candidates_, rng);
}

}  // namespace sparsebound
