#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparsebound/bounds.hpp"
#include "sparsebound/core_types.hpp"

namespace sparsebound {

/// IID Bernoulli(p) inclusion vector of length N.
std::vector<double> bernoulli_design(std::size_t n, double p, Rng& rng);

/// Plain: IID Normal(0, P_t) entries, total expected power N·P_t.
/// Concentrated: zero off `support_hint`, IID Normal(0, N·P_t/|hint|) on it,
/// same total power.
std::vector<double> gaussian_design(std::size_t n, std::size_t k, double power_fraction,
                                    bool on_support_only, const std::optional<SupportSet>& support_hint,
                                    Rng& rng);

/// Measurement rule X^(t) = f_t(X^(1:t-1), Y^(1:t-1)). Instances carry
/// per-run state; use fresh() to start a new run.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual std::vector<double> next_design(const MeasurementHistory& history, Rng& rng) = 0;
  virtual bool adaptive() const noexcept = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Strategy> fresh() const = 0;

  /// Adaptive procedures that stop on their own report it here; afterwards
  /// next_design emits all-zero (empty) tests.
  virtual bool finished() const noexcept { return false; }
  /// The procedure's own support estimate, when it forms one.
  virtual std::optional<SupportSet> conclusion() const { return std::nullopt; }
};

class BernoulliStrategy final : public Strategy {
 public:
  BernoulliStrategy(std::size_t n, double p);
  std::vector<double> next_design(const MeasurementHistory& history, Rng& rng) override;
  bool adaptive() const noexcept override { return false; }
  std::string name() const override { return "bernoulli"; }
  std::unique_ptr<Strategy> fresh() const override;
  double p() const noexcept { return p_; }

 private:
  std::size_t n_;
  double p_;
};

/// Nonadaptive IID Gaussian rows under a power allocation over T steps.
class GaussianStrategy final : public Strategy {
 public:
  GaussianStrategy(std::size_t n, std::size_t k, PowerAllocation allocation);
  std::vector<double> next_design(const MeasurementHistory& history, Rng& rng) override;
  bool adaptive() const noexcept override { return false; }
  std::string name() const override { return "gaussian"; }
  std::unique_ptr<Strategy> fresh() const override;

 private:
  std::size_t n_;
  std::size_t k_;
  PowerAllocation allocation_;
};

/// Generalised binary splitting for noiseless group testing. Tests a block of
/// 2^α pool items, α = ⌊log2((n - d + 1)/d)⌋; a positive block is bisected
/// until one defective is isolated. Outcomes implied by what is already known
/// (a block that is the whole pool, the second half after a negative first
/// half) are not spent as tests.
class BinarySplittingStrategy final : public Strategy {
 public:
  explicit BinarySplittingStrategy(const ProblemDims& dims);
  std::vector<double> next_design(const MeasurementHistory& history, Rng& rng) override;
  bool adaptive() const noexcept override { return true; }
  std::string name() const override { return "binary_splitting"; }
  std::unique_ptr<Strategy> fresh() const override;
  bool finished() const noexcept override { return phase_ == Phase::kDone; }
  std::optional<SupportSet> conclusion() const override;
  std::size_t tests_issued() const noexcept { return tests_issued_; }

 private:
  enum class Phase { kIdle, kAwaitGroup, kAwaitHalf, kAwaitSingle, kDone };

  void absorb(bool positive);
  void plan_next();
  void bisect();
  void remove_from_pool(const std::vector<std::size_t>& items);

  std::size_t n_;
  std::size_t k_;
  std::vector<std::size_t> pool_;  // undecided items, ascending
  std::vector<std::size_t> identified_;
  std::size_t remaining_defectives_;
  std::vector<std::size_t> known_positive_;  // block holding >= 1 defective
  std::vector<std::size_t> pending_;         // items in the outstanding test
  Phase phase_ = Phase::kIdle;
  std::size_t tests_issued_ = 0;
};

/// Two-stage linear CS: the first ⌈split·T⌉ steps are plain Gaussian rows;
/// the rest concentrate their power on the 2K coordinates with the largest
/// matched-filter statistic |Σ_t x_n^(t) y^(t)| from stage one. Uniform
/// allocation P_t = 1/T throughout.
class TwoStageCsStrategy final : public Strategy {
 public:
  TwoStageCsStrategy(const ProblemDims& dims, std::size_t total_steps, double split);
  std::vector<double> next_design(const MeasurementHistory& history, Rng& rng) override;
  bool adaptive() const noexcept override { return true; }
  std::string name() const override { return "two_stage_cs"; }
  std::unique_ptr<Strategy> fresh() const override;

  std::size_t stage_one_steps() const noexcept { return stage_one_; }
  /// Stage-two coordinates; empty until stage two begins.
  const std::optional<SupportSet>& candidates() const noexcept { return candidates_; }

 private:
  std::size_t n_;
  std::size_t k_;
  std::size_t total_steps_;
  double split_;
  std::size_t stage_one_;
  std::optional<SupportSet> candidates_;
};

}  // namespace sparsebound
