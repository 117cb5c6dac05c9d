#include "sparsebound/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sparsebound {

namespace {

std::uint64_t checked_count(std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw DomainError("ProblemDims requires 1 <= K <= N (got N=" + std::to_string(n) +
                      ", K=" + std::to_string(k) + ")");
  }
  return binomial_u64(n, k);
}

}  // namespace

ProblemDims::ProblemDims(std::size_t n_vars, std::size_t sparsity, std::uint64_t candidate_cap)
    : n_(n_vars), k_(sparsity), count_(checked_count(n_vars, sparsity)) {
  if (count_ == 0 || count_ > candidate_cap) {
    throw ResourceError("C(" + std::to_string(n_) + "," + std::to_string(k_) +
                        ") exceeds the candidate cap of " + std::to_string(candidate_cap));
  }
}

ProblemDims ProblemDims::uncapped(std::size_t n_vars, std::size_t sparsity) {
  ProblemDims d;
  d.n_ = n_vars;
  d.k_ = sparsity;
  d.count_ = checked_count(n_vars, sparsity);
  return d;
}

SupportSet::SupportSet(std::vector<std::size_t> members) : members_(std::move(members)) {
  for (std::size_t i = 1; i < members_.size(); ++i) {
    if (members_[i] <= members_[i - 1]) {
      throw DomainError("support members must be strictly increasing");
    }
  }
}

bool SupportSet::contains(std::size_t index) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), index);
}

RevealedSubset::RevealedSubset(std::vector<std::size_t> members, const SupportSet& support)
    : members_(std::move(members)) {
  if (members_.size() >= support.size()) {
    throw DomainError("revealed subset must be a proper subset of the support");
  }
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i > 0 && members_[i] <= members_[i - 1]) {
      throw DomainError("revealed members must be strictly increasing");
    }
    if (!support.contains(members_[i])) {
      throw DomainError("revealed member " + std::to_string(members_[i]) +
                        " is not in the support");
    }
  }
}

bool LatentCoefficients::is_rademacher() const noexcept {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == 1.0 || v == -1.0; });
}

void MeasurementHistory::push(std::vector<double> x, double y) {
  if (x.size() != n_) {
    throw DomainError("design length " + std::to_string(x.size()) + " != N=" +
                      std::to_string(n_));
  }
  steps_.push_back({std::move(x), y});
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed base, std::uint64_t index) noexcept {
  return {base.value ^ mix_seed(index)};
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return 0;
  }
  return static_cast<std::uint64_t>(r);
}

double log_binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) {
    throw DomainError("log_binom: k=" + std::to_string(k) + " > n=" + std::to_string(n));
  }
  if (k == 0 || k == n) return 0.0;
  if (const auto exact = binomial_u64(n, k); exact != 0 && exact < (1ULL << 53)) {
    return std::log(static_cast<double>(exact));
  }
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(std::min(k, n - k));
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

SupportSet unrank_support(const ProblemDims& dims, SupportIndex omega) {
  const std::size_t n = dims.n_vars();
  const std::size_t k = dims.sparsity();
  if (dims.candidate_count() == 0) {
    throw ResourceError("unrank_support: C(N,K) does not fit in 64 bits");
  }
  if (omega.value >= dims.candidate_count()) {
    throw DomainError("support index " + std::to_string(omega.value) + " out of range [0, " +
                      std::to_string(dims.candidate_count()) + ")");
  }
  std::vector<std::size_t> members;
  members.reserve(k);
  std::uint64_t rest = omega.value;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < k; ++pos) {
    for (std::size_t e = next;; ++e) {
      // Subsets whose element at `pos` is e, given the prefix chosen so far.
      const std::uint64_t block = binomial_u64(n - e - 1, k - pos - 1);
      if (rest < block) {
        members.push_back(e);
        next = e + 1;
        break;
      }
      rest -= block;
    }
  }
  return SupportSet(std::move(members));
}

SupportIndex rank_support(const ProblemDims& dims, const SupportSet& s) {
  const std::size_t n = dims.n_vars();
  const std::size_t k = dims.sparsity();
  if (s.size() != k) {
    throw DomainError("rank_support: support has " + std::to_string(s.size()) +
                      " members, expected K=" + std::to_string(k));
  }
  if (dims.candidate_count() == 0) {
    throw ResourceError("rank_support: C(N,K) does not fit in 64 bits");
  }
  std::uint64_t rank = 0;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < k; ++pos) {
    const std::size_t m = s[pos];
    if (m >= n) throw DomainError("rank_support: member out of range");
    for (std::size_t e = next; e < m; ++e) rank += binomial_u64(n - e - 1, k - pos - 1);
    next = m + 1;
  }
  return {rank};
}

SupportIndex draw_support_index(const ProblemDims& dims, Rng& rng) {
  if (dims.candidate_count() == 0) {
    throw ResourceError("draw_support_index: C(N,K) does not fit in 64 bits");
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, dims.candidate_count() - 1);
  return {pick(rng)};
}

SupportSet draw_support(const ProblemDims& dims, Rng& rng) {
  if (dims.candidate_count() != 0) return unrank_support(dims, draw_support_index(dims, rng));
  const std::size_t n = dims.n_vars();
  std::vector<std::size_t> chosen;
  chosen.reserve(dims.sparsity());
  for (std::size_t j = n - dims.sparsity(); j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t v = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) {
      chosen.push_back(v);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return SupportSet(std::move(chosen));
}

RevealedSubset draw_revealed_subset(const SupportSet& support, std::size_t size, Rng& rng) {
  std::vector<std::size_t> pool(support.members().begin(), support.members().end());
  if (size >= pool.size()) throw DomainError("revealed size must be < K");
  // Partial Fisher-Yates over the first `size` slots.
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return RevealedSubset(std::move(pool), support);
}

LatentCoefficients draw_rademacher(std::size_t k, Rng& rng) {
  LatentCoefficients beta;
  beta.values.reserve(k);
  for (std::size_t i = 0; i < k; ++i) beta.values.push_back((rng() & 1U) ? 1.0 : -1.0);
  return beta;
}

}  // namespace sparsebound
