#include "sparsebound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sparsebound {

namespace {

TBound t_bound_for(double numerator, double mi, BoundForm form) {
  const double effective = numerator - fano_slack(form);
  if (effective <= 0.0) return {0.0, false};
  if (mi == 0.0) return {0.0, true};
  return {effective / mi, false};
}

bool exceeds(const TBound& a, const TBound& b) {
  if (a.unbounded) return !b.unbounded;
  if (b.unbounded) return false;
  return a.value > b.value;
}

BoundReport evaluate(const ProblemDims& dims, const std::map<std::size_t, double>& mi, BoundForm form) {
  const std::size_t n = dims.n_vars();
  const std::size_t k = dims.sparsity();
  BoundReport report;
  report.form = form;
  for (std::size_t j = 0; j < k; ++j) {
    const auto it = mi.find(j);
    if (it == mi.end()) {
      throw DomainError("missing information value for |S~| = " + std::to_string(j));
    }
    if (!(it->second >= 0.0)) {
      throw DomainError("information value for |S~| = " + std::to_string(j) + " is negative");
    }
    BoundTerm term;
    term.revealed_size = j;
    term.numerator = log_binom(n - j, k - j);
    term.mi = it->second;
    term.t_bound = t_bound_for(term.numerator, term.mi, form);
    if (j == 0 || exceeds(term.t_bound, report.overall)) {
      report.overall = term.t_bound;
      report.argmax_revealed_size = j;
    }
    report.per_subset_terms.push_back(term);
  }
  return report;
}

}  // namespace

std::string to_string(BoundForm form) {
  return form == BoundForm::kAsymptotic ? "asymptotic" : "finite-fano";
}

BoundForm parse_bound_form(const std::string& text) {
  if (text == "asymptotic") return BoundForm::kAsymptotic;
  if (text == "finite-fano" || text == "finite") return BoundForm::kFiniteFano;
  throw DomainError("unknown bound form '" + text + "' (expected asymptotic | finite-fano)");
}

double fano_slack(BoundForm form) noexcept {
  return form == BoundForm::kFiniteFano ? std::numbers::ln2 : 0.0;
}

BoundReport nonadaptive_lower_bound(const ProblemDims& dims, const std::map<std::size_t, double>& mi_per_subset,
                                    BoundForm form) {
  return evaluate(dims, mi_per_subset, form);
}

BoundReport adaptive_lower_bound(const ProblemDims& dims,
                                 const std::map<std::size_t, SequenceMiProfile>& avg_mi_per_subset,
                                 BoundForm form) {
  std::map<std::size_t, double> averages;
  for (const auto& [j, profile] : avg_mi_per_subset) averages.emplace(j, profile.average);
  return evaluate(dims, averages, form);
}

BoundReport binary_output_lower_bound(const ProblemDims& dims, BoundForm form) {
  std::map<std::size_t, double> capped;
  for (std::size_t j = 0; j < dims.sparsity(); ++j) capped.emplace(j, std::numbers::ln2);
  return evaluate(dims, capped, form);
}

double fano_error_lower_bound(std::uint64_t t, double avg_mi, std::size_t n, std::size_t k,
                              std::size_t revealed_size) {
  if (k == 0 || k > n || revealed_size >= k) {
    throw DomainError("fano_error_lower_bound needs 1 <= K <= N and |S~| < K");
  }
  if (!(avg_mi >= 0.0)) throw DomainError("average information must be >= 0");
  const double uncertainty = log_binom(n - revealed_size, k - revealed_size);
  if (uncertainty == 0.0) return 0.0;
  const double bound =
      1.0 - (static_cast<double>(t) * avg_mi + std::numbers::ln2) / uncertainty;
  return bound > 0.0 ? bound : 0.0;
}

std::vector<double> circulant_eigenvalues(std::size_t d, double diag, double rho) {
  if (d == 0) throw DomainError("circulant_eigenvalues: dimension must be >= 1");
  if (d == 1) {
    if (diag < 0.0) throw DomainError("circulant_eigenvalues: eigenvalue 0 (diag) is negative");
    return {diag};
  }
  const double leading = diag + static_cast<double>(d - 1) * rho;
  const double rest = diag - rho;
  const double tol = 1e-12 * std::max({1.0, std::abs(diag), std::abs(rho)});
  if (leading < -tol) {
    throw DomainError("circulant_eigenvalues: eigenvalue 0 (diag + (d-1)*rho = " +
                      std::to_string(leading) + ") is negative");
  }
  if (rest < -tol) {
    throw DomainError("circulant_eigenvalues: eigenvalues 1..d-1 (diag - rho = " +
                      std::to_string(rest) + ") are negative");
  }
  std::vector<double> out(d, rest);
  out[0] = leading;
  return out;
}

PowerAllocation::PowerAllocation(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("power allocation needs at least one step");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("power allocation weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("power allocation must sum to 1");
}

PowerAllocation PowerAllocation::uniform(std::size_t t) {
  if (t == 0) throw DomainError("power allocation needs at least one step");
  // Rounded 1/t summed t times drifts from 1 for large t; skip the check.
  PowerAllocation a;
  a.weights_.assign(t, 1.0 / static_cast<double>(t));
  return a;
}

double sequence_mi_cap(double snr, std::size_t n, std::size_t k, std::size_t revealed_size,
                       const PowerAllocation& allocation) {
  double total = 0.0;
  for (double p : allocation.weights()) total += linear_cs_mi_closed_form(snr, n, k, revealed_size, p);
  return total / static_cast<double>(allocation.steps());
}

CsFeasibilityReport cs_feasibility(std::uint64_t t, double snr, std::size_t n, std::size_t k,
                                   BoundForm form) {
  if (t < 1) throw DomainError("cs_feasibility needs T >= 1");
  if (!(snr > 0.0)) throw DomainError("cs_feasibility needs snr > 0");
  if (k == 0 || k > n) throw DomainError("cs_feasibility needs 1 <= K <= N");
  CsFeasibilityReport report;
  report.feasible = true;
  const auto td = static_cast<double>(t);
  for (std::size_t i = 1; i <= k; ++i) {
    CsFeasibilityTerm term;
    term.i = i;
    term.lhs = td * 0.5 *
               std::log1p(snr * static_cast<double>(i) * static_cast<double>(n) /
                          (static_cast<double>(k) * td));
    term.rhs = log_binom(n - k + i, i) - fano_slack(form);
    term.satisfied = term.lhs >= term.rhs;
    report.feasible = report.feasible && term.satisfied;
    report.per_i_terms.push_back(term);
  }
  return report;
}

std::optional<std::uint64_t> min_feasible_t(double snr, std::size_t n, std::size_t k,
                                            BoundForm form, std::uint64_t cap) {
  const auto ok = [&](std::uint64_t t) { return cs_feasibility(t, snr, n, k, form).feasible; };
  if (cap < 1) return std::nullopt;
  // Exponential bracket, then bisection; feasibility is monotone in T.
  std::uint64_t lo = 0;  // known infeasible (or T = 0)
  std::uint64_t hi = 1;
  while (!ok(hi)) {
    if (hi >= cap) return std::nullopt;
    lo = hi;
    hi = std::min(cap, hi * 2);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double snr_necessary(std::size_t n, std::size_t k, BoundForm form) {
  if (k == 0 || k >= n) throw DomainError("snr_necessary needs 1 <= K < N");
  const double uncertainty = std::log(static_cast<double>(n - k + 1)) - fano_slack(form);
  if (uncertainty <= 0.0) return 0.0;
  return 2.0 * static_cast<double>(k) * uncertainty / static_cast<double>(n);
}

}  // namespace sparsebound
