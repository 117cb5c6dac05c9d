#include "sparsebound/verify.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "sparsebound/bounds.hpp"
#include "sparsebound/harness.hpp"
#include "sparsebound/kernels.hpp"

namespace sparsebound {

using nlohmann::json;

VerifyReport run_verify(RngSeed seed, std::uint64_t trials) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport out;
  json configs = json::array();
  std::uint64_t block = 0;
  for (double p : {0.3, 0.5}) {
    for (std::size_t j : {std::size_t{0}, std::size_t{1}}) {
      ExperimentConfig c;
      c.n = 10;
      c.k = 2;
      c.model = {"group_testing", 0.0, 1.0};
      c.strategy.type = "bernoulli";
      c.strategy.p = p;
      c.decoder = DecoderKind::kMl;
      for (std::uint64_t t = 1; t <= 12; ++t) c.t_values.push_back(t);
      c.trials = trials;
      c.seed = {seed.value + 1000 * block++};
      c.revealed_size = j;
      c.mi.method = MiMode::kExact;
      c.bound_form = BoundForm::kFiniteFano;

      const ExperimentReport report = run_trials(c);
      json rows = json::array();
      for (const auto& row : report.rows) {
        const double floor = row.fano_bound - 3.0 * row.pe_interval.half_width;
        const bool fano_ok = row.empirical_pe >= floor;
        const double mi_limit = std::numbers::ln2 + 3.0 * row.mi_used.std_error.value_or(0.0);
        const bool cap_ok = row.mi_used.value <= mi_limit;
        out.checks += 2;
        out.violations += (fano_ok ? 0 : 1) + (cap_ok ? 0 : 1);
        rows.push_back({{"t", row.t},
                        {"empirical_pe", row.empirical_pe},
                        {"half_width", row.pe_interval.half_width},
                        {"error_count", row.error_count},
                        {"fano_bound", row.fano_bound},
                        {"mi", row.mi_used.value},
                        {"seed", row.seed.value},
                        {"fano_ok", fano_ok},
                        {"binary_cap_ok", cap_ok}});
      }
      configs.push_back({{"p", p},
                         {"revealed_size", j},
                         {"config_hash", report.config_hash},
                         {"rows", rows}});
    }
  }

  json caps = json::array();
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{8, 2}, {1024, 10}}) {
    const auto dims = ProblemDims::uncapped(n, k);
    std::map<std::size_t, SequenceMiProfile> profiles;
    for (std::size_t j = 0; j < k; ++j) {
      profiles[j] = make_profile({MiEstimate{std::numbers::ln2, MiMethod::kClosedForm, {}, {}}});
    }
    const BoundReport bound = adaptive_lower_bound(dims, profiles, BoundForm::kAsymptotic);
    const double expected = log_binom(n, k) / std::numbers::ln2;
    const bool ok = !bound.overall.unbounded &&
                    std::abs(bound.overall.value - expected) <= 1e-9 * expected;
    ++out.checks;
    out.violations += ok ? 0 : 1;
    caps.push_back({{"n", n},
                    {"k", k},
                    {"t_bound", bound.overall.value},
                    {"log2_binom", expected},
                    {"ok", ok}});
  }

  out.report = {{"fano_consistency", configs},
                {"binary_cap_bounds", caps},
                {"checks", out.checks},
                {"violations", out.violations},
                {"passed", out.passed()},
                {"seed", seed.value},
                {"trials", trials},
                {"version", SPARSEBOUND_VERSION},
                {"kernel_isa", std::string(kernels::isa_name(kernels::active().isa))},
                {"wall_time_seconds",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  return out;
}

}  // namespace sparsebound
