#pragma once

// The four batch commands. Each returns the process exit code and writes its
// artifacts under `out`; a one-paragraph summary goes to `log`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "ctflow/scenario.hpp"

namespace ctflow {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;        // numerical failure (simulate) or failed checks (verify)
inline constexpr int supercritical = 2;  // classify: some point supercritical; simulate: blow-up
inline constexpr int indeterminate = 3;  // classify: no supercritical point, not all subcritical
inline constexpr int usage = 64;         // invalid scenario, pairing, suite or flags
inline constexpr int precondition = 65;  // sweep bracket does not bracket
}  // namespace exit_code

/// Writes classify.csv: x,rho0,dxu0,psi_conv,d0,verdict,sigma_minus,sigma_plus.
int cmd_classify(const Scenario& scenario, const std::filesystem::path& out, std::ostream& log);

/// Writes trajectory.csv and report.json (characteristic models) or
/// fields.csv (isothermal), as enabled in [outputs].
int cmd_simulate(const Scenario& scenario, const std::filesystem::path& out, std::ostream& log);

/// Writes sweep.json: eps_star, eps_lo, eps_hi, analytic_sub, analytic_super, n_runs.
int cmd_sweep(const Scenario& scenario, std::optional<double> eps_lo,
              std::optional<double> eps_hi, const std::filesystem::path& out, std::ostream& log);

/// Human-readable lines, or one JSON document when `json` is set.
int cmd_verify(const std::string& suite, std::uint64_t seed, bool json, std::ostream& log);

/// Analytic ε thresholds for a slope-offset family (d₀ ≡ ε) on the sampled
/// particles: sub = inf{ε : every point subcritical}, super = sup{ε : some
/// point supercritical}. Unset when the classifier offers no such bound.
struct AnalyticBand {
  std::optional<double> sub;
  std::optional<double> super;
};

AnalyticBand analytic_band(const Scenario& scenario, const ParticleEnsemble& ens);

}  // namespace ctflow
