#pragma once

// Scenario files: INI-style sections of key = value pairs. Full-line comments
// start with ';' or '#'; a ';' or '#' preceded by whitespace starts an inline
// comment. Unknown sections or keys are rejected so that typos surface.
//
//   [model]       kind = ea | eap | general | general_refined | isothermal
//                 sign = auto | attractive | repulsive   (general)
//                 psi_exp = <real>                        (eap, refined σ₋)
//                 refined = true | false                  (eap: use ψ_m when > 0)
//   [psi]         kind = constant | cucker_smale | tabulated; c; gamma; file
//   [potential]   kind = none | newtonian | smooth; k; kprime_file; kpp_file
//   [ic]          rho = gaussian | uniform | tabulated; center; width; a; b; file
//                 u = slope_offset | explicit; eps; u_file
//   [particles]   n
//   [integrator]  dt0; eta; d_cap; t_max; dt_min; store_every; max_samples
//   [sweep]       eps_lo; eps_hi; tol_eps; guard_factor
//   [isothermal]  A; gamma; C; L; nx; T; cfl; rho_min; snapshot_every;
//                 bump_a; bump_w; bump_b
//   [outputs]     trajectory; report; fields   (true | false)
//   [run]         seed
//
// Relative table paths resolve against the scenario file's directory.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctflow/characteristics.hpp"
#include "ctflow/fields.hpp"
#include "ctflow/isothermal.hpp"
#include "ctflow/thresholds.hpp"

namespace ctflow {

/// Malformed or inconsistent scenario (bad value, unknown key, invalid pairing).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioModel { EA, EAP, GeneralK, GeneralKRefined, Isothermal };

struct Outputs {
  bool trajectory = true;
  bool report = true;
  bool fields = true;
};

struct SweepConfig {
  double eps_lo = -0.1;
  double eps_hi = 0.1;
  ThresholdSearch search;
};

struct Scenario {
  ScenarioModel model = ScenarioModel::EA;
  std::optional<PotentialSign> sign;  // general: unset means derive from K″ samples
  std::optional<double> psi_exp;
  bool refined = true;

  InfluenceFunction psi = InfluenceFunction::constant(1.0);
  InteractionPotential potential = InteractionPotential::none();
  InitialDataSpec ic{GaussianDensity{}, SlopeOffset{}};
  std::size_t n = 400;
  IntegratorConfig integrator;
  SweepConfig sweep;
  IsoConfig iso;
  BumpProfile bump;
  Outputs outputs;
  std::uint64_t seed = 0;

  /// Every effective setting as (key, value) text, defaults included.
  std::vector<std::pair<std::string, std::string>> echo;

  bool is_isothermal() const { return model == ScenarioModel::Isothermal; }
  /// Characteristic model; throws ScenarioError for isothermal scenarios.
  CharModel char_model() const;
  /// Sign used by the general classifier: explicit, or from the K″ samples.
  /// Throws ScenarioError when K″ changes sign and no sign was given.
  PotentialSign general_sign() const;
};

/// Throws ScenarioError on any problem, including model/potential mismatch.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Characteristic-model defaults with no file at all.
Scenario default_scenario();

std::string to_string(ScenarioModel model);

}  // namespace ctflow
