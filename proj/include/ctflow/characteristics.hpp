#pragma once

// Coupled integration of the characteristic ODE systems
//
//   x′ = u,  u′ = alignment + potential force,
//   ρ′ = −ρ(d − ψ⋆ρ),  d′ = −d(d − ψ⋆ρ) + S,  I′ = ψ⋆ρ,
//
// with S = 0 (alignment only), −kρ (Newtonian K = k|x|/2) or K″⋆ρ (smooth K),
// over a whole particle ensemble at once, plus blow-up detection and the
// β = d/ρ and implicit-density diagnostics.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ctflow/fields.hpp"

namespace ctflow {

enum class ModelKind { EA, EAP, GeneralK };

std::string_view to_string(ModelKind kind);

struct CharModel {
  ModelKind kind = ModelKind::EA;
  InfluenceFunction psi = InfluenceFunction::constant(1.0);
  InteractionPotential potential = InteractionPotential::none();

  static CharModel ea(InfluenceFunction psi);
  static CharModel eap(InfluenceFunction psi, double k);
  static CharModel general(InfluenceFunction psi, InteractionPotential potential);

  /// Newtonian strength (EAP) or zero.
  double k() const { return potential.kind() == InteractionPotential::Kind::Newtonian ? potential.k() : 0.0; }
  /// Throws std::invalid_argument when model and potential do not pair up.
  void validate() const;
};

struct IntegratorConfig {
  double dt0 = 1e-3;
  double eta = 0.1;        // relative change of d allowed per step
  double d_cap = 1e8;      // blow-up magnitude cap for −d and ρ
  double t_max = 10.0;
  double dt_min = 1e-14;
  std::size_t store_every = 0;     // 0: choose so that at most max_samples are kept
  std::size_t max_samples = 4096;
};

enum class BlowupTrigger { DNegCap, RhoCap, DtCollapse };

std::string_view to_string(BlowupTrigger trigger);

struct BlowupReport {
  std::size_t particle = 0;
  double t_star = 0.0;
  BlowupTrigger trigger = BlowupTrigger::DtCollapse;
  double d_last = 0.0;
  double rho_last = 0.0;
};

/// Rates of change for every particle. `I` doubles as (ψ⋆ρ)(x_i).
struct Rates {
  std::vector<double> x, u, rho, d, I;
};

/// Stored samples of the run. Particle series are flattened sample-major.
class Trajectory {
 public:
  explicit Trajectory(std::size_t particles = 0) : n_(particles) {}

  void record(double t, const ParticleEnsemble& ens, const std::vector<double>& psi_conv);

  std::size_t samples() const { return times_.size(); }
  std::size_t particles() const { return n_; }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t s) const { return times_[s]; }
  double x(std::size_t s, std::size_t i) const { return x_[s * n_ + i]; }
  double u(std::size_t s, std::size_t i) const { return u_[s * n_ + i]; }
  double rho(std::size_t s, std::size_t i) const { return rho_[s * n_ + i]; }
  double d(std::size_t s, std::size_t i) const { return d_[s * n_ + i]; }
  double I(std::size_t s, std::size_t i) const { return I_[s * n_ + i]; }
  double psi_conv(std::size_t s, std::size_t i) const { return conv_[s * n_ + i]; }
  double momentum(std::size_t s) const { return momentum_[s]; }
  /// β = d/ρ, or nullopt when ρ ≤ floor.
  std::optional<double> beta(std::size_t s, std::size_t i, double rho_floor = 1e-12) const;

  /// The last sample is the state at which a blow-up trigger fired.
  bool ends_in_blowup() const { return ends_in_blowup_; }
  void set_ends_in_blowup(bool flag) { ends_in_blowup_ = flag; }

 private:
  std::size_t n_;
  bool ends_in_blowup_ = false;
  std::vector<double> times_;
  std::vector<double> x_, u_, rho_, d_, I_, conv_;
  std::vector<double> momentum_;
};

struct IntegrationResult {
  Trajectory trajectory;
  std::optional<BlowupReport> blowup;
  ParticleEnsemble final_state;
  double t_final = 0.0;
  std::size_t steps = 0;
  double dt_final = 0.0;
  double total_mass0 = 0.0;
  double momentum0 = 0.0;
};

Rates rhs(const CharModel& model, const ParticleEnsemble& ens);

/// Classical RK4 over the full coupled ensemble until t_max or a blow-up
/// trigger. Throws std::invalid_argument on non-finite initial data.
IntegrationResult integrate(const CharModel& model, const ParticleEnsemble& ens0,
                            const IntegratorConfig& cfg);

struct BetaResidual {
  double residual = 0.0;
  std::vector<std::size_t> excluded;  // particles that dipped below the density floor
};

/// max |β(t) − β₀| (EA) or max |β(t) − (β₀ − kt)| (EAP) over stored samples.
/// GeneralK throws std::invalid_argument.
BetaResidual beta_residual(const Trajectory& traj, const CharModel& model,
                           double rho_floor = 1e-12);

/// max over stored times of
///   ρ(t) · |1/ρ(t) − e^{−I(t)} (1/ρ₀ + ∫₀ᵗ (β₀ − ks) e^{I(s)} ds)|,
/// the inner integral taken on the stored time grid with the trapezoid rule
/// plus its Hermite end correction (both integrand and derivative are known
/// at every sample). EA (k = 0) and EAP only.
double implicit_rho_residual(const Trajectory& traj, const CharModel& model,
                             std::size_t particle);

/// max_i |d_i(T) − (ψ⋆ρ)(x_i(T))| at the last stored sample.
double asymptotic_alignment_check(const IntegrationResult& result, const CharModel& model);

/// Raised when the end points of an empirical threshold search do not bracket.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThresholdSearch {
  double tol_eps = 1e-3;
  /// Survival also requires max|d(T_max)| ≤ guard_factor·(ψ_M + √max(B, |k|, 1)).
  double guard_factor = 10.0;
};

struct ThresholdResult {
  double eps_star = 0.0;
  double eps_lo = 0.0;  // final bracket: blows up
  double eps_hi = 0.0;  // final bracket: survives
  std::size_t n_runs = 0;
};

/// Bisection on the family parameter between a blowing-up ε_lo and a
/// surviving ε_hi; both ends are verified first.
ThresholdResult empirical_threshold(const CharModel& model,
                                    const std::function<ParticleEnsemble(double)>& ic_family,
                                    double eps_lo, double eps_hi, const IntegratorConfig& cfg,
                                    const ThresholdSearch& search = {});

/// True when the run reached t_max with no blow-up and a bounded final d.
bool survives(const IntegrationResult& result, const CharModel& model, double guard_factor);

}  // namespace ctflow
