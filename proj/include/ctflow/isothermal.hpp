#pragma once

// Euler-alignment with pressure p = Aρ^γ and constant influence ψ ≡ C.
// With ψ constant the alignment force is a relaxation −C(u − P₀) toward the
// conserved mean momentum P₀ = ∫ρ₀u₀ dx. The finite-volume solver covers
// γ = 1 only; the Riemann-invariant transforms support every γ ≥ 1.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace ctflow {

struct IsoConfig {
  double A = 1.0;
  double gamma = 1.0;
  double C = 2.0;
  double L = 40.0;
  std::size_t nx = 512;
  double T = 10.0;
  double cfl = 0.4;
  double rho_min = 1e-10;
  std::size_t snapshot_every = 1;  // steps between stored snapshots (final state always kept)
};

/// Cell-centred fields on the periodic box [−L/2, L/2).
struct IsoState {
  double L = 0.0;
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> u;

  std::size_t size() const { return rho.size(); }
  double dx() const { return L / static_cast<double>(rho.size()); }
  double x(std::size_t i) const { return -0.5 * L + (static_cast<double>(i) + 0.5) * dx(); }
  double mass() const;
  double momentum() const;
};

/// Samples ρ₀ and u₀ at cell centres and rescales ρ₀ to unit mass.
IsoState make_iso_state(const std::function<double(double)>& rho0,
                        const std::function<double(double)>& u0, double L, std::size_t nx);

/// Localized perturbation of a uniform background:
///   ρ₀ ∝ 1 + a e^{−x²/(2w²)},  u₀ = −b x e^{−x²/(2w²)}.
/// The far field is an exact steady state, so the box length only matters
/// once waves reach the edges.
struct BumpProfile {
  double a = 0.5;
  double w = 2.0;
  double b = 0.5;
};

IsoState make_bump_state(const BumpProfile& bump, double L, std::size_t nx);

struct RiemannPoint {
  double R = 0.0;
  double S = 0.0;
  double lambda = 0.0;  // u − √(Aγ) ρ^{(γ−1)/2}
  double mu = 0.0;      // u + √(Aγ) ρ^{(γ−1)/2}
};

RiemannPoint riemann_forward(double rho, double u, double A, double gamma);
/// Returns (ρ, u). For γ > 1 requires S > R.
std::pair<double, double> riemann_inverse(double R, double S, double A, double gamma);

struct RiemannPair {
  std::vector<double> R, S, lambda, mu;
};

RiemannPair riemann_forward(const IsoState& state, double A, double gamma);

/// r = ∂ₓR + C, s = ∂ₓS + C by centred differences (γ = 1).
struct RSField {
  std::vector<double> r, s;
};

RSField rs_fields(const IsoState& state, const IsoConfig& cfg);

struct IsoSeries {
  std::vector<IsoState> snapshots;
  double P0 = 0.0;
  std::vector<double> times;     // one entry per step, plus t = 0
  std::vector<double> mass;      // Σρ Δx after each step
  std::vector<double> momentum;  // Σρu Δx after each step
  std::vector<double> source;    // accumulated momentum injected by the relaxation term
  std::size_t steps = 0;
};

/// First-order finite volumes: local Lax-Friedrichs flux for (ρ, ρu) with
/// flux (ρu, ρu² + Aρ), then the relaxation source (0, C(ρP₀ − ρu)) by the
/// explicit midpoint rule. The face dissipation speed is
/// √(u_L² + u_R² + A) + √A, an upper bound on max(|u_L|, |u_R|) + √A that
/// stays smooth where u changes sign. Throws std::runtime_error when ρ drops
/// below rho_min.
IsoSeries solve_iso_damped(const IsoState& ic, const IsoConfig& cfg, double T);

struct InvariantRegion {
  double min_rs = 0.0;
  double max_rs = 0.0;
  double m0 = 0.0;      // max(‖r₀‖∞, ‖s₀‖∞, 2C)
  double tol_fd = 0.0;  // 10 Δx² max(|u‴|, √A |ρ‴/ρ|) over the series
};

InvariantRegion monitor_invariant_region(const IsoSeries& series, const IsoConfig& cfg);

struct LocalRS {
  double r = 0.0;
  double s = 0.0;
  double min_r = 0.0, max_r = 0.0, min_s = 0.0, max_s = 0.0;  // along the path
  bool blew_up = false;
  double t_end = 0.0;
};

/// RK4 on r′ = −½r² − ½rs + Cr, s′ = −½s² − ½rs + Cs.
LocalRS rs_local_ode(double r0, double s0, double C, double T, double dt = 1e-3,
                     double cap = 1e8);

}  // namespace ctflow
