#pragma once

// Pointwise critical-threshold classification of initial data.
//
// Every classifier works on d₀ = ∂ₓu₀ + ψ⋆ρ₀ at a single point. Boundary
// conventions: the alignment-only and general-K subcritical sets are closed
// (d₀ ≥ ...), the Poisson subcritical set is open (d₀ > σ₊), the isothermal
// set is closed. Points in the gaps between proven bounds are Indeterminate.

#include <optional>
#include <string_view>

namespace ctflow {

enum class Verdict { Subcritical, Supercritical, Critical, Indeterminate };

std::string_view to_string(Verdict v);

struct ThresholdQuery {
  double rho0 = 0.0;      // ρ₀(x)
  double dxu0 = 0.0;      // ∂ₓu₀(x)
  double psi_conv = 0.0;  // (ψ⋆ρ₀)(x)

  double d0() const { return dxu0 + psi_conv; }
};

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<double> sigma_minus;
  std::optional<double> sigma_plus;
};

enum class PotentialSign { Attractive, Repulsive };

Classification classify_ea(const ThresholdQuery& q);

/// −√(−2kρ₀); requires k < 0.
double sigma_minus_eap(double k, double rho0);

/// Scalar whose unique negative root is σ₊:
///   1/ρ₀ − (1/ψ²)(k + ψσ/ρ₀ − k e^{ψσ/(kρ₀)}).
double sigma_plus_residual(double sigma, double k, double rho0, double psi_bound);

/// Refined-σ₋ residual, 1/ρ₀ − (1/ψ_m²)(k + ψ_m σ/ρ₀ − k e^{ψ_exp σ/(kρ₀)}).
double sigma_minus_refined_residual(double sigma, double k, double rho0, double psi_m,
                                    double psi_exp);

/// Negative root of sigma_plus_residual; 0 when ρ₀ = 0. Throws
/// std::invalid_argument for k ≥ 0 or ψ_bound ≤ 0, std::runtime_error when
/// no bracket is found within 64 doublings.
double sigma_plus_eap(double k, double rho0, double psi_bound);

/// Negative root of sigma_minus_refined_residual; 0 when ρ₀ = 0.
/// ψ_exp defaults to ψ_m.
double sigma_minus_eap_refined(double k, double rho0, double psi_m,
                               std::optional<double> psi_exp = std::nullopt);

struct EapBounds {
  double psi_M = 1.0;
  /// When set (> 0) the refined supercritical threshold is used.
  std::optional<double> psi_m;
  std::optional<double> psi_exp;
};

Classification classify_eap(const ThresholdQuery& q, double k, const EapBounds& bounds);

Classification classify_general(const ThresholdQuery& q, double B, PotentialSign sign);

Classification classify_general_refined(const ThresholdQuery& q, double B, double psi_m,
                                        double psi_M);

/// Subcritical iff ∂ₓu₀ ≥ −C + √A |∂ₓρ₀/ρ₀|; otherwise Indeterminate.
Classification classify_isothermal(double dxu0, double dxrho0, double rho0, double A, double C);

}  // namespace ctflow
