#pragma once

// Lagrangian particle discretization of a 1D density, the kernels that act
// on it, and every nonlocal force evaluation used by the characteristic
// integrators. All convolutions use pure point-mass quadrature:
//   (f ⋆ ρ)(x_i) ≈ Σ_j m_j f(x_i − x_j).

#include <optional>
#include <variant>
#include <vector>

#include "ctflow/tabulated.hpp"

namespace ctflow {

/// Symmetric alignment kernel ψ with uniform bounds ψ_m ≤ ψ ≤ ψ_M.
class InfluenceFunction {
 public:
  enum class Kind { Constant, CuckerSmale, Tabulated };

  static InfluenceFunction constant(double c);
  /// ψ(x) = (1 + x²)^(−γ).
  static InfluenceFunction cucker_smale(double gamma);
  /// Samples may cover x ≥ 0 only, or both signs (then they must be mirror
  /// symmetric). Evaluation uses |x|, clamped into [ψ_m, ψ_M].
  static InfluenceFunction tabulated(Tabulated table);

  double operator()(double x) const;
  /// ∫₀ˣ ψ(y) dy (odd in x).
  double antiderivative(double x) const;

  Kind kind() const { return kind_; }
  double psi_m() const { return psi_m_; }
  double psi_M() const { return psi_M_; }
  double parameter() const { return parameter_; }
  const std::optional<Tabulated>& table() const { return table_; }

 private:
  InfluenceFunction(Kind kind, double parameter, double psi_m, double psi_M,
                    std::optional<Tabulated> table);

  Kind kind_;
  double parameter_;  // c for Constant, γ for CuckerSmale
  double psi_m_;
  double psi_M_;
  std::optional<Tabulated> table_;
};

/// Symmetric interaction potential K, described through its derivatives.
class InteractionPotential {
 public:
  enum class Kind { None, Newtonian, Smooth };

  static InteractionPotential none();
  /// K(x) = k|x|/2. k > 0 attracts, k < 0 repels.
  static InteractionPotential newtonian(double k);
  /// K′ (odd, constant extrapolation) and K″ (even, zero extrapolation).
  /// Tables may cover x ≥ 0 only; negative x is obtained by parity.
  static InteractionPotential smooth(Tabulated kprime, Tabulated kpp);

  Kind kind() const { return kind_; }
  double k() const { return k_; }
  /// B = ‖K″‖_∞ over the tabulated samples.
  double curvature_bound() const { return bound_; }
  const std::optional<Tabulated>& kpp_table() const { return kpp_; }

  /// K′(x) with K′(0) = 0. Only for Smooth.
  double kprime(double x) const;
  /// K″(x). Only for Smooth.
  double kpp(double x) const;

 private:
  InteractionPotential(Kind kind, double k, std::optional<Tabulated> kprime,
                       std::optional<Tabulated> kpp, double bound);

  Kind kind_;
  double k_;
  std::optional<Tabulated> kprime_;
  std::optional<Tabulated> kpp_;
  double bound_;
};

/// Particle state, one entry per characteristic. Masses sum to one.
struct ParticleEnsemble {
  std::vector<double> x;    // position
  std::vector<double> u;    // velocity
  std::vector<double> rho;  // density carried along the characteristic
  std::vector<double> d;    // ∂ₓu + ψ⋆ρ
  std::vector<double> m;    // mass weight
  std::vector<double> I;    // ∫₀ᵗ (ψ⋆ρ)(x(s), s) ds

  std::size_t size() const { return x.size(); }
  void resize(std::size_t n);
  double total_mass() const;
  double momentum() const;
};

struct GaussianDensity {
  double center = 0.0;
  double width = 1.0;
};

struct UniformDensity {
  double a = 0.0;
  double b = 1.0;
};

struct TabulatedDensity {
  Tabulated table;
};

using DensityProfile = std::variant<GaussianDensity, UniformDensity, TabulatedDensity>;

/// ∂ₓu₀ = −ψ⋆ρ₀ + ε, so that d₀ ≡ ε; u₀(x) = ∫₀ˣ ∂ₓu₀.
struct SlopeOffset {
  double eps = 0.0;
};

/// u₀ given by samples; ∂ₓu₀ is the slope of the interpolant.
struct ExplicitVelocity {
  Tabulated u0;
};

using VelocityProfile = std::variant<SlopeOffset, ExplicitVelocity>;

struct InitialDataSpec {
  DensityProfile rho0;
  VelocityProfile u0;
};

/// Normalized initial density ρ₀(x) (unit mass).
double density_value(const DensityProfile& profile, double x);

/// Equal-mass quantile sampling: x_i is the (i − ½)/n quantile of ρ₀.
/// Throws std::invalid_argument for n < 2 or a non-normalizable ρ₀.
ParticleEnsemble sample_initial(const InitialDataSpec& spec, std::size_t n,
                                const InfluenceFunction& psi);

// Per-particle force evaluations. Sums run over j = 0..n−1 in index order.

double convolve_influence(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                          std::size_t i);
double alignment_accel(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                       std::size_t i);
/// −k ∂ₓφ(x_i), ∂ₓφ(x_i) = ½(M_<(i) − M_>(i)); ties split evenly, self excluded.
double newtonian_accel(const ParticleEnsemble& ens, double k, std::size_t i);
/// −Σ_j m_j K′(x_i − x_j).
double smooth_accel(const ParticleEnsemble& ens, const InteractionPotential& K,
                    std::size_t i);
/// Σ_j m_j K″(x_i − x_j).
double convolve_kpp(const ParticleEnsemble& ens, const InteractionPotential& K,
                    std::size_t i);

/// Newtonian accelerations for all particles through sorted prefix sums.
std::vector<double> newtonian_accel_sorted(const ParticleEnsemble& ens, double k);

/// Bulk evaluation of every nonlocal term, one pass over particle pairs.
struct NonlocalTerms {
  std::vector<double> psi_conv;   // (ψ⋆ρ)(x_i)
  std::vector<double> alignment;  // Σ_j m_j ψ_ij (u_j − u_i)
  std::vector<double> potential;  // +Σ_j m_j K′(x_i − x_j) or the Newtonian force
  std::vector<double> kpp_conv;   // (K″⋆ρ)(x_i), Smooth only
};

/// `potential` holds the force that drives u. For Newtonian K that is
/// newtonian_accel; for Smooth K it is +K′⋆ρ (the sign under which
/// d′ = −d(d − ψ⋆ρ) + K″⋆ρ holds).
NonlocalTerms evaluate_nonlocal(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                                const InteractionPotential& K);

}  // namespace ctflow
