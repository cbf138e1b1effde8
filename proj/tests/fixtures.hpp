#pragma once

#include <cmath>

#include "ctflow/fields.hpp"

namespace fixture {

// Slope-offset data bent so that d0(x) = ε tanh²((x − x_c)/w), which vanishes
// exactly at particle `center` and stays positive elsewhere. The velocity is
// shifted by the matching antiderivative, so u, ρ and d remain consistent.
inline ctflow::ParticleEnsemble critical_at(const ctflow::InfluenceFunction& psi, std::size_t n,
                                            std::size_t center, double eps = 0.1, double w = 0.5) {
  auto ens = ctflow::sample_initial({ctflow::GaussianDensity{}, ctflow::SlopeOffset{eps}}, n, psi);
  const double c = ens.x[center];
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::tanh((ens.x[i] - c) / w);
    ens.u[i] -= eps * w * (t + std::tanh(c / w));
    ens.d[i] = eps * t * t;
  }
  return ens;
}

}  // namespace fixture
