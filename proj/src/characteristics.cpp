#include "ctflow/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ctflow {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::EA:
      return "EA";
    case ModelKind::EAP:
      return "EAP";
    case ModelKind::GeneralK:
      return "GeneralK";
  }
  return "EA";
}

std::string_view to_string(BlowupTrigger trigger) {
  switch (trigger) {
    case BlowupTrigger::DNegCap:
      return "D_NegCap";
    case BlowupTrigger::RhoCap:
      return "RhoCap";
    case BlowupTrigger::DtCollapse:
      return "DtCollapse";
  }
  return "DtCollapse";
}

CharModel CharModel::ea(InfluenceFunction psi) {
  return {ModelKind::EA, std::move(psi), InteractionPotential::none()};
}

CharModel CharModel::eap(InfluenceFunction psi, double k) {
  CharModel model{ModelKind::EAP, std::move(psi), InteractionPotential::newtonian(k)};
  model.validate();
  return model;
}

CharModel CharModel::general(InfluenceFunction psi, InteractionPotential potential) {
  CharModel model{ModelKind::GeneralK, std::move(psi), std::move(potential)};
  model.validate();
  return model;
}

void CharModel::validate() const {
  using PK = InteractionPotential::Kind;
  switch (kind) {
    case ModelKind::EA:
      if (potential.kind() != PK::None) {
        throw std::invalid_argument("EA model takes no interaction potential");
      }
      break;
    case ModelKind::EAP:
      if (potential.kind() != PK::Newtonian) {
        throw std::invalid_argument("EAP model needs a Newtonian potential");
      }
      if (potential.k() == 0.0) throw std::invalid_argument("EAP model needs k != 0");
      break;
    case ModelKind::GeneralK:
      if (potential.kind() != PK::Smooth) {
        throw std::invalid_argument("GeneralK model needs a smooth tabulated potential");
      }
      break;
  }
}

// ---------------------------------------------------------------------------

void Trajectory::record(double t, const ParticleEnsemble& ens, const std::vector<double>& psi_conv) {
  times_.push_back(t);
  x_.insert(x_.end(), ens.x.begin(), ens.x.end());
  u_.insert(u_.end(), ens.u.begin(), ens.u.end());
  rho_.insert(rho_.end(), ens.rho.begin(), ens.rho.end());
  d_.insert(d_.end(), ens.d.begin(), ens.d.end());
  I_.insert(I_.end(), ens.I.begin(), ens.I.end());
  conv_.insert(conv_.end(), psi_conv.begin(), psi_conv.end());
  momentum_.push_back(ens.momentum());
}

std::optional<double> Trajectory::beta(std::size_t s, std::size_t i, double rho_floor) const {
  const double r = rho(s, i);
  if (!(r > rho_floor)) return std::nullopt;
  return d(s, i) / r;
}

// ---------------------------------------------------------------------------

Rates rhs(const CharModel& model, const ParticleEnsemble& ens) {
  const std::size_t n = ens.size();
  const NonlocalTerms terms = evaluate_nonlocal(ens, model.psi, model.potential);
  const double k = model.k();

  Rates r;
  r.x = ens.u;
  r.u.resize(n);
  r.rho.resize(n);
  r.d.resize(n);
  r.I = terms.psi_conv;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = terms.psi_conv[i];
    const double spread = ens.d[i] - c;  // ∂ₓu
    r.u[i] = terms.alignment[i] + terms.potential[i];
    r.rho[i] = -ens.rho[i] * spread;
    double source = 0.0;
    switch (model.kind) {
      case ModelKind::EA:
        break;
      case ModelKind::EAP:
        source = -k * ens.rho[i];
        break;
      case ModelKind::GeneralK:
        source = terms.kpp_conv[i];
        break;
    }
    r.d[i] = -ens.d[i] * spread + source;
  }
  return r;
}

namespace {

bool all_finite(const ParticleEnsemble& e) {
  for (const auto* v : {&e.x, &e.u, &e.rho, &e.d, &e.I}) {
    for (double value : *v) {
      if (!std::isfinite(value)) return false;
    }
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
  }
  return true;
}

ParticleEnsemble shifted(const ParticleEnsemble& base, const Rates& k, double a) {
  ParticleEnsemble out = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    out.x[i] += a * k.x[i];
    out.u[i] += a * k.u[i];
    out.rho[i] += a * k.rho[i];
    out.d[i] += a * k.d[i];
    out.I[i] += a * k.I[i];
  }
  return out;
}

std::optional<ParticleEnsemble> rk4_step(const CharModel& model, const ParticleEnsemble& y,
                                         const Rates& k1, double h) {
  const ParticleEnsemble y2 = shifted(y, k1, 0.5 * h);
  if (!all_finite(y2)) return std::nullopt;
  const Rates k2 = rhs(model, y2);
  const ParticleEnsemble y3 = shifted(y, k2, 0.5 * h);
  if (!all_finite(y3)) return std::nullopt;
  const Rates k3 = rhs(model, y3);
  const ParticleEnsemble y4 = shifted(y, k3, h);
  if (!all_finite(y4)) return std::nullopt;
  const Rates k4 = rhs(model, y4);

  ParticleEnsemble out = y;
  const double w = h / 6.0;
  auto combine = [w](double base, double a, double b, double c, double d) {
    return base + w * (a + 2.0 * b + 2.0 * c + d);
  };
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.x[i] = combine(y.x[i], k1.x[i], k2.x[i], k3.x[i], k4.x[i]);
    out.u[i] = combine(y.u[i], k1.u[i], k2.u[i], k3.u[i], k4.u[i]);
    out.rho[i] = combine(y.rho[i], k1.rho[i], k2.rho[i], k3.rho[i], k4.rho[i]);
    out.d[i] = combine(y.d[i], k1.d[i], k2.d[i], k3.d[i], k4.d[i]);
    out.I[i] = combine(y.I[i], k1.I[i], k2.I[i], k3.I[i], k4.I[i]);
  }
  if (!all_finite(out)) return std::nullopt;
  return out;
}

std::size_t argmin(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::distance(v.begin(), std::min_element(v.begin(), v.end())));
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

}  // namespace

IntegrationResult integrate(const CharModel& model, const ParticleEnsemble& ens0,
                            const IntegratorConfig& cfg) {
  model.validate();
  if (ens0.size() == 0) throw std::invalid_argument("integrate: empty ensemble");
  if (!all_finite(ens0)) throw std::invalid_argument("integrate: non-finite initial state");
  if (!(cfg.dt0 > 0.0) || !(cfg.t_max >= 0.0) || !(cfg.eta > 0.0)) {
    throw std::invalid_argument("integrate: need dt0 > 0, eta > 0 and t_max >= 0");
  }

  std::size_t stride = cfg.store_every;
  if (stride == 0) {
    const double nominal = std::ceil(cfg.t_max / cfg.dt0);
    const double cap = static_cast<double>(std::max<std::size_t>(cfg.max_samples, 2) - 1);
    stride = static_cast<std::size_t>(std::max(1.0, std::ceil(nominal / cap)));
  }
  const bool keep_order = strictly_increasing(ens0.x);

  IntegrationResult result;
  result.trajectory = Trajectory(ens0.size());
  result.total_mass0 = ens0.total_mass();
  result.momentum0 = ens0.momentum();

  ParticleEnsemble state = ens0;
  Rates rates = rhs(model, state);
  result.trajectory.record(0.0, state, rates.I);

  double t = 0.0;
  double dt = cfg.dt0;
  std::size_t since_store = 0;
  bool stored_last = true;

  auto collapse = [&](double h) {
    BlowupReport report;
    report.particle = argmin(state.d);
    report.t_star = t + 0.5 * h;
    report.trigger = BlowupTrigger::DtCollapse;
    report.d_last = state.d[report.particle];
    report.rho_last = state.rho[report.particle];
    result.blowup = report;
  };

  while (t < cfg.t_max && !result.blowup) {
    const double remaining = cfg.t_max - t;
    double h = std::min(dt, remaining);

    bool collapsed = false;
    for (;;) {
      bool too_fast = false;
      for (std::size_t i = 0; i < state.size(); ++i) {
        if (std::abs(rates.d[i]) * h > cfg.eta * std::max(1.0, std::abs(state.d[i]))) {
          too_fast = true;
          break;
        }
      }
      if (!too_fast) break;
      dt *= 0.5;
      if (dt < cfg.dt_min) {
        collapse(h);
        collapsed = true;
        break;
      }
      h = std::min(dt, remaining);
    }
    if (collapsed) break;

    auto trial = rk4_step(model, state, rates, h);
    if (trial && keep_order && !strictly_increasing(trial->x)) trial.reset();
    if (!trial) {
      dt *= 0.5;
      if (dt < cfg.dt_min) collapse(h);
      continue;
    }

    state = std::move(*trial);
    t = (h == remaining) ? cfg.t_max : t + h;
    if (cfg.t_max - t <= 1e-12 * std::max(1.0, cfg.t_max)) t = cfg.t_max;
    ++result.steps;
    rates = rhs(model, state);

    const std::size_t low = argmin(state.d);
    const std::size_t high = argmax(state.rho);
    if (state.d[low] <= -cfg.d_cap || state.rho[high] >= cfg.d_cap) {
      BlowupReport report;
      const bool by_d = state.d[low] <= -cfg.d_cap;
      report.particle = by_d ? low : high;
      report.trigger = by_d ? BlowupTrigger::DNegCap : BlowupTrigger::RhoCap;
      report.t_star = t - 0.5 * h;
      report.d_last = state.d[report.particle];
      report.rho_last = state.rho[report.particle];
      result.blowup = report;
      result.trajectory.record(t, state, rates.I);
      stored_last = true;
      break;
    }

    stored_last = false;
    if (++since_store == stride || t >= cfg.t_max) {
      result.trajectory.record(t, state, rates.I);
      since_store = 0;
      stored_last = true;
    }
  }
  if (!stored_last) result.trajectory.record(t, state, rates.I);

  result.trajectory.set_ends_in_blowup(result.blowup.has_value());
  result.final_state = std::move(state);
  result.t_final = t;
  result.dt_final = dt;
  return result;
}

// ---------------------------------------------------------------------------
// Diagnostics

BetaResidual beta_residual(const Trajectory& traj, const CharModel& model, double rho_floor) {
  if (model.kind == ModelKind::GeneralK) {
    throw std::invalid_argument("beta_residual is not defined for general potentials");
  }
  const double k = model.k();
  BetaResidual out;
  for (std::size_t i = 0; i < traj.particles(); ++i) {
    const auto beta0 = traj.beta(0, i, rho_floor);
    if (!beta0) {
      out.excluded.push_back(i);
      continue;
    }
    double worst = 0.0;
    bool dipped = false;
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      const auto b = traj.beta(s, i, rho_floor);
      if (!b) {
        dipped = true;
        break;
      }
      worst = std::max(worst, std::abs(*b - (*beta0 - k * traj.time(s))));
    }
    if (dipped) {
      out.excluded.push_back(i);
    } else {
      out.residual = std::max(out.residual, worst);
    }
  }
  return out;
}

double implicit_rho_residual(const Trajectory& traj, const CharModel& model, std::size_t particle) {
  if (model.kind == ModelKind::GeneralK) {
    throw std::invalid_argument("implicit density formula needs the alignment or Poisson model");
  }
  if (particle >= traj.particles()) throw std::out_of_range("implicit_rho_residual: particle index");
  const double rho0 = traj.rho(0, particle);
  if (!(rho0 > 0.0)) throw std::invalid_argument("implicit_rho_residual: particle in vacuum");

  const double k = model.k();
  const double beta0 = traj.d(0, particle) / rho0;
  std::size_t last = traj.samples();
  if (traj.ends_in_blowup() && last > 1) --last;

  auto integrand = [&](std::size_t s) {
    return (beta0 - k * traj.time(s)) * std::exp(traj.I(s, particle));
  };
  auto derivative = [&](std::size_t s) {
    const double t = traj.time(s);
    return (-k + (beta0 - k * t) * traj.psi_conv(s, particle)) * std::exp(traj.I(s, particle));
  };

  double integral = 0.0;
  double worst = 0.0;
  for (std::size_t s = 1; s < last; ++s) {
    const double h = traj.time(s) - traj.time(s - 1);
    integral += 0.5 * h * (integrand(s - 1) + integrand(s)) +
                h * h / 12.0 * (derivative(s - 1) - derivative(s));
    const double rho = traj.rho(s, particle);
    const double predicted = std::exp(-traj.I(s, particle)) * (1.0 / rho0 + integral);
    worst = std::max(worst, std::abs(1.0 / rho - predicted) * rho);
  }
  return worst;
}

double asymptotic_alignment_check(const IntegrationResult& result, const CharModel& model) {
  if (model.kind != ModelKind::EA) {
    throw std::invalid_argument("asymptotic alignment check applies to the alignment-only model");
  }
  if (result.blowup) throw std::invalid_argument("asymptotic alignment check after blow-up");
  const Trajectory& traj = result.trajectory;
  for (std::size_t i = 0; i < traj.particles(); ++i) {
    if (!(traj.d(0, i) > 0.0)) {
      throw std::invalid_argument("asymptotic alignment check needs d0 > 0 everywhere");
    }
  }
  const std::size_t s = traj.samples() - 1;
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.particles(); ++i) {
    worst = std::max(worst, std::abs(traj.d(s, i) - traj.psi_conv(s, i)));
  }
  return worst;
}

bool survives(const IntegrationResult& result, const CharModel& model, double guard_factor) {
  if (result.blowup) return false;
  const double B = model.potential.curvature_bound();
  const double guard =
      guard_factor * (model.psi.psi_M() + std::sqrt(std::max({B, std::abs(model.k()), 1.0})));
  for (double d : result.final_state.d) {
    if (std::abs(d) > guard) return false;
  }
  return true;
}

ThresholdResult empirical_threshold(const CharModel& model,
                                    const std::function<ParticleEnsemble(double)>& ic_family,
                                    double eps_lo, double eps_hi, const IntegratorConfig& cfg,
                                    const ThresholdSearch& search) {
  if (!(eps_lo < eps_hi)) throw std::invalid_argument("empirical_threshold needs eps_lo < eps_hi");
  IntegratorConfig probe_cfg = cfg;
  probe_cfg.store_every = std::numeric_limits<std::size_t>::max();

  ThresholdResult out;
  auto probe = [&](double eps) {
    ++out.n_runs;
    return survives(integrate(model, ic_family(eps), probe_cfg), model, search.guard_factor);
  };

  if (probe(eps_lo)) {
    std::ostringstream msg;
    msg << "precondition failed: eps_lo = " << eps_lo << " survives to t = " << cfg.t_max;
    throw PreconditionError(msg.str());
  }
  if (!probe(eps_hi)) {
    std::ostringstream msg;
    msg << "precondition failed: eps_hi = " << eps_hi << " does not survive to t = " << cfg.t_max;
    throw PreconditionError(msg.str());
  }

  double lo = eps_lo;
  double hi = eps_hi;
  while (hi - lo > search.tol_eps) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.eps_lo = lo;
  out.eps_hi = hi;
  out.eps_star = 0.5 * (lo + hi);
  return out;
}

}  // namespace ctflow
