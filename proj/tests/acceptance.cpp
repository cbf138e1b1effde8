// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 4 9        run the listed criteria only
//
// Exit status is 0 only when every requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctflow/characteristics.hpp"
#include "ctflow/isothermal.hpp"
#include "ctflow/thresholds.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ctflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& v) {
    ss_ << v;
    return *this;
  }
  Detail& num(const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.6g ", key, v);
    ss_ << buf;
    return *this;
  }
  std::string str() const { return ss_.str(); }

 private:
  std::ostringstream ss_;
};

IntegratorConfig horizon(double t_max, double dt0 = 1e-3) {
  IntegratorConfig cfg;
  cfg.t_max = t_max;
  cfg.dt0 = dt0;
  return cfg;
}

ParticleEnsemble gaussian(std::size_t n, double eps, const InfluenceFunction& psi) {
  return sample_initial({GaussianDensity{}, SlopeOffset{eps}}, n, psi);
}

InteractionPotential atan_tables(const std::string& suffix) {
  const std::string dir = CTFLOW_SCENARIO_DIR;
  return InteractionPotential::smooth(Tabulated::load(dir + "/kprime_atan" + suffix + ".csv"),
                                      Tabulated::load(dir + "/kpp_atan" + suffix + ".csv",
                                                      Tabulated::Extrapolation::Zero));
}

double max_momentum_rate(const IntegrationResult& res) {
  double worst = 0.0;
  const auto& tr = res.trajectory;
  for (std::size_t s = 1; s < tr.samples(); ++s) {
    worst = std::max(worst, std::abs(tr.momentum(s) - res.momentum0) / tr.time(s));
  }
  return worst;
}

// 1. Alignment-only dichotomy with the Cucker-Smale kernel.
Outcome ea_dichotomy() {
  Detail out;
  const auto psi = InfluenceFunction::cucker_smale(1.0);
  const auto model = CharModel::ea(psi);

  const auto sub = integrate(model, gaussian(400, 0.1, psi), horizon(50.0));
  double dmin = INFINITY, dmax = -INFINITY;
  for (std::size_t s = 0; s < sub.trajectory.samples(); ++s) {
    for (std::size_t i = 0; i < 400; ++i) {
      dmin = std::min(dmin, sub.trajectory.d(s, i));
      dmax = std::max(dmax, sub.trajectory.d(s, i));
    }
  }
  const bool sub_ok = !sub.blowup && sub.t_final >= 50.0 - 1e-9 && dmin > 0.0 && dmax <= psi.psi_M() + 1e-6;
  out << (sub_ok ? "eps=+0.1 survives " : "eps=+0.1 FAILED ");
  out.num("min_d", dmin).num("max_d", dmax);

  const auto super = integrate(model, gaussian(400, -0.1, psi), horizon(50.0));
  const bool super_ok = super.blowup && std::isfinite(super.blowup->t_star);
  out << (super_ok ? "eps=-0.1 blows up " : "eps=-0.1 FAILED ");
  if (super.blowup) out.num("t_star", super.blowup->t_star);

  const auto th = empirical_threshold(model, [&](double eps) { return gaussian(400, eps, psi); }, -0.1, 0.1,
                                      horizon(50.0));
  const bool th_ok = th.eps_star >= -1e-3 && th.eps_star <= 1e-3;
  out.num("eps_star", th.eps_star).num("runs", static_cast<double>(th.n_runs));
  return {sub_ok && super_ok && th_ok, out.str()};
}

// 2. β = d/ρ is constant (alignment only) or affine in t (Poisson).
Outcome beta_invariants() {
  Detail out;
  const auto psi = InfluenceFunction::cucker_smale(1.0);
  const auto ens = gaussian(400, 0.1, psi);

  const auto ea_model = CharModel::ea(psi);
  const auto ea = integrate(ea_model, ens, horizon(10.0));
  const double r_ea = beta_residual(ea.trajectory, ea_model).residual;

  const auto eap_model = CharModel::eap(psi, -1.0);
  const auto eap = integrate(eap_model, ens, horizon(5.0));
  const double r_eap = beta_residual(eap.trajectory, eap_model).residual;

  out.num("ea_T10", r_ea).num("eap_T5", r_eap);
  return {!ea.blowup && !eap.blowup && r_ea <= 1e-6 && r_eap <= 1e-6, out.str()};
}

// 3. Attractive Poisson forcing blows up for every slope offset.
Outcome attractive_blowup() {
  Detail out;
  const auto psi = InfluenceFunction::constant(1.0);
  const auto model = CharModel::eap(psi, 1.0);
  bool ok = true;
  for (double d0 : {-1.0, 0.0, 1.0}) {
    const auto res = integrate(model, gaussian(400, d0, psi), horizon(100.0));
    const bool hit = res.blowup && res.blowup->t_star <= 100.0;
    ok = ok && hit;
    out << "d0=" << d0 << ":";
    if (res.blowup) {
      out.num("t_star", res.blowup->t_star);
    } else {
      out << "none ";
    }
  }
  return {ok, out.str()};
}

// 4. Constant-ψ Poisson threshold is sharp at σ₊.
Outcome eap_sharpness() {
  Detail out;
  const auto psi = InfluenceFunction::constant(1.0);
  const auto model = CharModel::eap(psi, -1.0);
  auto family = [&](double eps) {
    return sample_initial({UniformDensity{-0.5, 0.5}, SlopeOffset{eps}}, 100, psi);
  };
  const auto th = empirical_threshold(model, family, -2.0, 0.0, horizon(25.0));
  const double target = oracle::kSigmaPlus_k1_rho1_psi1;  // ρ₀ = 1 on the unit interval
  out.num("eps_star", th.eps_star).num("sigma_plus", target).num("gap", std::abs(th.eps_star - target));
  return {std::abs(th.eps_star - target) <= 2e-2, out.str()};
}

// 5. Implicit density formula along characteristics.
Outcome implicit_formula() {
  Detail out;
  const auto psi = InfluenceFunction::constant(1.0);
  const auto model = CharModel::eap(psi, -1.0);
  // d0 = −0.5 lies above σ₊ ≈ −1.146: subcritical
  const auto ens = sample_initial({UniformDensity{-0.5, 0.5}, SlopeOffset{-0.5}}, 100, psi);
  auto residual = [&](double dt) {
    auto cfg = horizon(5.0, dt);
    cfg.store_every = 1;
    cfg.max_samples = 100000;
    const auto res = integrate(model, ens, cfg);
    double worst = res.blowup ? INFINITY : 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) worst = std::max(worst, implicit_rho_residual(res.trajectory, model, i));
    return worst;
  };
  const double at_1e3 = residual(1e-3);
  // At dt = 1e-3 the defect already sits at round-off, so the convergence
  // rate is read off the truncation-dominated coarser halvings.
  const double r8 = residual(8e-3), r4 = residual(4e-3), r2 = residual(2e-3);
  out.num("dt1e-3", at_1e3).num("dt8e-3", r8).num("dt4e-3", r4).num("dt2e-3", r2);
  out.num("ratio_8_4", r8 / r4).num("ratio_4_2", r4 / r2);
  return {at_1e3 <= 1e-4 && r8 / r4 >= 8.0 && r4 / r2 >= 8.0, out.str()};
}

// 6. Mass and momentum conservation.
Outcome conservation() {
  Detail out;
  const auto cs = InfluenceFunction::cucker_smale(1.0);
  const auto one = InfluenceFunction::constant(1.0);
  struct Case {
    const char* name;
    CharModel model;
    ParticleEnsemble ens;
  };
  auto shifted = [](ParticleEnsemble e) {
    for (std::size_t i = 0; i < e.size(); ++i) e.u[i] += 0.3 + 0.2 * std::sin(3.0 * e.x[i]);
    return e;
  };
  std::vector<Case> cases{
      {"ea", CharModel::ea(cs), shifted(gaussian(200, 0.1, cs))},
      {"eap", CharModel::eap(cs, -1.0), shifted(gaussian(200, 0.1, cs))},
      {"general", CharModel::general(one, atan_tables("")), shifted(gaussian(200, 0.2, one))},
  };
  bool ok = true;
  for (const auto& c : cases) {
    const auto res = integrate(c.model, c.ens, horizon(10.0));
    const bool mass_exact = res.final_state.m == c.ens.m && res.final_state.total_mass() == res.total_mass0;
    const double rate = max_momentum_rate(res);
    ok = ok && mass_exact && rate <= 1e-10;
    out << c.name << (mass_exact ? ":mass_exact " : ":mass_DRIFT ");
    out.num("dP/t", rate);
  }

  IsoConfig cfg;
  cfg.snapshot_every = 1000000;
  const auto series = solve_iso_damped(make_bump_state({}, cfg.L, cfg.nx), cfg, 10.0);
  double drift = 0.0;
  for (double m : series.mass) drift = std::max(drift, std::abs(m - series.mass.front()));
  out.num("fv_mass_drift", drift);
  return {ok && drift <= 1e-10, out.str()};
}

// Survival probes with the smooth tabulated potentials.
bool probe_survives(const CharModel& model, double d0, double t_max) {
  const auto res = integrate(model, gaussian(100, d0, model.psi), horizon(t_max));
  return survives(res, model, 10.0);
}

// 7. General potential band with B = 1.
Outcome general_band() {
  Detail out;
  const auto model = CharModel::general(InfluenceFunction::constant(1.0), atan_tables(""));
  out.num("B", model.potential.curvature_bound());
  bool ok = true;
  for (double d0 : {0.0, 0.25, 1.0}) {
    const bool s = probe_survives(model, d0, 25.0);
    ok = ok && s;
    out << "d0=" << d0 << (s ? ":survives " : ":BLOWS_UP ");
  }
  for (double d0 : {-1.05, -1.5, -2.0}) {
    const bool s = probe_survives(model, d0, 25.0);
    ok = ok && !s;
    out << "d0=" << d0 << (s ? ":SURVIVES " : ":blows_up ");
  }
  // containment in [−1, 0] needs no finer bracket than 1e-2
  ThresholdSearch search;
  search.tol_eps = 1e-2;
  const auto th = empirical_threshold(model, [&](double eps) { return gaussian(100, eps, model.psi); }, -1.5,
                                      0.5, horizon(25.0), search);
  out.num("eps_star", th.eps_star);
  return {ok && th.eps_star >= -1.0 && th.eps_star <= 0.0, out.str()};
}

// 8. Refined thresholds with ψ_m = 1 and B = 3/16.
Outcome refined_thresholds() {
  Detail out;
  const auto model = CharModel::general(InfluenceFunction::constant(1.0), atan_tables("_3_16"));
  const double B = model.potential.curvature_bound();
  const double sub = -(1.0 + std::sqrt(1.0 - 4.0 * B)) / 2.0;
  const double super = (1.0 - std::sqrt(1.0 + 4.0 * B)) / 2.0;
  out.num("B", B).num("sub_bound", sub).num("super_bound", super);
  const bool mid = probe_survives(model, -0.7, 25.0);
  const bool low = probe_survives(model, -1.5, 25.0);
  out << "d0=-0.7" << (mid ? ":survives " : ":BLOWS_UP ");
  out << "d0=-1.5" << (low ? ":SURVIVES " : ":blows_up ");
  if (!mid) out << "(d0=-0.7 is below the supercritical bound as well; see README)";
  return {mid && !low, out.str()};
}

// 9. Isothermal invariant region under refinement and box doubling.
Outcome invariant_region() {
  Detail out;
  auto run = [](double L, std::size_t nx) {
    IsoConfig cfg;
    cfg.L = L;
    cfg.nx = nx;
    cfg.snapshot_every = 1;
    const auto series = solve_iso_damped(make_bump_state({}, L, nx), cfg, 10.0);
    return monitor_invariant_region(series, cfg);
  };
  const auto coarse = run(40.0, 512);
  const auto fine = run(40.0, 1024);
  const auto wide = run(80.0, 1024);  // same Δx as the coarse run
  auto inside = [](const InvariantRegion& r) {
    return r.min_rs >= -r.tol_fd && r.max_rs <= std::max(r.m0, 4.0) + r.tol_fd;
  };
  const double ratio = coarse.tol_fd / fine.tol_fd;
  const double box = std::max(std::abs(wide.min_rs - coarse.min_rs), std::abs(wide.max_rs - coarse.max_rs));
  out.num("min_rs", coarse.min_rs).num("max_rs", coarse.max_rs).num("M0", coarse.m0);
  out.num("tol512", coarse.tol_fd).num("tol1024", fine.tol_fd).num("ratio", ratio).num("box_change", box);
  return {inside(coarse) && inside(fine) && ratio >= 3.5 && box <= 1e-6, out.str()};
}

// 10. A particle with d0 = 0 keeps d ≡ 0.
Outcome critical_fixed_point() {
  Detail out;
  const auto psi = InfluenceFunction::cucker_smale(1.0);
  const std::size_t c = 250;
  const auto ens = fixture::critical_at(psi, 400, c);
  // the density at the critical particle grows like e^{I(t)}; no finite-time
  // singularity, so the magnitude cap is lifted
  auto cfg = horizon(50.0);
  cfg.d_cap = 1e300;
  const auto res = integrate(CharModel::ea(psi), ens, cfg);
  double worst = 0.0;
  for (std::size_t s = 0; s < res.trajectory.samples(); ++s) worst = std::max(worst, std::abs(res.trajectory.d(s, c)));
  out.num("d0", ens.d[c]).num("max_abs_d", worst).num("t_final", res.t_final).num("rho_final", res.final_state.rho[c]);
  return {!res.blowup && res.t_final >= 50.0 - 1e-9 && worst <= 1e-12, out.str()};
}

// 11. Riemann roundtrip and the r + s identity on solver snapshots.
Outcome riemann_identities() {
  Detail out;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> log_rho(-4.0, 4.0), vel(-10.0, 10.0), press(0.05, 5.0);
  double worst = 0.0;
  for (double gamma : {1.0, 1.4, 2.0}) {
    for (int k = 0; k < 1000; ++k) {
      const double rho = std::exp(log_rho(gen)), u = vel(gen), A = press(gen);
      const auto p = riemann_forward(rho, u, A, gamma);
      const auto [rho2, u2] = riemann_inverse(p.R, p.S, A, gamma);
      worst = std::max({worst, std::abs(rho2 - rho) / std::max(1.0, rho), std::abs(u2 - u) / std::max(1.0, std::abs(u))});
    }
  }
  IsoConfig cfg;
  cfg.snapshot_every = 10;
  const auto series = solve_iso_damped(make_bump_state({}, cfg.L, cfg.nx), cfg, 10.0);
  double identity = 0.0;
  for (const auto& snap : series.snapshots) {
    const auto rs = rs_fields(snap, cfg);
    const std::size_t n = snap.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double dudx = (snap.u[(i + 1) % n] - snap.u[(i + n - 1) % n]) / (2.0 * snap.dx());
      identity = std::max(identity, std::abs(rs.r[i] + rs.s[i] - 2.0 * cfg.C - 2.0 * dudx));
    }
  }
  out.num("roundtrip", worst).num("r+s-2C-2ux", identity).num("snapshots", static_cast<double>(series.snapshots.size()));
  return {worst <= 1e-12 && identity <= 1e-10, out.str()};
}

// 12. Particle sums against brute force.
Outcome oracle_equivalence() {
  Detail out;
  const auto cs = InfluenceFunction::cucker_smale(1.0);
  const auto K = atan_tables("");
  std::size_t mismatches = 0, checked = 0;
  for (std::size_t n : {2, 3, 7, 20, 50}) {
    auto ens = gaussian(n, 0.1, cs);
    for (std::size_t i = 0; i < n; ++i) ens.u[i] += std::cos(1.7 * ens.x[i]);
    auto psi_fn = [&](double x) { return cs(x); };
    for (std::size_t i = 0; i < n; ++i) {
      double kp = 0.0, kpp = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        kp += ens.m[j] * K.kprime(ens.x[i] - ens.x[j]);
        kpp += ens.m[j] * K.kpp(ens.x[i] - ens.x[j]);
      }
      mismatches += convolve_influence(ens, cs, i) != oracle::conv(ens.x, ens.m, psi_fn, i);
      mismatches += alignment_accel(ens, cs, i) != oracle::alignment(ens.x, ens.u, ens.m, psi_fn, i);
      mismatches += smooth_accel(ens, K, i) != -kp;
      mismatches += convolve_kpp(ens, K, i) != kpp;
      checked += 4;
    }
  }
  auto big = gaussian(800, 0.0, cs);
  std::mt19937_64 gen(11);
  std::shuffle(big.x.begin(), big.x.end(), gen);
  double worst = 0.0;
  for (double k : {1.0, -2.5}) {
    const auto fast = newtonian_accel_sorted(big, k);
    for (std::size_t i = 0; i < big.size(); ++i) {
      worst = std::max(worst, std::abs(fast[i] - oracle::newtonian_signed_sum(big.x, big.m, k, i)));
    }
  }
  out << "exact " << (checked - mismatches) << "/" << checked << " ";
  out.num("newton_n800_maxdiff", worst);
  return {mismatches == 0 && worst <= 1e-14, out.str()};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<const char*, std::function<Outcome()>>> all{
      {"EA dichotomy", ea_dichotomy},
      {"beta invariants", beta_invariants},
      {"attractive blow-up", attractive_blowup},
      {"EAP sharpness", eap_sharpness},
      {"implicit density formula", implicit_formula},
      {"conservation", conservation},
      {"general-K band", general_band},
      {"refined thresholds", refined_thresholds},
      {"isothermal invariant region", invariant_region},
      {"critical fixed point", critical_fixed_point},
      {"Riemann identities", riemann_identities},
      {"oracle equivalence", oracle_equivalence},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  for (int a = 1; a < argc; ++a) {
    const long n = std::strtol(argv[a], nullptr, 10);
    if (n < 1 || n > static_cast<long>(criteria().size())) {
      std::fprintf(stderr, "acceptance: criterion must be 1..%zu\n", criteria().size());
      return 64;
    }
    which.push_back(static_cast<std::size_t>(n));
  }
  if (which.empty()) {
    for (std::size_t n = 1; n <= criteria().size(); ++n) which.push_back(n);
  }

  bool all_pass = true;
  for (std::size_t n : which) {
    const auto& [name, fn] = criteria()[n - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %02zu %s  %-28s %s[%.1fs]\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
