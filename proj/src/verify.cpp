#include "ctflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ctflow/characteristics.hpp"
#include "ctflow/fields.hpp"
#include "ctflow/isothermal.hpp"
#include "ctflow/output.hpp"
#include "ctflow/thresholds.hpp"

namespace ctflow {

bool VerifyReport::passed() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"invariants", "oracles", "thresholds", "isothermal",
                                              "all"};
  return names;
}

namespace {

class Battery {
 public:
  Battery(VerifyReport& report, std::string suite) : report_(report), suite_(std::move(suite)) {}

  void check(const std::string& name, bool ok, const std::string& detail = {}) {
    report_.checks.push_back({suite_, name, ok, detail});
  }

  // Records a failure instead of propagating an exception from `body`.
  template <class F>
  void guarded(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(name, false, std::string("exception: ") + e.what());
    }
  }

 private:
  VerifyReport& report_;
  std::string suite_;
};

std::string value(const char* label, double v) { return std::string(label) + " = " + format_double(v); }

ParticleEnsemble gaussian_ensemble(std::size_t n, const InfluenceFunction& psi, double eps) {
  return sample_initial({GaussianDensity{0.0, 1.0}, SlopeOffset{eps}}, n, psi);
}

// K″ = b/(1 + x²), K′ = b·atan(x), tabulated on [0, 40].
InteractionPotential arctan_potential(double b) {
  return InteractionPotential::smooth(
      Tabulated::sample([b](double x) { return b * std::atan(x); }, 0.0, 40.0, 4001),
      Tabulated::sample([b](double x) { return b / (1.0 + x * x); }, 0.0, 40.0, 4001,
                        Tabulated::Extrapolation::Zero));
}

// Long-double bisection for the negative root of the σ₊ residual, written
// out separately from the library root finder.
double reference_sigma_plus(double k, double rho0, double psi) {
  auto g = [&](long double s) {
    const long double kk = k, r = rho0, p = psi;
    return 1.0L / r - (kk + p * s / r - kk * std::exp(p * s / (kk * r))) / (p * p);
  };
  long double lo = -1.0L;
  while (g(lo) > 0.0L) lo *= 2.0L;
  long double hi = 0.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (g(mid) > 0.0L ? hi : lo) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

void invariants_suite(VerifyReport& report) {
  Battery b(report, "invariants");

  b.guarded("influence_symmetry_and_bounds", [&] {
    const std::vector<InfluenceFunction> kernels{
        InfluenceFunction::constant(2.0), InfluenceFunction::cucker_smale(1.0),
        InfluenceFunction::cucker_smale(0.5), InfluenceFunction::cucker_smale(0.75),
        InfluenceFunction::tabulated(Tabulated::sample(
            [](double x) { return 0.25 + 0.5 * std::exp(-x * x); }, 0.0, 10.0, 201))};
    bool ok = true;
    for (const auto& psi : kernels) {
      for (int i = 0; i <= 400; ++i) {
        const double x = 0.05 * i;
        const double v = psi(x);
        ok = ok && v == psi(-x) && v >= psi.psi_m() && v <= psi.psi_M();
      }
    }
    b.check("influence_symmetry_and_bounds", ok);
  });

  b.guarded("convolution_bounds", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    const auto ens = gaussian_ensemble(60, psi, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      const double c = convolve_influence(ens, psi, i);
      ok = ok && c >= psi.psi_m() && c <= psi.psi_M();
    }
    b.check("convolution_bounds", ok);
  });

  b.guarded("net_forces_vanish", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    auto ens = gaussian_ensemble(80, psi, 0.2);
    for (std::size_t i = 0; i < ens.size(); ++i) ens.u[i] += std::sin(3.0 * ens.x[i]);
    const auto K = arctan_potential(0.5);
    double align = 0.0, newton = 0.0, smooth = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      align += ens.m[i] * alignment_accel(ens, psi, i);
      newton += ens.m[i] * newtonian_accel(ens, 1.0, i);
      smooth += ens.m[i] * smooth_accel(ens, K, i);
    }
    const double worst = std::max({std::abs(align), std::abs(newton), std::abs(smooth)});
    b.check("net_forces_vanish", worst <= 1e-12, value("max |sum m_i a_i|", worst));
  });

  b.guarded("ea_run_invariants", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    const auto model = CharModel::ea(psi);
    const auto ens0 = gaussian_ensemble(64, psi, 0.1);
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    cfg.store_every = 10;
    const auto res = integrate(model, ens0, cfg);
    const auto& tr = res.trajectory;
    double min_d = INFINITY, drift = 0.0;
    bool ordered = true, bounded_i = true;
    for (std::size_t s = 0; s < tr.samples(); ++s) {
      drift = std::max(drift, std::abs(tr.momentum(s) - tr.momentum(0)));
      for (std::size_t i = 0; i < tr.particles(); ++i) {
        min_d = std::min(min_d, tr.d(s, i));
        if (i + 1 < tr.particles()) ordered = ordered && tr.x(s, i) < tr.x(s, i + 1);
        const double t = tr.time(s);
        if (t > 0.0) {
          const double rate = tr.I(s, i) / t;
          bounded_i = bounded_i && rate >= psi.psi_m() - 1e-9 && rate <= psi.psi_M() + 1e-9;
        }
      }
    }
    b.check("ea_no_blowup", !res.blowup.has_value());
    b.check("ea_mass_weights_unchanged", res.final_state.m == ens0.m);
    b.check("ea_momentum_drift", drift <= 1e-10 * cfg.t_max, value("drift", drift));
    b.check("ea_sign_preserved", min_d >= -1e-9, value("min d", min_d));
    b.check("ea_order_preserved", ordered);
    b.check("ea_accumulator_bounds", bounded_i);
  });

  b.guarded("vacuum_preserved", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    auto ens = gaussian_ensemble(16, psi, 0.1);
    ens.rho[3] = 0.0;
    ens.rho[10] = 0.0;
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    const auto res = integrate(CharModel::ea(psi), ens, cfg);
    b.check("vacuum_preserved", res.final_state.rho[3] == 0.0 && res.final_state.rho[10] == 0.0);
  });

  b.guarded("eap_momentum", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    const auto ens = gaussian_ensemble(64, psi, 0.2);
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    const auto res = integrate(CharModel::eap(psi, -1.0), ens, cfg);
    const double drift = std::abs(res.final_state.momentum() - res.momentum0);
    b.check("eap_momentum_drift", drift <= 1e-10 * cfg.t_max, value("drift", drift));
  });

  b.guarded("isothermal_conservation", [&] {
    IsoConfig cfg;
    cfg.nx = 128;
    const auto series = solve_iso_damped(make_bump_state({}, cfg.L, cfg.nx), cfg, 2.0);
    const double mass = std::abs(series.mass.back() - series.mass.front());
    const double mom =
        std::abs(series.momentum.back() - series.momentum.front() - series.source.back());
    b.check("isothermal_mass_drift", mass <= 1e-10, value("drift", mass));
    b.check("isothermal_momentum_balance", mom <= 1e-8, value("defect", mom));
  });
}

void oracles_suite(VerifyReport& report) {
  Battery b(report, "oracles");

  b.guarded("brute_force_sums", [&] {
    const auto psi = InfluenceFunction::cucker_smale(1.0);
    auto ens = gaussian_ensemble(50, psi, 0.3);
    for (std::size_t i = 0; i < ens.size(); ++i) ens.u[i] += std::cos(2.0 * ens.x[i]);
    bool conv_exact = true, align_exact = true;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      double c = 0.0, a = 0.0;
      for (std::size_t j = 0; j < ens.size(); ++j) {
        const double w = 1.0 / (1.0 + (ens.x[i] - ens.x[j]) * (ens.x[i] - ens.x[j]));
        c += ens.m[j] * w;
        a += ens.m[j] * w * (ens.u[j] - ens.u[i]);
      }
      conv_exact = conv_exact && c == convolve_influence(ens, psi, i);
      align_exact = align_exact && a == alignment_accel(ens, psi, i);
    }
    b.check("convolution_equals_brute_force", conv_exact);
    b.check("alignment_equals_brute_force", align_exact);

    const auto bulk = evaluate_nonlocal(ens, psi, InteractionPotential::none());
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      worst = std::max(worst, std::abs(bulk.psi_conv[i] - convolve_influence(ens, psi, i)));
      worst = std::max(worst, std::abs(bulk.alignment[i] - alignment_accel(ens, psi, i)));
    }
    b.check("pair_loop_matches_direct", worst <= 1e-14, value("max difference", worst));
  });

  b.guarded("two_particle_convolution", [&] {
    ParticleEnsemble ens;
    ens.resize(2);
    ens.x = {-1.0, 1.0};
    ens.m = {0.5, 0.5};
    const double c = convolve_influence(ens, InfluenceFunction::cucker_smale(1.0), 1);
    b.check("two_particle_convolution", std::abs(c - 0.6) <= 1e-15, value("value", c));
  });

  b.guarded("newtonian_sorted_vs_direct", [&] {
    ParticleEnsemble ens;
    ens.resize(800);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      ens.x[i] = normal(rng);
      ens.m[i] = 1.0 / 800.0;
    }
    ens.x[17] = ens.x[400];  // a tie
    const auto sorted = newtonian_accel_sorted(ens, -1.3);
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      worst = std::max(worst, std::abs(sorted[i] - newtonian_accel(ens, -1.3, i)));
    }
    b.check("newtonian_sorted_vs_direct", worst <= 1e-14, value("max difference", worst));
  });

  b.guarded("smooth_potential_direct", [&] {
    const auto K = arctan_potential(1.0);
    const auto psi = InfluenceFunction::constant(1.0);
    const auto ens = gaussian_ensemble(40, psi, 0.0);
    const auto bulk = evaluate_nonlocal(ens, psi, K);
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      double f = 0.0, kk = 0.0;
      for (std::size_t j = 0; j < ens.size(); ++j) {
        const double dx = ens.x[i] - ens.x[j];
        f += ens.m[j] * K.kprime(dx);
        kk += ens.m[j] * K.kpp(dx);
      }
      worst = std::max({worst, std::abs(-f - smooth_accel(ens, K, i)),
                        std::abs(kk - convolve_kpp(ens, K, i)), std::abs(bulk.potential[i] - f),
                        std::abs(bulk.kpp_conv[i] - kk)});
    }
    b.check("smooth_potential_direct", worst <= 1e-14, value("max difference", worst));
  });

  b.guarded("sigma_plus_reference", [&] {
    double worst = 0.0;
    for (double k : {-0.5, -1.0, -2.0}) {
      for (double rho0 : {0.1, 1.0, 3.0}) {
        for (double psi : {0.5, 1.0, 2.0}) {
          worst = std::max(worst, std::abs(sigma_plus_eap(k, rho0, psi) -
                                           reference_sigma_plus(k, rho0, psi)));
        }
      }
    }
    b.check("sigma_plus_reference", worst <= 1e-10, value("max difference", worst));
  });
}

void thresholds_suite(VerifyReport& report) {
  Battery b(report, "thresholds");
  const std::vector<double> ks{-0.25, -1.0, -4.0};
  const std::vector<double> rhos{0.01, 0.2, 1.0, 5.0};
  const std::vector<double> psis{0.3, 1.0, 2.5};

  b.guarded("constant_psi_sharpness", [&] {
    double worst = 0.0;
    for (double k : ks)
      for (double r : rhos)
        for (double p : psis)
          worst = std::max(worst, std::abs(sigma_plus_eap(k, r, p) -
                                           sigma_minus_eap_refined(k, r, p, p)));
    b.check("constant_psi_sharpness", worst <= 1e-10, value("max gap", worst));
  });

  b.guarded("root_residual_and_order", [&] {
    double worst = 0.0;
    bool ordered = true;
    for (double k : ks)
      for (double r : rhos)
        for (double p : psis) {
          const double sp = sigma_plus_eap(k, r, p);
          worst = std::max(worst, std::abs(sigma_plus_residual(sp, k, r, p)));
          ordered = ordered && sigma_minus_eap(k, r) <= sp && sp <= 0.0;
        }
    b.check("sigma_plus_residual", worst <= 1e-10, value("max |g|", worst));
    b.check("sigma_minus_le_sigma_plus_le_0", ordered);
  });

  b.guarded("sigma_plus_monotone", [&] {
    bool ok = true;
    for (double k : ks)
      for (double p : psis) {
        double prev = 0.0;
        for (int i = 1; i <= 60; ++i) {
          const double s = sigma_plus_eap(k, 0.1 * i, p);
          ok = ok && s <= prev;
          prev = s;
        }
      }
    b.check("sigma_plus_monotone", ok);
  });

  b.guarded("verdicts", [&] {
    auto q = [](double rho0, double d0) { return ThresholdQuery{rho0, d0 - 0.4, 0.4}; };
    bool ok = classify_ea(ThresholdQuery{1.0, -0.4, 0.4}).verdict == Verdict::Critical;
    ok = ok && classify_ea(q(1.0, 0.3)).verdict == Verdict::Subcritical;
    ok = ok && classify_ea(q(1.0, -0.3)).verdict == Verdict::Supercritical;
    ok = ok && classify_eap(q(1.0, 0.5), 1.0, {}).verdict == Verdict::Supercritical;
    ok = ok && classify_eap(q(1.0, -2.0), -1.0, {}).verdict == Verdict::Supercritical;
    for (double r : rhos)
      for (double d0 : {0.0, 1e-9, 0.5, 3.0})
        ok = ok && classify_eap(q(r, d0), -1.0, EapBounds{1.0, std::nullopt, std::nullopt}).verdict == Verdict::Subcritical;
    ok = ok && classify_general(q(1.0, -2.5), 4.0, PotentialSign::Repulsive).verdict ==
                   Verdict::Supercritical;
    ok = ok && classify_general(q(1.0, 0.0), 4.0, PotentialSign::Repulsive).verdict ==
                   Verdict::Subcritical;
    ok = ok && classify_general(q(1.0, -0.1), 4.0, PotentialSign::Attractive).verdict ==
                   Verdict::Supercritical;
    ok = ok && classify_general_refined(q(1.0, -0.5), 0.0, 1.0, 1.0).verdict ==
                   Verdict::Indeterminate;
    for (double d0 : {1e-12, 0.2, 7.0})
      ok = ok && classify_general_refined(q(1.0, d0), 0.0, 1.0, 1.0).verdict ==
                     classify_ea(q(1.0, d0)).verdict;
    ok = ok && classify_isothermal(-0.5, 1.0, 1.0, 1.0, 2.0).verdict == Verdict::Subcritical;
    ok = ok && classify_isothermal(-2.0, 0.0, 1.0, 1.0, 2.0).verdict == Verdict::Subcritical;
    b.check("classifier_verdicts", ok);
  });
}

void isothermal_suite(VerifyReport& report, std::uint64_t seed) {
  Battery b(report, "isothermal");

  b.guarded("riemann_roundtrip", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_rho(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> vel(-10.0, 10.0);
    std::uniform_real_distribution<double> pressure(0.1, 10.0);
    double worst = 0.0;
    bool ordered = true;
    for (double gamma : {1.0, 1.4, 2.0}) {
      for (int i = 0; i < 1000; ++i) {
        const double rho = std::exp(log_rho(rng));
        const double u = vel(rng);
        const double A = pressure(rng);
        const auto p = riemann_forward(rho, u, A, gamma);
        const auto [rho2, u2] = riemann_inverse(p.R, p.S, A, gamma);
        worst = std::max({worst, std::abs(rho2 - rho) / rho, std::abs(u2 - u) / std::max(1.0, std::abs(u))});
        const double gap = 2.0 * std::sqrt(A * gamma) * std::pow(rho, 0.5 * (gamma - 1.0));
        ordered = ordered && p.lambda <= u && u <= p.mu &&
                  std::abs((p.mu - p.lambda) - gap) <= 1e-12 * std::max(1.0, gap);
      }
    }
    b.check("riemann_roundtrip", worst <= 1e-12, value("max relative error", worst));
    b.check("characteristic_speeds", ordered);
  });

  b.guarded("constant_state_stationary", [&] {
    IsoConfig cfg;
    cfg.nx = 64;
    const auto ic = make_iso_state([](double) { return 1.0; }, [](double) { return 0.3; }, cfg.L,
                                   cfg.nx);
    const auto series = solve_iso_damped(ic, cfg, 1.0);
    const auto& last = series.snapshots.back();
    double worst = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) {
      worst = std::max({worst, std::abs(last.rho[i] - ic.rho[i]), std::abs(last.u[i] - ic.u[i])});
    }
    const auto rs = rs_fields(last, cfg);
    bool rs_const = true;
    for (std::size_t i = 0; i < rs.r.size(); ++i) rs_const = rs_const && rs.r[i] == cfg.C && rs.s[i] == cfg.C;
    b.check("constant_state_stationary", worst <= 1e-14, value("max change", worst));
    b.check("constant_state_rs_equals_C", rs_const);
  });

  b.guarded("invariant_region", [&] {
    IsoConfig cfg;
    cfg.nx = 256;
    const auto series = solve_iso_damped(make_bump_state({}, cfg.L, cfg.nx), cfg, 5.0);
    const auto region = monitor_invariant_region(series, cfg);
    b.check("invariant_region",
            region.min_rs >= -region.tol_fd && region.max_rs <= region.m0 + region.tol_fd,
            value("min", region.min_rs) + ", " + value("max", region.max_rs) + ", " +
                value("M0", region.m0));
    double worst = 0.0;
    for (const auto& snap : series.snapshots) {
      const auto rs = rs_fields(snap, cfg);
      const std::size_t n = snap.size();
      for (std::size_t i = 0; i < n; ++i) {
        const double dxu = (snap.u[(i + 1) % n] - snap.u[(i + n - 1) % n]) / (2.0 * snap.dx());
        worst = std::max(worst, std::abs(rs.r[i] + rs.s[i] - 2.0 * cfg.C - 2.0 * dxu));
      }
    }
    b.check("rs_sum_identity", worst <= 1e-12, value("max defect", worst));
  });

  b.guarded("local_rs_forward_invariance", [&] {
    const double C = 2.0;
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const double r0 = 6.0 * i / 19.0;
        const double s0 = 6.0 * j / 19.0;
        const double bound = std::max({r0, s0, 2.0 * C});
        const auto path = rs_local_ode(r0, s0, C, 10.0, 1e-3);
        ok = ok && !path.blew_up && path.min_r >= -1e-12 && path.min_s >= -1e-12 &&
             path.max_r <= bound + 1e-12 && path.max_s <= bound + 1e-12;
      }
    }
    b.check("local_rs_forward_invariance", ok);
  });
}

}  // namespace

std::optional<VerifyReport> run_verify(const std::string& suite, std::uint64_t seed) {
  const auto& names = verify_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end()) return std::nullopt;
  VerifyReport report;
  const bool all = suite == "all";
  if (all || suite == "invariants") invariants_suite(report);
  if (all || suite == "oracles") oracles_suite(report);
  if (all || suite == "thresholds") thresholds_suite(report);
  if (all || suite == "isothermal") isothermal_suite(report, seed);
  return report;
}

}  // namespace ctflow
