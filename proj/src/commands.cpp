#include "ctflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ctflow/output.hpp"
#include "ctflow/thresholds.hpp"
#include "ctflow/verify.hpp"

namespace ctflow {

namespace {

struct Row {
  double x;
  ThresholdQuery q;
  Classification c;
};

Classification classify_point(const Scenario& s, const ThresholdQuery& q) {
  switch (s.model) {
    case ScenarioModel::EA:
      return classify_ea(q);
    case ScenarioModel::EAP: {
      EapBounds bounds;
      bounds.psi_M = s.psi.psi_M();
      if (s.refined && s.psi.psi_m() > 0.0) bounds.psi_m = s.psi.psi_m();
      bounds.psi_exp = s.psi_exp;
      return classify_eap(q, s.potential.k(), bounds);
    }
    case ScenarioModel::GeneralK:
      return classify_general(q, s.potential.curvature_bound(), s.general_sign());
    case ScenarioModel::GeneralKRefined:
      return classify_general_refined(q, s.potential.curvature_bound(), s.psi.psi_m(),
                                      s.psi.psi_M());
    case ScenarioModel::Isothermal:
      break;
  }
  throw ScenarioError("isothermal points are classified on the grid");
}

std::vector<Row> characteristic_rows(const Scenario& s) {
  const auto ens = sample_initial(s.ic, s.n, s.psi);
  std::vector<Row> rows;
  rows.reserve(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double conv = convolve_influence(ens, s.psi, i);
    double dxu0 = 0.0;
    if (const auto* offset = std::get_if<SlopeOffset>(&s.ic.u0)) {
      dxu0 = -conv + offset->eps;
    } else {
      dxu0 = std::get<ExplicitVelocity>(s.ic.u0).u0.slope(ens.x[i]);
    }
    const ThresholdQuery q{ens.rho[i], dxu0, conv};
    rows.push_back({ens.x[i], q, classify_point(s, q)});
  }
  return rows;
}

std::vector<Row> isothermal_rows(const Scenario& s) {
  const auto state = make_bump_state(s.bump, s.iso.L, s.iso.nx);
  const double two_w2 = 2.0 * s.bump.w * s.bump.w;
  std::vector<Row> rows;
  rows.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double x = state.x(i);
    const double g = std::exp(-x * x / two_w2);
    const double shape = 1.0 + s.bump.a * g;
    const double scale = state.rho[i] / shape;  // unit-mass normalization
    const double dxrho0 = -s.bump.a * x * g / (s.bump.w * s.bump.w) * scale;
    const double dxu0 = -s.bump.b * g * (1.0 - x * x / (s.bump.w * s.bump.w));
    Row row{x, ThresholdQuery{state.rho[i], dxu0, s.iso.C}, {}};
    row.c = classify_isothermal(dxu0, dxrho0, state.rho[i], s.iso.A, s.iso.C);
    rows.push_back(row);
  }
  return rows;
}

std::string trigger_name(BlowupTrigger t) { return std::string(to_string(t)); }

}  // namespace

AnalyticBand analytic_band(const Scenario& s, const ParticleEnsemble& ens) {
  AnalyticBand band;
  switch (s.model) {
    case ScenarioModel::EA:
      band.sub = 0.0;
      band.super = 0.0;
      break;
    case ScenarioModel::EAP: {
      const double k = s.potential.k();
      if (k > 0.0) break;  // every ε blows up
      double sub = -INFINITY;
      double super = -INFINITY;
      const bool refined = s.refined && s.psi.psi_m() > 0.0;
      for (std::size_t i = 0; i < ens.size(); ++i) {
        sub = std::max(sub, sigma_plus_eap(k, ens.rho[i], s.psi.psi_M()));
        super = std::max(super, refined ? sigma_minus_eap_refined(k, ens.rho[i], s.psi.psi_m(), s.psi_exp)
                                        : sigma_minus_eap(k, ens.rho[i]));
      }
      band.sub = std::min(sub, 0.0);
      band.super = super;
      break;
    }
    case ScenarioModel::GeneralK:
      if (s.general_sign() == PotentialSign::Repulsive) {
        band.sub = 0.0;
        band.super = -std::sqrt(s.potential.curvature_bound());
      } else {
        band.super = 0.0;
      }
      break;
    case ScenarioModel::GeneralKRefined: {
      const double B = s.potential.curvature_bound();
      const double pm = s.psi.psi_m();
      const double pM = s.psi.psi_M();
      if (pm * pm >= 4.0 * B) band.sub = -(pm + std::sqrt(pm * pm - 4.0 * B)) / 2.0;
      band.super = (pm - std::sqrt(pM * pM + 4.0 * B)) / 2.0;
      break;
    }
    case ScenarioModel::Isothermal:
      break;
  }
  return band;
}

int cmd_classify(const Scenario& s, const std::filesystem::path& out, std::ostream& log) {
  std::vector<Row> rows;
  try {
    rows = s.is_isothermal() ? isothermal_rows(s) : characteristic_rows(s);
  } catch (const ScenarioError& e) {
    log << "classify: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::invalid_argument& e) {
    log << "classify: " << e.what() << "\n";
    return exit_code::usage;
  }

  CsvDocument csv(s.echo, {"x", "rho0", "dxu0", "psi_conv", "d0", "verdict", "sigma_minus",
                           "sigma_plus"});
  std::size_t sub = 0, super = 0, crit = 0, indet = 0;
  for (const Row& r : rows) {
    csv.cell(r.x).cell(r.q.rho0).cell(r.q.dxu0).cell(r.q.psi_conv).cell(r.q.d0());
    csv.cell(std::string(to_string(r.c.verdict)));
    r.c.sigma_minus ? csv.cell(*r.c.sigma_minus) : csv.empty_cell();
    r.c.sigma_plus ? csv.cell(*r.c.sigma_plus) : csv.empty_cell();
    csv.end_row();
    switch (r.c.verdict) {
      case Verdict::Subcritical:
        ++sub;
        break;
      case Verdict::Supercritical:
        ++super;
        break;
      case Verdict::Critical:
        ++crit;
        break;
      case Verdict::Indeterminate:
        ++indet;
        break;
    }
  }
  write_atomic(out / "classify.csv", csv.str());
  log << "classify: " << rows.size() << " points, " << sub << " subcritical, " << super
      << " supercritical, " << crit << " critical, " << indet << " indeterminate\n";
  if (super > 0) return exit_code::supercritical;
  if (sub == rows.size()) return exit_code::ok;
  return exit_code::indeterminate;
}

namespace {

int simulate_characteristics(const Scenario& s, const std::filesystem::path& out, std::ostream& log) {
  const CharModel model = s.char_model();
  const auto ens = sample_initial(s.ic, s.n, s.psi);
  IntegrationResult res;
  try {
    res = integrate(model, ens, s.integrator);
  } catch (const std::exception& e) {
    log << "simulate: numerical failure: " << e.what() << "\n";
    return exit_code::failure;
  }

  if (s.outputs.trajectory) {
    CsvDocument csv(s.echo, {"t", "particle", "x", "u", "rho", "d", "I"});
    const Trajectory& tr = res.trajectory;
    for (std::size_t k = 0; k < tr.samples(); ++k) {
      for (std::size_t i = 0; i < tr.particles(); ++i) {
        csv.cell(tr.time(k)).cell(i).cell(tr.x(k, i)).cell(tr.u(k, i)).cell(tr.rho(k, i));
        csv.cell(tr.d(k, i)).cell(tr.I(k, i));
        csv.end_row();
      }
    }
    write_atomic(out / "trajectory.csv", csv.str());
  }

  log << "simulate: model " << to_string(s.model) << ", " << s.n << " particles, " << res.steps
      << " steps, t = " << format_double(res.t_final) << "\n";
  if (!res.blowup) {
    log << "simulate: no blow-up up to t_max\n";
    return exit_code::ok;
  }

  const BlowupReport& b = *res.blowup;
  if (s.outputs.report) {
    write_atomic(out / "report.json",
                 to_json({{"particle", static_cast<std::int64_t>(b.particle)},
                          {"t_star", b.t_star},
                          {"trigger", trigger_name(b.trigger)},
                          {"d_last", b.d_last},
                          {"rho_last", b.rho_last}}));
  }
  log << "simulate: blow-up at particle " << b.particle << ", t_star = " << format_double(b.t_star)
      << ", trigger " << trigger_name(b.trigger) << "\n";
  const double d0 = ens.d[b.particle];
  if (d0 < 0.0) {
    // Two candidate Riccati bounds on the blow-up time; neither is enforced.
    log << "simulate: d0 = " << format_double(d0) << ", candidate bounds t* <= -d0 = "
        << format_double(-d0) << ", t* <= -1/d0 = " << format_double(-1.0 / d0) << "\n";
  }
  return exit_code::supercritical;
}

int simulate_isothermal(const Scenario& s, const std::filesystem::path& out, std::ostream& log) {
  IsoSeries series;
  try {
    series = solve_iso_damped(make_bump_state(s.bump, s.iso.L, s.iso.nx), s.iso, s.iso.T);
  } catch (const std::exception& e) {
    log << "simulate: numerical failure: " << e.what() << "\n";
    return exit_code::failure;
  }
  if (s.outputs.fields) {
    CsvDocument csv(s.echo, {"t", "x", "rho", "u", "r", "s"});
    for (const IsoState& snap : series.snapshots) {
      const RSField rs = rs_fields(snap, s.iso);
      for (std::size_t i = 0; i < snap.size(); ++i) {
        csv.cell(snap.t).cell(snap.x(i)).cell(snap.rho[i]).cell(snap.u[i]).cell(rs.r[i]).cell(rs.s[i]);
        csv.end_row();
      }
    }
    write_atomic(out / "fields.csv", csv.str());
  }
  const InvariantRegion region = monitor_invariant_region(series, s.iso);
  log << "simulate: isothermal, " << s.iso.nx << " cells, " << series.steps << " steps, mass drift "
      << format_double(series.mass.back() - series.mass.front()) << "\n";
  log << "simulate: r,s range [" << format_double(region.min_rs) << ", "
      << format_double(region.max_rs) << "], M0 = " << format_double(region.m0)
      << ", tol_fd = " << format_double(region.tol_fd) << "\n";
  return exit_code::ok;
}

}  // namespace

int cmd_simulate(const Scenario& s, const std::filesystem::path& out, std::ostream& log) {
  try {
    return s.is_isothermal() ? simulate_isothermal(s, out, log) : simulate_characteristics(s, out, log);
  } catch (const ScenarioError& e) {
    log << "simulate: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::invalid_argument& e) {
    log << "simulate: " << e.what() << "\n";
    return exit_code::usage;
  }
}

int cmd_sweep(const Scenario& s, std::optional<double> eps_lo, std::optional<double> eps_hi,
              const std::filesystem::path& out, std::ostream& log) {
  if (s.is_isothermal()) {
    log << "sweep: needs a characteristic model\n";
    return exit_code::usage;
  }
  if (!std::holds_alternative<SlopeOffset>(s.ic.u0)) {
    log << "sweep: needs [ic] u = slope_offset\n";
    return exit_code::usage;
  }
  const double lo = eps_lo.value_or(s.sweep.eps_lo);
  const double hi = eps_hi.value_or(s.sweep.eps_hi);

  ThresholdResult result;
  AnalyticBand band;
  try {
    const CharModel model = s.char_model();
    auto family = [&](double eps) {
      InitialDataSpec spec = s.ic;
      spec.u0 = SlopeOffset{eps};
      return sample_initial(spec, s.n, s.psi);
    };
    band = analytic_band(s, family(0.0));
    result = empirical_threshold(model, family, lo, hi, s.integrator, s.sweep.search);
  } catch (const PreconditionError& e) {
    log << "sweep: precondition failed: " << e.what() << "\n";
    return exit_code::precondition;
  } catch (const ScenarioError& e) {
    log << "sweep: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::invalid_argument& e) {
    log << "sweep: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::exception& e) {
    log << "sweep: numerical failure: " << e.what() << "\n";
    return exit_code::failure;
  }

  write_atomic(out / "sweep.json", to_json({{"eps_star", result.eps_star},
                                            {"eps_lo", result.eps_lo},
                                            {"eps_hi", result.eps_hi},
                                            {"analytic_sub", json_number(band.sub)},
                                            {"analytic_super", json_number(band.super)},
                                            {"n_runs", static_cast<std::int64_t>(result.n_runs)}}));
  log << "sweep: eps_star = " << format_double(result.eps_star) << " in ["
      << format_double(result.eps_lo) << ", " << format_double(result.eps_hi) << "] after "
      << result.n_runs << " runs\n";
  return exit_code::ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, bool json, std::ostream& log) {
  const auto report = run_verify(suite, seed);
  if (!report) {
    log << "verify: unknown suite '" << suite << "' (expected";
    for (const auto& name : verify_suites()) log << ' ' << name;
    log << ")\n";
    return exit_code::usage;
  }
  if (json) {
    std::string text = "{\n  \"suite\": \"" + suite + "\",\n  \"passed\": " +
                       (report->passed() ? "true" : "false") + ",\n  \"checks\": [";
    for (std::size_t i = 0; i < report->checks.size(); ++i) {
      const auto& c = report->checks[i];
      std::string obj = to_json({{"suite", c.suite}, {"name", c.name}, {"passed", c.passed},
                                 {"detail", c.detail}});
      obj.pop_back();  // trailing newline
      std::string indented;
      for (char ch : obj) {
        indented += ch;
        if (ch == '\n') indented += "    ";
      }
      text += (i ? ",\n    " : "\n    ") + indented;
    }
    text += "\n  ]\n}\n";
    log << text;
  } else {
    for (const auto& c : report->checks) {
      log << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name;
      if (!c.detail.empty()) log << "  (" << c.detail << ')';
      log << '\n';
    }
    log << report->checks.size() - report->failures() << '/' << report->checks.size()
        << " checks passed\n";
  }
  return report->passed() ? exit_code::ok : exit_code::failure;
}

}  // namespace ctflow
