#include "ctflow/isothermal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ctflow {

double IsoState::mass() const {
  double sum = 0.0;
  for (double r : rho) sum += r;
  return sum * dx();
}

double IsoState::momentum() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += rho[i] * u[i];
  return sum * dx();
}

IsoState make_iso_state(const std::function<double(double)>& rho0,
                        const std::function<double(double)>& u0, double L, std::size_t nx) {
  if (!(L > 0.0) || nx < 3) throw std::invalid_argument("isothermal grid needs L > 0, nx >= 3");
  IsoState state;
  state.L = L;
  state.rho.resize(nx);
  state.u.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    state.rho[i] = rho0(state.x(i));
    state.u[i] = u0(state.x(i));
    if (!(state.rho[i] > 0.0)) throw std::invalid_argument("isothermal density must be positive");
  }
  const double mass = state.mass();
  for (double& r : state.rho) r /= mass;
  return state;
}

IsoState make_bump_state(const BumpProfile& bump, double L, std::size_t nx) {
  if (!(bump.w > 0.0) || !(bump.a > -1.0)) throw std::invalid_argument("bump needs w > 0, a > -1");
  const double two_w2 = 2.0 * bump.w * bump.w;
  return make_iso_state([&](double x) { return 1.0 + bump.a * std::exp(-x * x / two_w2); },
                        [&](double x) { return -bump.b * x * std::exp(-x * x / two_w2); }, L, nx);
}

RiemannPoint riemann_forward(double rho, double u, double A, double gamma) {
  if (!(rho > 0.0)) throw std::invalid_argument("Riemann invariants need rho > 0");
  if (!(gamma >= 1.0)) throw std::invalid_argument("Riemann invariants need gamma >= 1");
  RiemannPoint p;
  const double sound = std::sqrt(A * gamma) * std::pow(rho, 0.5 * (gamma - 1.0));
  if (gamma == 1.0) {
    const double shift = std::sqrt(A) * std::log(rho);
    p.R = u - shift;
    p.S = u + shift;
  } else {
    const double shift = 2.0 * sound / (gamma - 1.0);
    p.R = u - shift;
    p.S = u + shift;
  }
  p.lambda = u - sound;
  p.mu = u + sound;
  return p;
}

std::pair<double, double> riemann_inverse(double R, double S, double A, double gamma) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("Riemann invariants need gamma >= 1");
  const double u = 0.5 * (R + S);
  if (gamma == 1.0) {
    if (!(A > 0.0)) throw std::invalid_argument("isothermal inverse needs A > 0");
    return {std::exp((S - R) / (2.0 * std::sqrt(A))), u};
  }
  if (!(S > R)) throw std::invalid_argument("Riemann inverse needs S > R (vacuum boundary)");
  const double base = (gamma - 1.0) * (S - R) / (4.0 * std::sqrt(A * gamma));
  return {std::pow(base, 2.0 / (gamma - 1.0)), u};
}

RiemannPair riemann_forward(const IsoState& state, double A, double gamma) {
  RiemannPair out;
  const std::size_t n = state.size();
  for (auto* v : {&out.R, &out.S, &out.lambda, &out.mu}) v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RiemannPoint p = riemann_forward(state.rho[i], state.u[i], A, gamma);
    out.R[i] = p.R;
    out.S[i] = p.S;
    out.lambda[i] = p.lambda;
    out.mu[i] = p.mu;
  }
  return out;
}

RSField rs_fields(const IsoState& state, const IsoConfig& cfg) {
  if (cfg.gamma != 1.0) throw std::invalid_argument("rs_fields implemented for gamma = 1");
  const std::size_t n = state.size();
  const double inv2dx = 0.5 / state.dx();
  const double root_a = std::sqrt(cfg.A);
  RSField f;
  f.r.resize(n);
  f.s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = (i + n - 1) % n;
    const std::size_t r = (i + 1) % n;
    const double dxu = (state.u[r] - state.u[l]) * inv2dx;
    const double dlog = (state.rho[r] - state.rho[l]) * inv2dx / state.rho[i];
    f.r[i] = dxu - root_a * dlog + cfg.C;
    f.s[i] = dxu + root_a * dlog + cfg.C;
  }
  return f;
}

namespace {

struct Conserved {
  double rho;
  double mom;
};

}  // namespace

IsoSeries solve_iso_damped(const IsoState& ic, const IsoConfig& cfg, double T) {
  if (cfg.gamma != 1.0) throw std::invalid_argument("the pressure solver covers gamma = 1 only");
  if (!(cfg.A >= 0.0) || !(cfg.C > 0.0)) throw std::invalid_argument("need A >= 0 and C > 0");
  const std::size_t n = ic.size();
  if (n < 3) throw std::invalid_argument("isothermal grid needs at least 3 cells");

  const double dx = ic.dx();
  const double sound = std::sqrt(cfg.A);
  const double A = cfg.A;
  const double C = cfg.C;

  IsoSeries series;
  series.P0 = ic.momentum();
  const double P0 = series.P0;

  std::vector<Conserved> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = {ic.rho[i], ic.rho[i] * ic.u[i]};

  auto to_state = [&](double t) {
    IsoState s;
    s.L = ic.L;
    s.t = t;
    s.rho.resize(n);
    s.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.rho[i] = q[i].rho;
      s.u[i] = q[i].mom / q[i].rho;
    }
    return s;
  };
  auto totals = [&]() {
    double m = 0.0;
    double p = 0.0;
    for (const auto& c : q) {
      m += c.rho;
      p += c.mom;
    }
    return std::pair{m * dx, p * dx};
  };

  series.snapshots.push_back(to_state(0.0));
  auto [m0, p0] = totals();
  series.times.push_back(0.0);
  series.mass.push_back(m0);
  series.momentum.push_back(p0);
  series.source.push_back(0.0);

  std::vector<Conserved> flux(n);  // flux[i] through the face between i and i+1
  double t = 0.0;
  double injected = 0.0;
  std::size_t since_snapshot = 0;
  while (t < T) {
    double speed = 0.0;
    for (const auto& c : q) speed = std::max(speed, std::abs(c.mom / c.rho) + sound);
    double dt = cfg.cfl * dx / speed;
    const bool last = t + dt >= T;
    if (last) dt = T - t;

    for (std::size_t i = 0; i < n; ++i) {
      const Conserved& a = q[i];
      const Conserved& b = q[(i + 1) % n];
      const double ua = a.mom / a.rho;
      const double ub = b.mom / b.rho;
      const double alpha = std::sqrt(ua * ua + ub * ub + A) + sound;
      flux[i].rho = 0.5 * (a.mom + b.mom) - 0.5 * alpha * (b.rho - a.rho);
      flux[i].mom = 0.5 * ((a.mom * ua + A * a.rho) + (b.mom * ub + A * b.rho)) -
                    0.5 * alpha * (b.mom - a.mom);
    }
    const double ratio = dt / dx;
    double step_source = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Conserved& left = flux[(i + n - 1) % n];
      const Conserved& right = flux[i];
      q[i].rho -= ratio * (right.rho - left.rho);
      q[i].mom -= ratio * (right.mom - left.mom);

      // relaxation toward the frozen mean momentum, explicit midpoint
      const double rho = q[i].rho;
      const double half = q[i].mom + 0.5 * dt * C * (rho * P0 - q[i].mom);
      const double delta = dt * C * (rho * P0 - half);
      q[i].mom += delta;
      step_source += delta;
    }
    t = last ? T : t + dt;
    ++series.steps;

    for (std::size_t i = 0; i < n; ++i) {
      if (!(q[i].rho >= cfg.rho_min)) {
        std::ostringstream msg;
        msg << "isothermal solver: density " << q[i].rho << " below rho_min at cell " << i
            << " (t = " << t << ")";
        throw std::runtime_error(msg.str());
      }
    }

    injected += step_source * dx;
    auto [m, p] = totals();
    series.times.push_back(t);
    series.mass.push_back(m);
    series.momentum.push_back(p);
    series.source.push_back(injected);
    if (++since_snapshot == std::max<std::size_t>(cfg.snapshot_every, 1) || last) {
      series.snapshots.push_back(to_state(t));
      since_snapshot = 0;
    }
  }
  return series;
}

InvariantRegion monitor_invariant_region(const IsoSeries& series, const IsoConfig& cfg) {
  if (series.snapshots.empty()) throw std::invalid_argument("empty isothermal series");
  InvariantRegion out;
  const RSField initial = rs_fields(series.snapshots.front(), cfg);
  double norm0 = 0.0;
  for (std::size_t i = 0; i < initial.r.size(); ++i) {
    norm0 = std::max({norm0, std::abs(initial.r[i]), std::abs(initial.s[i])});
  }
  out.m0 = std::max(norm0, 2.0 * cfg.C);
  out.min_rs = std::min(*std::min_element(initial.r.begin(), initial.r.end()),
                        *std::min_element(initial.s.begin(), initial.s.end()));
  out.max_rs = std::max(*std::max_element(initial.r.begin(), initial.r.end()),
                        *std::max_element(initial.s.begin(), initial.s.end()));

  const double root_a = std::sqrt(cfg.A);
  double third = 0.0;
  for (const IsoState& state : series.snapshots) {
    const RSField f = rs_fields(state, cfg);
    for (std::size_t i = 0; i < f.r.size(); ++i) {
      out.min_rs = std::min({out.min_rs, f.r[i], f.s[i]});
      out.max_rs = std::max({out.max_rs, f.r[i], f.s[i]});
    }
    const std::size_t n = state.size();
    const double h3 = std::pow(state.dx(), 3);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = (i + n - 2) % n;
      const std::size_t b = (i + n - 1) % n;
      const std::size_t c = (i + 1) % n;
      const std::size_t d = (i + 2) % n;
      const double u3 = (state.u[d] - 2.0 * state.u[c] + 2.0 * state.u[b] - state.u[a]) / (2.0 * h3);
      const double r3 =
          (state.rho[d] - 2.0 * state.rho[c] + 2.0 * state.rho[b] - state.rho[a]) / (2.0 * h3);
      third = std::max({third, std::abs(u3), root_a * std::abs(r3 / state.rho[i])});
    }
  }
  const double dx = series.snapshots.front().dx();
  out.tol_fd = 10.0 * dx * dx * third;
  return out;
}

LocalRS rs_local_ode(double r0, double s0, double C, double T, double dt, double cap) {
  if (!std::isfinite(r0) || !std::isfinite(s0)) throw std::invalid_argument("rs_local_ode: non-finite input");
  if (!(dt > 0.0)) throw std::invalid_argument("rs_local_ode: dt must be positive");
  auto f = [C](double r, double s) {
    return std::pair{-0.5 * r * r - 0.5 * r * s + C * r, -0.5 * s * s - 0.5 * r * s + C * s};
  };
  LocalRS out{r0, s0, r0, r0, s0, s0, false, 0.0};
  double t = 0.0;
  double r = r0;
  double s = s0;
  while (t < T) {
    const double h = std::min(dt, T - t);
    const auto [a1, b1] = f(r, s);
    const auto [a2, b2] = f(r + 0.5 * h * a1, s + 0.5 * h * b1);
    const auto [a3, b3] = f(r + 0.5 * h * a2, s + 0.5 * h * b2);
    const auto [a4, b4] = f(r + h * a3, s + h * b3);
    r += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    s += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    t = (h == T - t) ? T : t + h;
    out.min_r = std::min(out.min_r, r);
    out.max_r = std::max(out.max_r, r);
    out.min_s = std::min(out.min_s, s);
    out.max_s = std::max(out.max_s, s);
    if (!std::isfinite(r) || !std::isfinite(s) || std::abs(r) >= cap || std::abs(s) >= cap) {
      out.blew_up = true;
      break;
    }
  }
  out.r = r;
  out.s = s;
  out.t_end = t;
  return out;
}

}  // namespace ctflow
