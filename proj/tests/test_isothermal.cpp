#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ctflow/isothermal.hpp"
#include "ctflow/thresholds.hpp"
#include "oracles.hpp"

using namespace ctflow;

namespace {

IsoState uniform_state(double L, std::size_t nx, double u) {
  IsoState st;
  st.L = L;
  st.rho.assign(nx, 1.0 / L);
  st.u.assign(nx, u);
  return st;
}

IsoConfig config(double A, double C, std::size_t nx = 128, double L = 40.0) {
  IsoConfig cfg;
  cfg.A = A;
  cfg.C = C;
  cfg.nx = nx;
  cfg.L = L;
  return cfg;
}

}  // namespace

TEST_CASE("Riemann invariant examples") {
  const auto p = riemann_forward(1.0, 0.0, 1.0, 1.0);
  CHECK(p.R == 0.0);
  CHECK(p.S == 0.0);
  CHECK(p.lambda == -1.0);
  CHECK(p.mu == 1.0);

  const auto q = riemann_forward(1.0, 3.0, 1.0, 2.0);
  CHECK(q.R == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)));
  CHECK(q.S == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)));

  for (double A : {0.5, 1.0, 4.0}) {
    const auto [rho, u] = riemann_inverse(0.7, 0.7, A, 1.0);
    CHECK(rho == 1.0);
    CHECK(u == 0.7);
  }
  const auto [rho2, u2] = riemann_inverse(0.0, 4.0 * std::log(2.0), 4.0, 1.0);
  CHECK(rho2 == doctest::Approx(2.0));
  CHECK(u2 == doctest::Approx(2.0 * std::log(2.0)));

  CHECK_THROWS_AS(riemann_forward(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(riemann_forward(-1.0, 1.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(riemann_inverse(1.0, 1.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(riemann_inverse(2.0, 1.0, 1.0, 1.4), std::invalid_argument);
}

TEST_CASE("Riemann roundtrip and ordering on random states") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> lr(-3.0, 3.0), uu(-5.0, 5.0), aa(0.1, 4.0);
  for (double gamma : {1.0, 1.4, 2.0}) {
    for (int k = 0; k < 1000; ++k) {
      const double rho = std::exp(lr(gen)), u = uu(gen), A = aa(gen);
      const auto p = riemann_forward(rho, u, A, gamma);
      const auto [r2, u2] = riemann_inverse(p.R, p.S, A, gamma);
      CHECK(std::abs(r2 - rho) <= 1e-12 * std::max(1.0, rho));
      CHECK(std::abs(u2 - u) <= 1e-12 * std::max(1.0, std::abs(u)));
      CHECK(p.lambda <= u);
      CHECK(u <= p.mu);
      const double spread = 2.0 * std::sqrt(A * gamma) * std::pow(rho, 0.5 * (gamma - 1.0));
      CHECK(p.mu - p.lambda == doctest::Approx(spread).epsilon(1e-13));
      if (gamma == 1.0) {
        CHECK(p.S - p.R == doctest::Approx(2.0 * std::sqrt(A) * std::log(rho)).epsilon(1e-12).scale(1.0));
      } else {
        CHECK(p.S > p.R);
      }
    }
  }
}

TEST_CASE("initial states are normalized") {
  const auto st = make_bump_state({}, 40.0, 256);
  CHECK(st.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.size() == 256);
  CHECK(st.x(0) == doctest::Approx(-20.0 + 40.0 / 512.0));
  CHECK(std::abs(st.momentum()) <= 1e-15);  // odd velocity, even density

  const auto gen = make_iso_state([](double x) { return 2.0 + std::cos(x); }, [](double) { return 0.3; },
                                  2.0 * M_PI, 64);
  CHECK(gen.mass() == doctest::Approx(1.0));
  CHECK(gen.momentum() == doctest::Approx(0.3));
  CHECK_THROWS_AS(make_iso_state([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_bump_state({0.5, 0.0, 0.5}, 40.0, 64), std::invalid_argument);
}

TEST_CASE("constant state is stationary") {
  const auto st = uniform_state(40.0, 128, 0.35);
  auto cfg = config(1.0, 2.0);
  const auto series = solve_iso_damped(st, cfg, 2.0);
  const auto& end = series.snapshots.back();
  CHECK(end.t == doctest::Approx(2.0));
  for (std::size_t i = 0; i < end.size(); ++i) {
    CHECK(std::abs(end.rho[i] - st.rho[i]) <= 1e-15);
    CHECK(std::abs(end.u[i] - 0.35) <= 1e-14);
  }
  const auto rs = rs_fields(st, cfg);
  for (std::size_t i = 0; i < st.size(); ++i) {
    CHECK(rs.r[i] == 2.0);
    CHECK(rs.s[i] == 2.0);
  }
  const auto region = monitor_invariant_region(series, cfg);
  CHECK(region.min_rs == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(region.max_rs == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(region.m0 == 4.0);
}

TEST_CASE("conservation with and without the source") {
  auto cfg = config(1.0, 2.0, 256);
  cfg.snapshot_every = 50;
  auto ic = make_bump_state({}, 40.0, 256);
  for (auto& v : ic.u) v += 0.2;  // nonzero mean momentum
  const auto series = solve_iso_damped(ic, cfg, 4.0);
  CHECK(series.P0 == doctest::Approx(ic.momentum()));
  REQUIRE(series.mass.size() == series.times.size());
  for (std::size_t k = 0; k < series.mass.size(); ++k) {
    CHECK(std::abs(series.mass[k] - series.mass.front()) <= 1e-10);
    CHECK(std::abs(series.momentum[k] - series.momentum.front() - series.source[k]) <= 1e-8);
  }
  CHECK(series.snapshots.back().t == doctest::Approx(4.0));
  CHECK(series.steps + 1 == series.times.size());
}

TEST_CASE("strong damping contracts the velocity toward the mean momentum") {
  auto cfg = config(1.0, 20.0, 256);
  cfg.snapshot_every = 10;
  const auto ic = make_bump_state({0.5, 2.0, 1.0}, 40.0, 256);
  const auto series = solve_iso_damped(ic, cfg, 0.5);
  auto spread = [&](const IsoState& st) {
    double m = 0.0;
    for (double u : st.u) m = std::max(m, std::abs(u - series.P0));
    return m;
  };
  double prev = spread(series.snapshots.front());
  for (std::size_t k = 1; k < series.snapshots.size(); ++k) {
    const double now = spread(series.snapshots[k]);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("solver preconditions") {
  auto cfg = config(1.0, 2.0, 64);
  const auto ic = make_bump_state({}, 40.0, 64);
  cfg.gamma = 1.4;
  CHECK_THROWS_AS(solve_iso_damped(ic, cfg, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rs_fields(ic, cfg), std::invalid_argument);
  cfg.gamma = 1.0;
  cfg.rho_min = 1.0;  // far above every cell density
  CHECK_THROWS_AS(solve_iso_damped(ic, cfg, 1.0), std::runtime_error);
}

TEST_CASE("r and s identities") {
  const auto cfg = config(1.0, 2.0, 256);
  const auto st = make_bump_state({}, 40.0, 256);
  const auto rs = rs_fields(st, cfg);
  const std::size_t n = st.size();
  const double dx = st.dx();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double dudx = (st.u[ip] - st.u[im]) / (2.0 * dx);
    const double dlogr = (st.rho[ip] - st.rho[im]) / (2.0 * dx) / st.rho[i];
    CHECK(rs.r[i] + rs.s[i] - 4.0 == doctest::Approx(2.0 * dudx).scale(1.0).epsilon(1e-12));
    CHECK(rs.s[i] - rs.r[i] == doctest::Approx(2.0 * dlogr).scale(1.0).epsilon(1e-3));
  }
}

TEST_CASE("the subcritical boundary gives a zero of r") {
  // ρ = e^{αx}, u = βx with β = −C + √A α: the boundary of the subcritical set
  const double A = 1.0, C = 2.0, alpha = 0.3, beta = -C + std::sqrt(A) * alpha;
  IsoState st;
  st.L = 4.0;
  for (std::size_t i = 0; i < 16; ++i) {
    st.rho.push_back(1.0);
    st.u.push_back(0.0);
  }
  for (std::size_t i = 0; i < 16; ++i) {
    st.rho[i] = std::exp(alpha * st.x(i));
    st.u[i] = beta * st.x(i);
  }
  CHECK(classify_isothermal(beta, alpha * st.rho[8], st.rho[8], A, C).verdict == Verdict::Subcritical);
  const auto rs = rs_fields(st, config(A, C, 16, 4.0));
  // centred differences of e^{αx} carry the factor sinh(αΔx)/(αΔx)
  const double h = st.dx();
  const double discrete = std::sqrt(A) * alpha * (1.0 - std::sinh(alpha * h) / (alpha * h));
  for (std::size_t i = 1; i + 1 < 16; ++i) {
    CHECK(std::min(rs.r[i], rs.s[i]) == doctest::Approx(discrete).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(discrete) <= alpha * alpha * alpha * h * h);
  }
}

TEST_CASE("invariant region on a short subcritical run") {
  auto cfg = config(1.0, 2.0, 256);
  cfg.snapshot_every = 10;
  const auto ic = make_bump_state({}, 40.0, 256);
  const auto rs0 = rs_fields(ic, cfg);
  for (std::size_t i = 0; i < ic.size(); ++i) {
    REQUIRE(rs0.r[i] > 0.0);
    REQUIRE(rs0.r[i] <= 4.0);
    REQUIRE(rs0.s[i] > 0.0);
    REQUIRE(rs0.s[i] <= 4.0);
  }
  const auto series = solve_iso_damped(ic, cfg, 3.0);
  const auto region = monitor_invariant_region(series, cfg);
  CHECK(region.m0 == 4.0);
  CHECK(region.tol_fd > 0.0);
  CHECK(region.min_rs >= -region.tol_fd);
  CHECK(region.max_rs <= 2.0 * cfg.C + region.tol_fd);
}

TEST_CASE("local r-s system") {
  const auto zero = rs_local_ode(0.0, 0.0, 2.0, 10.0);
  CHECK(zero.r == 0.0);
  CHECK(zero.s == 0.0);
  CHECK_FALSE(zero.blew_up);

  const auto top = rs_local_ode(4.0, 4.0, 2.0, 5.0);
  CHECK(top.r < 4.0);
  CHECK(top.s < 4.0);
  CHECK(top.min_r >= 0.0);
  CHECK(top.max_r <= 4.0);

  CHECK_THROWS_AS(rs_local_ode(NAN, 0.0, 1.0, 1.0), std::invalid_argument);

  const double C = 1.5;
  const std::function<std::array<double, 2>(const std::array<double, 2>&)> f =
      [C](const std::array<double, 2>& y) {
        return std::array<double, 2>{-0.5 * y[0] * y[0] - 0.5 * y[0] * y[1] + C * y[0],
                                     -0.5 * y[1] * y[1] - 0.5 * y[0] * y[1] + C * y[1]};
      };
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      const double r0 = 0.4 * a, s0 = 0.4 * b;
      const double m0 = std::max({r0, s0, 2.0 * C});
      const auto path = rs_local_ode(r0, s0, C, 8.0);
      CHECK_FALSE(path.blew_up);
      CHECK(path.min_r >= 0.0);
      CHECK(path.min_s >= 0.0);
      CHECK(path.max_r <= m0 + 1e-12);
      CHECK(path.max_s <= m0 + 1e-12);
      const auto ref = oracle::rk4<2>(f, {r0, s0}, 8.0, 32000);
      CHECK(path.r == doctest::Approx(ref[0]).epsilon(1e-9).scale(1.0));
      CHECK(path.s == doctest::Approx(ref[1]).epsilon(1e-9).scale(1.0));
    }
  }
}
