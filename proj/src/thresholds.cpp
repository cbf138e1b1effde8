#include "ctflow/thresholds.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace ctflow {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Subcritical:
      return "Subcritical";
    case Verdict::Supercritical:
      return "Supercritical";
    case Verdict::Critical:
      return "Critical";
    case Verdict::Indeterminate:
      return "Indeterminate";
  }
  return "Indeterminate";
}

Classification classify_ea(const ThresholdQuery& q) {
  const double d0 = q.d0();
  Classification c;
  c.sigma_minus = 0.0;
  c.sigma_plus = 0.0;
  if (d0 > 0.0) {
    c.verdict = Verdict::Subcritical;
  } else if (d0 < 0.0) {
    c.verdict = Verdict::Supercritical;
  } else {
    c.verdict = Verdict::Critical;
  }
  return c;
}

double sigma_minus_eap(double k, double rho0) {
  if (!(k < 0.0)) throw std::invalid_argument("sigma_minus_eap needs k < 0");
  if (rho0 < 0.0) throw std::invalid_argument("density must be nonnegative");
  return -std::sqrt(-2.0 * k * rho0);
}

double sigma_plus_residual(double sigma, double k, double rho0, double psi_bound) {
  return sigma_minus_refined_residual(sigma, k, rho0, psi_bound, psi_bound);
}

double sigma_minus_refined_residual(double sigma, double k, double rho0, double psi_m,
                                    double psi_exp) {
  const double beta = sigma / rho0;
  return 1.0 / rho0 - (k + psi_m * beta - k * std::exp(psi_exp * beta / k)) / (psi_m * psi_m);
}

namespace {

// g(0) = 1/ρ₀ > 0 and g → −∞ as σ → −∞. Expand leftward from `start` until g
// changes sign, then bisect until the bracket cannot shrink any further.
double negative_root(const std::function<double(double)>& g, double start) {
  double hi = 0.0;
  double lo = start < 0.0 ? start : -1.0;
  int doublings = 0;
  while (!(g(lo) <= 0.0)) {
    hi = lo;
    lo *= 2.0;
    if (++doublings > 64) {
      throw std::runtime_error("threshold root: no sign change within 64 doublings");
    }
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = g(mid);
    if (value == 0.0) return mid;
    if (value < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // hi keeps g > 0; pick the endpoint with the smaller residual
  return std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
}

}  // namespace

double sigma_plus_eap(double k, double rho0, double psi_bound) {
  if (!(k < 0.0)) throw std::invalid_argument("sigma_plus_eap needs k < 0");
  if (!(psi_bound > 0.0)) throw std::invalid_argument("sigma_plus_eap needs psi_M > 0");
  if (rho0 < 0.0) throw std::invalid_argument("density must be nonnegative");
  if (rho0 == 0.0) return 0.0;
  return negative_root(
      [=](double s) { return sigma_plus_residual(s, k, rho0, psi_bound); },
      sigma_minus_eap(k, rho0));
}

double sigma_minus_eap_refined(double k, double rho0, double psi_m,
                               std::optional<double> psi_exp) {
  if (!(k < 0.0)) throw std::invalid_argument("sigma_minus_eap_refined needs k < 0");
  if (!(psi_m > 0.0)) throw std::invalid_argument("sigma_minus_eap_refined needs psi_m > 0");
  if (rho0 < 0.0) throw std::invalid_argument("density must be nonnegative");
  const double exponent_bound = psi_exp.value_or(psi_m);
  if (!(exponent_bound > 0.0)) throw std::invalid_argument("psi_exp must be positive");
  if (rho0 == 0.0) return 0.0;
  return negative_root(
      [=](double s) { return sigma_minus_refined_residual(s, k, rho0, psi_m, exponent_bound); },
      sigma_minus_eap(k, rho0));
}

Classification classify_eap(const ThresholdQuery& q, double k, const EapBounds& bounds) {
  if (k == 0.0) throw std::invalid_argument("classify_eap needs k != 0; use classify_ea");
  const double d0 = q.d0();
  if (k > 0.0) {
    // A vacuum point follows the alignment-only dynamics.
    if (q.rho0 == 0.0) return classify_ea(q);
    Classification c;
    c.verdict = Verdict::Supercritical;
    return c;
  }

  Classification c;
  c.sigma_plus = sigma_plus_eap(k, q.rho0, bounds.psi_M);
  const bool refined = bounds.psi_m && *bounds.psi_m > 0.0;
  c.sigma_minus = refined ? sigma_minus_eap_refined(k, q.rho0, *bounds.psi_m, bounds.psi_exp)
                          : sigma_minus_eap(k, q.rho0);
  if (d0 > *c.sigma_plus || d0 >= 0.0) {
    c.verdict = Verdict::Subcritical;
  } else if (d0 < *c.sigma_minus) {
    c.verdict = Verdict::Supercritical;
  } else {
    c.verdict = Verdict::Indeterminate;
  }
  return c;
}

Classification classify_general(const ThresholdQuery& q, double B, PotentialSign sign) {
  if (!(B >= 0.0) || !std::isfinite(B)) {
    throw std::invalid_argument("classify_general needs a finite B >= 0");
  }
  const double d0 = q.d0();
  Classification c;
  if (sign == PotentialSign::Attractive) {
    c.sigma_minus = 0.0;
    c.verdict = d0 < 0.0 ? Verdict::Supercritical : Verdict::Indeterminate;
    return c;
  }
  c.sigma_plus = 0.0;
  c.sigma_minus = -std::sqrt(B);
  if (d0 >= 0.0) {
    c.verdict = Verdict::Subcritical;
  } else if (d0 < *c.sigma_minus) {
    c.verdict = Verdict::Supercritical;
  } else {
    c.verdict = Verdict::Indeterminate;
  }
  return c;
}

Classification classify_general_refined(const ThresholdQuery& q, double B, double psi_m,
                                        double psi_M) {
  if (!(psi_m > 0.0)) {
    throw std::invalid_argument("classify_general_refined needs psi_m > 0");
  }
  if (!(B >= 0.0) || !std::isfinite(B)) {
    throw std::invalid_argument("classify_general_refined needs a finite B >= 0");
  }
  const double d0 = q.d0();
  Classification c;
  const double disc = psi_m * psi_m - 4.0 * B;
  if (disc >= 0.0) c.sigma_plus = -(psi_m + std::sqrt(disc)) / 2.0;
  c.sigma_minus = (psi_m - std::sqrt(psi_M * psi_M + 4.0 * B)) / 2.0;

  // The two closed-form regions can overlap (for B = 0 they give d₀ ≥ −ψ_m
  // and d₀ < (ψ_m − ψ_M)/2). A point claimed by both gets no verdict.
  const bool sub = c.sigma_plus && d0 >= *c.sigma_plus;
  const bool super = d0 < *c.sigma_minus;
  if (sub && !super) {
    c.verdict = Verdict::Subcritical;
  } else if (super && !sub) {
    c.verdict = Verdict::Supercritical;
  } else {
    c.verdict = Verdict::Indeterminate;
  }
  return c;
}

Classification classify_isothermal(double dxu0, double dxrho0, double rho0, double A, double C) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("classify_isothermal needs rho0 > 0");
  if (!(A >= 0.0)) throw std::invalid_argument("classify_isothermal needs A >= 0");
  if (!(C > 0.0)) throw std::invalid_argument("classify_isothermal needs C > 0");
  Classification c;
  c.verdict = dxu0 >= -C + std::sqrt(A) * std::abs(dxrho0 / rho0) ? Verdict::Subcritical
                                                                   : Verdict::Indeterminate;
  return c;
}

}  // namespace ctflow
