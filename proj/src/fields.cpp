#include "ctflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ctflow {

namespace {

void require_mirror_symmetric(const Tabulated& t, double parity, const char* what) {
  const auto xs = t.xs();
  const auto ys = t.ys();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] >= 0.0) break;
    if (-xs[i] > t.back()) continue;
    const double mirrored = parity * t(-xs[i]);
    if (std::abs(ys[i] - mirrored) > 1e-12 * std::max(1.0, std::abs(ys[i]))) {
      throw std::invalid_argument(std::string(what) + ": samples violate the required parity");
    }
  }
}

Tabulated with_extrapolation(const Tabulated& t, Tabulated::Extrapolation e) {
  return Tabulated({t.xs().begin(), t.xs().end()}, {t.ys().begin(), t.ys().end()}, e);
}

double sgn(double v) { return static_cast<double>((0.0 < v) - (v < 0.0)); }

}  // namespace

// ---------------------------------------------------------------------------
// InfluenceFunction

InfluenceFunction::InfluenceFunction(Kind kind, double parameter, double psi_m, double psi_M,
                                     std::optional<Tabulated> table)
    : kind_(kind), parameter_(parameter), psi_m_(psi_m), psi_M_(psi_M), table_(std::move(table)) {}

InfluenceFunction InfluenceFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("constant influence function needs c > 0");
  }
  return {Kind::Constant, c, c, c, std::nullopt};
}

InfluenceFunction InfluenceFunction::cucker_smale(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("Cucker-Smale exponent must be >= 0");
  }
  // inf over the real line is zero unless the kernel is flat
  const double lower = gamma == 0.0 ? 1.0 : 0.0;
  return {Kind::CuckerSmale, gamma, lower, 1.0, std::nullopt};
}

InfluenceFunction InfluenceFunction::tabulated(Tabulated table) {
  if (table.front() < 0.0) require_mirror_symmetric(table, 1.0, "influence table");
  if (table.min_value() < 0.0) {
    throw std::invalid_argument("influence table has negative samples");
  }
  if (!(table.max_value() > 0.0)) {
    throw std::invalid_argument("influence table must be positive somewhere");
  }
  const double lo = table.min_value();
  const double hi = table.max_value();
  return {Kind::Tabulated, 0.0, lo, hi,
          with_extrapolation(table, Tabulated::Extrapolation::Constant)};
}

double InfluenceFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return parameter_;
    case Kind::CuckerSmale: {
      const double base = 1.0 + x * x;
      if (parameter_ == 1.0) return 1.0 / base;
      if (parameter_ == 0.5) return 1.0 / std::sqrt(base);
      if (parameter_ == 0.0) return 1.0;
      return std::pow(base, -parameter_);
    }
    case Kind::Tabulated:
      return std::clamp((*table_)(std::abs(x)), psi_m_, psi_M_);
  }
  return 0.0;
}

double InfluenceFunction::antiderivative(double x) const {
  const double ax = std::abs(x);
  double value = 0.0;
  switch (kind_) {
    case Kind::Constant:
      return parameter_ * x;
    case Kind::CuckerSmale:
      if (parameter_ == 1.0) return std::atan(x);
      if (parameter_ == 0.5) return std::asinh(x);
      if (parameter_ == 0.0) return x;
      if (ax == 0.0) return 0.0;
      value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [this](double y) { return (*this)(y); }, 0.0, ax, 15, 1e-14);
      break;
    case Kind::Tabulated:
      value = table_->integral(0.0, ax);
      break;
  }
  return x < 0.0 ? -value : value;
}

// ---------------------------------------------------------------------------
// InteractionPotential

InteractionPotential::InteractionPotential(Kind kind, double k, std::optional<Tabulated> kprime,
                                           std::optional<Tabulated> kpp, double bound)
    : kind_(kind), k_(k), kprime_(std::move(kprime)), kpp_(std::move(kpp)), bound_(bound) {}

InteractionPotential InteractionPotential::none() {
  return {Kind::None, 0.0, std::nullopt, std::nullopt, 0.0};
}

InteractionPotential InteractionPotential::newtonian(double k) {
  if (!std::isfinite(k)) throw std::invalid_argument("Newtonian strength must be finite");
  return {Kind::Newtonian, k, std::nullopt, std::nullopt, 0.0};
}

InteractionPotential InteractionPotential::smooth(Tabulated kprime, Tabulated kpp) {
  if (kprime.front() < 0.0) require_mirror_symmetric(kprime, -1.0, "K' table");
  if (kpp.front() < 0.0) require_mirror_symmetric(kpp, 1.0, "K'' table");
  const double bound = std::max(std::abs(kpp.min_value()), std::abs(kpp.max_value()));
  return {Kind::Smooth, 0.0, with_extrapolation(kprime, Tabulated::Extrapolation::Constant),
          with_extrapolation(kpp, Tabulated::Extrapolation::Zero), bound};
}

double InteractionPotential::kprime(double x) const {
  if (kind_ != Kind::Smooth) throw std::logic_error("K' is only tabulated for smooth potentials");
  if (x == 0.0) return 0.0;
  return sgn(x) * (*kprime_)(std::abs(x));
}

double InteractionPotential::kpp(double x) const {
  if (kind_ != Kind::Smooth) throw std::logic_error("K'' is only tabulated for smooth potentials");
  return (*kpp_)(std::abs(x));
}

// ---------------------------------------------------------------------------
// ParticleEnsemble

void ParticleEnsemble::resize(std::size_t n) {
  for (auto* v : {&x, &u, &rho, &d, &m, &I}) v->assign(n, 0.0);
}

double ParticleEnsemble::total_mass() const { return std::accumulate(m.begin(), m.end(), 0.0); }

double ParticleEnsemble::momentum() const {
  double p = 0.0;
  for (std::size_t i = 0; i < size(); ++i) p += m[i] * u[i];
  return p;
}

// ---------------------------------------------------------------------------
// Initial data

namespace {

struct DensityQuantile {
  double operator()(const GaussianDensity& g) const {
    return boost::math::quantile(boost::math::normal(g.center, g.width), q);
  }
  double operator()(const UniformDensity& u) const { return u.a + (u.b - u.a) * q; }
  double operator()(const TabulatedDensity& t) const {
    const auto xs = t.table.xs();
    const auto ys = t.table.ys();
    const double target = q * t.table.integral(xs.front(), xs.back());
    // locate the segment where the cumulative mass crosses the target
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double h = xs[i + 1] - xs[i];
      const double seg = 0.5 * (ys[i] + ys[i + 1]) * h;
      if (cum + seg >= target || i + 2 == xs.size()) {
        const double need = std::max(0.0, target - cum);
        const double slope = (ys[i + 1] - ys[i]) / h;
        // y0 s + ½ slope s² = need
        double s = 0.0;
        if (std::abs(slope) < 1e-300) {
          s = need / ys[i];
        } else {
          const double disc = std::max(0.0, ys[i] * ys[i] + 2.0 * slope * need);
          s = 2.0 * need / (ys[i] + std::sqrt(disc));
        }
        return xs[i] + std::clamp(s, 0.0, h);
      }
      cum += seg;
    }
    return xs.back();
  }
  double q;
};

void validate_density(const DensityProfile& profile) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          if (!(p.width > 0.0) || !std::isfinite(p.width) || !std::isfinite(p.center)) {
            throw std::invalid_argument("Gaussian density needs a finite positive width");
          }
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          if (!(p.b > p.a) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
            throw std::invalid_argument("uniform density needs a < b");
          }
        } else {
          if (p.table.min_value() < 0.0) {
            throw std::invalid_argument("tabulated density has negative samples");
          }
          const double mass = p.table.integral(p.table.front(), p.table.back());
          if (!(mass > 0.0) || !std::isfinite(mass)) {
            throw std::invalid_argument("tabulated density is not normalizable");
          }
        }
      },
      profile);
}

}  // namespace

double density_value(const DensityProfile& profile, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          return boost::math::pdf(boost::math::normal(p.center, p.width), x);
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          return (x >= p.a && x <= p.b) ? 1.0 / (p.b - p.a) : 0.0;
        } else {
          if (x < p.table.front() || x > p.table.back()) return 0.0;
          return p.table(x) / p.table.integral(p.table.front(), p.table.back());
        }
      },
      profile);
}

ParticleEnsemble sample_initial(const InitialDataSpec& spec, std::size_t n,
                                const InfluenceFunction& psi) {
  if (n < 2) throw std::invalid_argument("sample_initial needs at least two particles");
  validate_density(spec.rho0);

  ParticleEnsemble ens;
  ens.resize(n);
  const double mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    ens.x[i] = std::visit(DensityQuantile{q}, spec.rho0);
    ens.m[i] = mass;
    ens.rho[i] = density_value(spec.rho0, ens.x[i]);
  }

  std::vector<double> conv(n);
  for (std::size_t i = 0; i < n; ++i) conv[i] = convolve_influence(ens, psi, i);

  if (const auto* offset = std::get_if<SlopeOffset>(&spec.u0)) {
    std::vector<double> anchor(n);
    for (std::size_t j = 0; j < n; ++j) anchor[j] = psi.antiderivative(-ens.x[j]);
    for (std::size_t i = 0; i < n; ++i) {
      double integral = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        integral += ens.m[j] * (psi.antiderivative(ens.x[i] - ens.x[j]) - anchor[j]);
      }
      const double dxu0 = -conv[i] + offset->eps;
      ens.u[i] = offset->eps * ens.x[i] - integral;
      ens.d[i] = dxu0 + conv[i];
    }
  } else {
    const auto& table = std::get<ExplicitVelocity>(spec.u0).u0;
    for (std::size_t i = 0; i < n; ++i) {
      ens.u[i] = table(ens.x[i]);
      ens.d[i] = table.slope(ens.x[i]) + conv[i];
    }
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Per-particle forces

double convolve_influence(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                          std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) sum += ens.m[j] * psi(ens.x[i] - ens.x[j]);
  return sum;
}

double alignment_accel(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                       std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) {
    sum += ens.m[j] * psi(ens.x[i] - ens.x[j]) * (ens.u[j] - ens.u[i]);
  }
  return sum;
}

double newtonian_accel(const ParticleEnsemble& ens, double k, std::size_t i) {
  double left = 0.0;
  double right = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) {
    if (j == i) continue;
    if (ens.x[j] < ens.x[i]) {
      left += ens.m[j];
    } else if (ens.x[j] > ens.x[i]) {
      right += ens.m[j];
    } else {
      left += 0.5 * ens.m[j];
      right += 0.5 * ens.m[j];
    }
  }
  return -k * 0.5 * (left - right);
}

double smooth_accel(const ParticleEnsemble& ens, const InteractionPotential& K, std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) sum += ens.m[j] * K.kprime(ens.x[i] - ens.x[j]);
  return -sum;
}

double convolve_kpp(const ParticleEnsemble& ens, const InteractionPotential& K, std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) sum += ens.m[j] * K.kpp(ens.x[i] - ens.x[j]);
  return sum;
}

std::vector<double> newtonian_accel_sorted(const ParticleEnsemble& ens, double k) {
  const std::size_t n = ens.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!std::is_sorted(ens.x.begin(), ens.x.end())) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ens.x[a] < ens.x[b]; });
  }

  // Group equal positions; within a group the tie masses cancel.
  std::vector<double> accel(n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s + 1;
    while (e < n && ens.x[order[e]] == ens.x[order[s]]) ++e;
    groups.emplace_back(s, e);
    s = e;
  }
  std::vector<double> below(groups.size(), 0.0);
  std::vector<double> above(groups.size(), 0.0);
  double acc = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    below[g] = acc;
    for (std::size_t s = groups[g].first; s < groups[g].second; ++s) acc += ens.m[order[s]];
  }
  acc = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    above[g] = acc;
    for (std::size_t s = groups[g].second; s-- > groups[g].first;) acc += ens.m[order[s]];
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double value = -k * 0.5 * (below[g] - above[g]);
    for (std::size_t s = groups[g].first; s < groups[g].second; ++s) accel[order[s]] = value;
  }
  return accel;
}

// ---------------------------------------------------------------------------
// Bulk evaluation

namespace {

// Visits each unordered pair once; kernel values are reused for both
// members of the pair.
template <class Kernel>
void pair_alignment(const ParticleEnsemble& ens, Kernel kernel, double self,
                    std::vector<double>& conv, std::vector<double>& align) {
  const std::size_t n = ens.size();
  const double* x = ens.x.data();
  const double* u = ens.u.data();
  const double* m = ens.m.data();
  double* cv = conv.data();
  double* al = align.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double ui = u[i];
    const double mi = m[i];
    double c_acc = 0.0;
    double a_acc = 0.0;
#pragma omp simd reduction(+ : c_acc, a_acc)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = kernel(xi - x[j]);
      const double f = w * (u[j] - ui);
      c_acc += m[j] * w;
      a_acc += m[j] * f;
      cv[j] += mi * w;
      al[j] -= mi * f;
    }
    cv[i] += c_acc + mi * self;
    al[i] += a_acc;
  }
}

}  // namespace

NonlocalTerms evaluate_nonlocal(const ParticleEnsemble& ens, const InfluenceFunction& psi,
                                const InteractionPotential& K) {
  const std::size_t n = ens.size();
  NonlocalTerms out;
  out.psi_conv.assign(n, 0.0);
  out.alignment.assign(n, 0.0);
  out.potential.assign(n, 0.0);
  out.kpp_conv.assign(n, 0.0);

  switch (psi.kind()) {
    case InfluenceFunction::Kind::Constant: {
      const double c = psi.parameter();
      double weight = 0.0;
      double weighted_u = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        weight += ens.m[j] * c;
        weighted_u += ens.m[j] * c * ens.u[j];
      }
      for (std::size_t i = 0; i < n; ++i) {
        out.psi_conv[i] = weight;
        out.alignment[i] = weighted_u - ens.u[i] * weight;
      }
      break;
    }
    case InfluenceFunction::Kind::CuckerSmale:
      if (psi.parameter() == 1.0) {
        pair_alignment(ens, [](double dx) { return 1.0 / (1.0 + dx * dx); }, 1.0,
                       out.psi_conv, out.alignment);
        break;
      }
      [[fallthrough]];
    case InfluenceFunction::Kind::Tabulated:
      pair_alignment(ens, [&psi](double dx) { return psi(dx); }, psi(0.0), out.psi_conv,
                     out.alignment);
      break;
  }

  switch (K.kind()) {
    case InteractionPotential::Kind::None:
      break;
    case InteractionPotential::Kind::Newtonian:
      out.potential = newtonian_accel_sorted(ens, K.k());
      break;
    case InteractionPotential::Kind::Smooth: {
      const double self = K.kpp(0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double f_acc = 0.0;
        double k_acc = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double dx = ens.x[i] - ens.x[j];
          const double kp = K.kprime(dx);
          const double kk = K.kpp(dx);
          f_acc += ens.m[j] * kp;
          k_acc += ens.m[j] * kk;
          out.potential[j] -= ens.m[i] * kp;
          out.kpp_conv[j] += ens.m[i] * kk;
        }
        out.potential[i] += f_acc;
        out.kpp_conv[i] += k_acc + ens.m[i] * self;
      }
      break;
    }
  }
  return out;
}

}  // namespace ctflow
