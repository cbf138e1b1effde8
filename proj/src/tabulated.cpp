#include "ctflow/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ctflow {

Tabulated::Tabulated(std::vector<double> xs, std::vector<double> ys,
                     Extrapolation extrapolation)
    : xs_(std::move(xs)), ys_(std::move(ys)), extrapolation_(extrapolation) {
  if (xs_.size() != ys_.size()) {
    throw std::invalid_argument("tabulated function: column lengths differ");
  }
  if (xs_.size() < 2) {
    throw std::invalid_argument("tabulated function: need at least two samples");
  }
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
      throw std::invalid_argument("tabulated function: non-finite sample");
    }
    if (i > 0 && !(xs_[i] > xs_[i - 1])) {
      throw std::invalid_argument("tabulated function: x must be strictly increasing");
    }
  }

  cumulative_.assign(xs_.size(), 0.0);
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (ys_[i] + ys_[i - 1]) * (xs_[i] - xs_[i - 1]);
  }

  const double step = (xs_.back() - xs_.front()) / static_cast<double>(xs_.size() - 1);
  uniform_ = true;
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (std::abs((xs_[i] - xs_[i - 1]) - step) > 1e-12 * std::max(1.0, std::abs(step))) {
      uniform_ = false;
      break;
    }
  }
  inv_step_ = 1.0 / step;
}

Tabulated Tabulated::load(const std::filesystem::path& path, Extrapolation extrapolation) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open table " + path.string());
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double x = 0.0;
    double y = 0.0;
    if (!(fields >> x >> y)) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected two numeric columns");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return Tabulated(std::move(xs), std::move(ys), extrapolation);
}

Tabulated Tabulated::sample(const std::function<double(double)>& f, double lo, double hi,
                            std::size_t count, Extrapolation extrapolation) {
  if (count < 2 || !(hi > lo)) {
    throw std::invalid_argument("tabulated sample: need count >= 2 and hi > lo");
  }
  std::vector<double> xs(count);
  std::vector<double> ys(count);
  const double h = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = (i + 1 == count) ? hi : lo + h * static_cast<double>(i);
    ys[i] = f(xs[i]);
  }
  return Tabulated(std::move(xs), std::move(ys), extrapolation);
}

std::size_t Tabulated::segment(double x) const {
  // Caller guarantees front() <= x <= back().
  const std::size_t last = xs_.size() - 2;
  if (uniform_) {
    const auto i = static_cast<std::size_t>((x - xs_.front()) * inv_step_);
    return std::min(i, last);
  }
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const auto i = static_cast<std::size_t>(std::distance(xs_.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, last);
}

double Tabulated::operator()(double x) const {
  if (x <= xs_.front() || x >= xs_.back()) {
    if (x == xs_.front()) return ys_.front();
    if (x == xs_.back()) return ys_.back();
    if (extrapolation_ == Extrapolation::Zero) return 0.0;
    return x < xs_.front() ? ys_.front() : ys_.back();
  }
  const std::size_t i = segment(x);
  const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + w * (ys_[i + 1] - ys_[i]);
}

double Tabulated::slope(double x) const {
  if (x < xs_.front() || x > xs_.back()) return 0.0;
  auto seg_slope = [this](std::size_t i) {
    return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
  };
  const std::size_t i = segment(x);
  if (x == xs_[i] && i > 0) return 0.5 * (seg_slope(i - 1) + seg_slope(i));
  if (x == xs_[i + 1] && i + 2 < xs_.size()) return 0.5 * (seg_slope(i) + seg_slope(i + 1));
  return seg_slope(i);
}

double Tabulated::integral_from_front(double x) const {
  if (x <= xs_.front()) {
    const double tail = extrapolation_ == Extrapolation::Zero ? 0.0 : ys_.front();
    return tail * (x - xs_.front());
  }
  if (x >= xs_.back()) {
    const double tail = extrapolation_ == Extrapolation::Zero ? 0.0 : ys_.back();
    return cumulative_.back() + tail * (x - xs_.back());
  }
  const std::size_t i = segment(x);
  const double y = (*this)(x);
  return cumulative_[i] + 0.5 * (ys_[i] + y) * (x - xs_[i]);
}

double Tabulated::integral(double a, double b) const {
  return integral_from_front(b) - integral_from_front(a);
}

double Tabulated::min_value() const { return *std::min_element(ys_.begin(), ys_.end()); }
double Tabulated::max_value() const { return *std::max_element(ys_.begin(), ys_.end()); }

}  // namespace ctflow
