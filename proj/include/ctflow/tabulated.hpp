#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace ctflow {

/// Piecewise-linear function through (x, value) samples with strictly
/// increasing abscissae. Outside the sampled range the value is either held
/// at the nearest end sample or set to zero.
class Tabulated {
 public:
  enum class Extrapolation { Constant, Zero };

  Tabulated(std::vector<double> xs, std::vector<double> ys,
            Extrapolation extrapolation = Extrapolation::Constant);

  /// Reads two whitespace- or comma-separated numeric columns. Lines that are
  /// blank or start with '#' are skipped.
  static Tabulated load(const std::filesystem::path& path,
                        Extrapolation extrapolation = Extrapolation::Constant);

  /// Samples f on a uniform grid of `count` points over [lo, hi].
  static Tabulated sample(const std::function<double(double)>& f, double lo,
                          double hi, std::size_t count,
                          Extrapolation extrapolation = Extrapolation::Constant);

  double operator()(double x) const;

  /// Slope of the interpolant; at interior nodes the mean of both sides.
  double slope(double x) const;

  /// Exact integral of the interpolant (including extrapolated parts) over [a, b].
  double integral(double a, double b) const;

  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  double front() const { return xs_.front(); }
  double back() const { return xs_.back(); }
  Extrapolation extrapolation() const { return extrapolation_; }
  double min_value() const;
  double max_value() const;

 private:
  std::size_t segment(double x) const;
  double integral_from_front(double x) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> cumulative_;  // ∫ from xs_.front() to xs_[i]
  Extrapolation extrapolation_;
  bool uniform_ = false;
  double inv_step_ = 0.0;
};

}  // namespace ctflow
