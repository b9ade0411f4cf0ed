#pragma once

// Scalar numerical kernels: adaptive quadrature, an embedded Runge-Kutta
// integrator, shape-preserving cubic interpolation and table inversion.

#include "cosmichist/errors.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cosmichist {

struct ToleranceSpec {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_depth = 50;

  //! Throws std::invalid_argument when rel_tol <= 0, abs_tol < 0 or max_depth < 1.
  void validate() const;

  //! Same spec with both tolerances divided by two.
  ToleranceSpec halved() const;
};

//! Tabulated function: strictly ascending abscissae, finite ordinates.
class Table1D {
public:
  Table1D() = default;
  //! Throws std::invalid_argument if the invariants do not hold.
  Table1D(std::vector<double> xs, std::vector<double> ys);

  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  std::size_t size() const noexcept { return xs_.size(); }
  bool empty() const noexcept { return xs_.empty(); }

  double x_front() const { return xs_.front(); }
  double x_back() const { return xs_.back(); }
  double y_front() const { return ys_.front(); }
  double y_back() const { return ys_.back(); }

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

using ScalarFunction = std::function<double(double)>;
using OdeRhs = std::function<double(double, double)>;

/// Adaptive Simpson quadrature of f over [a, b].
///
/// The interval is first split into a fixed number of panels so that narrow
/// features are not skipped by a lucky coarse estimate; each panel is then
/// refined until the Richardson error estimate falls under its share of
/// max(abs_tol, rel_tol * |I|).
double integrate(const ScalarFunction& f, double a, double b, const ToleranceSpec& tol = {});

/// Integral of f over [a, inf).
///
/// Maps x to u = 1/(1 + x - a) in (0, 1], then u = s^2 so that power-law tails
/// (1+x)^-p with p > 1 become bounded integrands on s in (0, 1]. The lower
/// s-limit is cut at 1e-10 (x ~ 1e20), which is far beyond where any
/// absolutely integrable tail used here contributes.
double integrate_to_infinity(const ScalarFunction& f, double a, const ToleranceSpec& tol = {});

/// Dormand-Prince 5(4) integration of dy/dt = rhs(t, y) from t0 to t1 with PI
/// step-size control. The returned table holds the accepted steps with both
/// endpoints, sorted by ascending t (so it is reversed when t1 < t0).
Table1D solve_ode(const OdeRhs& rhs, double y0, double t0, double t1, const ToleranceSpec& tol = {});

//! Final value y(t1) of solve_ode without building the table.
double solve_ode_endpoint(const OdeRhs& rhs, double y0, double t0, double t1,
                          const ToleranceSpec& tol = {});

/// Steffen's monotone cubic Hermite interpolant. C1, exact at knots, and never
/// leaves the range of the two bracketing knot values.
class MonotoneCubic {
public:
  MonotoneCubic() = default;
  explicit MonotoneCubic(Table1D table);

  double operator()(double x) const { return value(x); }
  //! Throws RangeError outside [xs.front(), xs.back()].
  double value(double x) const;
  //! Analytic derivative of the interpolant.
  double derivative(double x) const;

  //! Abscissa where the interpolant equals y; ys must be strictly monotone.
  double invert(double y) const;

  const Table1D& table() const noexcept { return table_; }
  double x_min() const { return table_.x_front(); }
  double x_max() const { return table_.x_back(); }

private:
  std::size_t segment(double x) const;
  double eval_segment(std::size_t i, double x) const;
  double deriv_segment(std::size_t i, double x) const;

  Table1D table_;
  std::vector<double> slopes_;
};

double interp_monotone(const Table1D& table, double x);

/// x with interp_monotone(table, x) == y, by bisection on the interpolant to
/// 1e-10 relative. Throws std::invalid_argument if ys is not strictly monotone
/// and RangeError if y is outside the range of ys.
double invert_monotone(const Table1D& table, double y);

//! n equally spaced values from a to b inclusive (n >= 2).
std::vector<double> linspace(double a, double b, std::size_t n);

} // namespace cosmichist
