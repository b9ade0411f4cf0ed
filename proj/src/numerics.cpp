#include "cosmichist/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cosmichist {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace

IntegrationError::IntegrationError(Kind kind, double where, double best_estimate,
                                   const std::string& what)
    : NumericalError(what), kind_(kind), abscissa_(where), best_estimate_(best_estimate) {}

OdeError::OdeError(Kind kind, double where, const std::string& what)
    : NumericalError(what), kind_(kind), location_(where) {}

RangeError::RangeError(double value, double lo, double hi, const std::string& what)
    : std::out_of_range(what + ": " + fmt_double(value) + " outside [" + fmt_double(lo) + ", " +
                        fmt_double(hi) + "]"),
      value_(value), lower_(lo), upper_(hi) {}

void ToleranceSpec::validate() const {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol))
    throw std::invalid_argument("rel_tol must be > 0");
  if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol))
    throw std::invalid_argument("abs_tol must be >= 0");
  if (max_depth < 1)
    throw std::invalid_argument("max_depth must be >= 1");
}

ToleranceSpec ToleranceSpec::halved() const {
  ToleranceSpec t = *this;
  t.rel_tol *= 0.5;
  t.abs_tol *= 0.5;
  return t;
}

Table1D::Table1D(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size())
    throw std::invalid_argument("Table1D: xs and ys differ in length");
  if (xs_.size() < 2)
    throw std::invalid_argument("Table1D: at least two points required");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i]))
      throw std::invalid_argument("Table1D: non-finite entry at index " + std::to_string(i));
    if (i > 0 && !(xs_[i] > xs_[i - 1]))
      throw std::invalid_argument("Table1D: xs not strictly increasing at index " +
                                  std::to_string(i));
  }
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

constexpr int kInitialPanels = 16;

class Simpson {
public:
  Simpson(const ScalarFunction& f, int max_depth) : f_(f), max_depth_(max_depth) {}

  double eval(double x) {
    const double v = f_(x);
    if (!std::isfinite(v))
      throw IntegrationError(IntegrationError::Kind::non_finite, x,
                             std::numeric_limits<double>::quiet_NaN(),
                             "integrand is not finite at x = " + fmt_double(x));
    return v;
  }

  double refine(double a, double fa, double m, double fm, double b, double fb, double whole,
                double eps, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double sum = left + right;
    const double delta = sum - whole;

    if (std::fabs(delta) <= 15.0 * eps ||
        std::fabs(delta) <= 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(sum) ||
        std::fabs(delta) < std::numeric_limits<double>::min())
      return sum + delta / 15.0;
    if (depth >= max_depth_ || lm <= a || rm >= b) {
      exhausted_ = true;
      return sum + delta / 15.0;
    }
    return refine(a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1) +
           refine(m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1);
  }

  bool exhausted() const noexcept { return exhausted_; }

private:
  const ScalarFunction& f_;
  int max_depth_;
  bool exhausted_ = false;
};

} // namespace

double integrate(const ScalarFunction& f, double a, double b, const ToleranceSpec& tol) {
  tol.validate();
  if (!(a < b))
    throw std::invalid_argument("integrate: require a < b");

  Simpson simpson(f, tol.max_depth);
  constexpr int n = 2 * kInitialPanels;
  const double h = (b - a) / n;
  std::array<double, n + 1> xs{};
  std::array<double, n + 1> fs{};
  for (int i = 0; i <= n; ++i) {
    xs[i] = (i == n) ? b : a + i * h;
    fs[i] = simpson.eval(xs[i]);
  }

  std::array<double, kInitialPanels> coarse{};
  double estimate = 0.0;
  double l1 = 0.0;
  for (int p = 0; p < kInitialPanels; ++p) {
    const int i = 2 * p;
    coarse[p] = (xs[i + 2] - xs[i]) / 6.0 * (fs[i] + 4.0 * fs[i + 1] + fs[i + 2]);
    estimate += coarse[p];
    l1 += (xs[i + 2] - xs[i]) / 6.0 *
          (std::fabs(fs[i]) + 4.0 * std::fabs(fs[i + 1]) + std::fabs(fs[i + 2]));
  }

  auto run = [&](double target) {
    double total = 0.0;
    for (int p = 0; p < kInitialPanels; ++p) {
      const int i = 2 * p;
      const double share = target * (xs[i + 2] - xs[i]) / (b - a);
      total += simpson.refine(xs[i], fs[i], xs[i + 1], fs[i + 1], xs[i + 2], fs[i + 2], coarse[p],
                              share, 1);
    }
    return total;
  };
  auto target_for = [&](double value) {
    return std::max(tol.abs_tol, tol.rel_tol * std::max(std::fabs(value), 1e-6 * l1));
  };

  double target = target_for(estimate);
  double result = run(target);
  // The coarse estimate can overshoot badly for peaked integrands; tighten once.
  if (target_for(result) < 0.5 * target) {
    target = target_for(result);
    result = run(target);
  }
  if (simpson.exhausted())
    throw IntegrationError(IntegrationError::Kind::depth_exhausted, 0.5 * (a + b), result,
                           "adaptive Simpson reached max_depth on [" + fmt_double(a) + ", " +
                               fmt_double(b) + "], best estimate " + fmt_double(result));
  return result;
}

double integrate_to_infinity(const ScalarFunction& f, double a, const ToleranceSpec& tol) {
  constexpr double s_floor = 1e-10;
  const ScalarFunction g = [&](double s) {
    const double u = s * s;
    const double x = a - 1.0 + 1.0 / u;
    return f(x) * 2.0 / (u * s);
  };
  try {
    return integrate(g, s_floor, 1.0, tol);
  } catch (const IntegrationError& e) {
    if (e.kind() == IntegrationError::Kind::non_finite) {
      const double s = e.abscissa();
      const double x = a - 1.0 + 1.0 / (s * s);
      throw IntegrationError(e.kind(), x, e.best_estimate(),
                             "integrand is not finite at x = " + fmt_double(x));
    }
    throw;
  }
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th order weights and the embedded 4th order ones.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr long kMaxSteps = 1'000'000;

template <class OnAccept>
double dormand_prince(const OdeRhs& rhs, double y0, double t0, double t1, const ToleranceSpec& tol,
                      OnAccept&& on_accept) {
  tol.validate();
  if (t0 == t1 || !std::isfinite(t0) || !std::isfinite(t1))
    throw std::invalid_argument("solve_ode: require finite t0 != t1");
  if (!std::isfinite(y0))
    throw std::invalid_argument("solve_ode: non-finite initial value");

  auto eval = [&](double t, double y) {
    const double v = rhs(t, y);
    if (!std::isfinite(v))
      throw OdeError(OdeError::Kind::non_finite, t,
                     "ODE right-hand side is not finite at t = " + fmt_double(t));
    return v;
  };

  const double span = t1 - t0;
  const double dir = span > 0 ? 1.0 : -1.0;
  const double h_min = std::fabs(span) * 1e-14;
  constexpr double safety = 0.9, alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
  constexpr double min_factor = 0.2, max_factor = 10.0;

  double t = t0;
  double y = y0;
  double k1 = eval(t, y);
  double h = std::fabs(span) * 1e-3;
  {
    const double scale = tol.abs_tol + tol.rel_tol * std::fabs(y);
    if (k1 != 0.0 && scale > 0.0)
      h = std::min(h, 0.01 * std::max(scale / tol.rel_tol, std::fabs(y)) / std::fabs(k1) + h_min);
    h = std::max(h, 100.0 * h_min);
  }
  double err_prev = 1e-4;
  bool rejected_last = false;

  for (long step = 0; step < kMaxSteps; ++step) {
    bool last = false;
    if (h >= std::fabs(t1 - t)) {
      h = std::fabs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    const double k2 = eval(t + c2 * hs, y + hs * a21 * k1);
    const double k3 = eval(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const double k4 = eval(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = eval(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double t_new = last ? t1 : t + hs;
    const double k6 =
        eval(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = eval(t_new, y_new);
    const double err_abs = std::fabs(hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double scale = tol.abs_tol + tol.rel_tol * std::max(std::fabs(y), std::fabs(y_new));
    double err;
    if (scale > 0.0)
      err = err_abs / scale;
    else
      err = err_abs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      t = t_new;
      y = y_new;
      k1 = k7;
      on_accept(t, y);
      if (last)
        return y;
      double factor = err == 0.0 ? max_factor
                                 : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
      factor = std::clamp(factor, min_factor, max_factor);
      if (rejected_last)
        factor = std::min(factor, 1.0);
      h *= factor;
      err_prev = std::max(err, 1e-4);
      rejected_last = false;
    } else {
      const double factor =
          std::isfinite(err) ? std::max(min_factor, safety * std::pow(err, -alpha)) : min_factor;
      h *= factor;
      rejected_last = true;
    }
    if (h < h_min)
      throw OdeError(OdeError::Kind::step_underflow, t,
                     "ODE step size underflow at t = " + fmt_double(t) + " (stiff problem?)");
  }
  throw OdeError(OdeError::Kind::too_many_steps, t,
                 "ODE exceeded " + std::to_string(kMaxSteps) + " steps at t = " + fmt_double(t));
}

} // namespace

Table1D solve_ode(const OdeRhs& rhs, double y0, double t0, double t1, const ToleranceSpec& tol) {
  std::vector<double> ts{t0};
  std::vector<double> ys{y0};
  dormand_prince(rhs, y0, t0, t1, tol, [&](double t, double y) {
    ts.push_back(t);
    ys.push_back(y);
  });
  if (t1 < t0) {
    std::reverse(ts.begin(), ts.end());
    std::reverse(ys.begin(), ys.end());
  }
  return Table1D(std::move(ts), std::move(ys));
}

double solve_ode_endpoint(const OdeRhs& rhs, double y0, double t0, double t1,
                          const ToleranceSpec& tol) {
  return dormand_prince(rhs, y0, t0, t1, tol, [](double, double) {});
}

// ---------------------------------------------------------------------------
// Interpolation

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double steffen_boundary(double s0, double s1, double h0, double h1) {
  const double p = s0 * (1.0 + h0 / (h0 + h1)) - s1 * h0 / (h0 + h1);
  if (p * s0 <= 0.0)
    return 0.0;
  if (std::fabs(p) > 2.0 * std::fabs(s0))
    return 2.0 * s0;
  return p;
}

} // namespace

MonotoneCubic::MonotoneCubic(Table1D table) : table_(std::move(table)) {
  const auto xs = table_.xs();
  const auto ys = table_.ys();
  const std::size_t n = xs.size();
  if (n < 2)
    throw std::invalid_argument("MonotoneCubic: empty table");
  std::vector<double> h(n - 1), s(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    s[i] = (ys[i + 1] - ys[i]) / h[i];
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = s[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double p = (s[i - 1] * h[i] + s[i] * h[i - 1]) / (h[i - 1] + h[i]);
    slopes_[i] = (sign(s[i - 1]) + sign(s[i])) *
                 std::min({std::fabs(s[i - 1]), std::fabs(s[i]), 0.5 * std::fabs(p)});
  }
  slopes_[0] = steffen_boundary(s[0], s[1], h[0], h[1]);
  slopes_[n - 1] = steffen_boundary(s[n - 2], s[n - 3], h[n - 2], h[n - 3]);
}

std::size_t MonotoneCubic::segment(double x) const {
  const auto xs = table_.xs();
  if (!(x >= xs.front() && x <= xs.back()))
    throw RangeError(x, xs.front(), xs.back(), "interpolation argument out of range");
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto idx = static_cast<std::size_t>(it - xs.begin());
  return std::min(idx == 0 ? 0 : idx - 1, xs.size() - 2);
}

double MonotoneCubic::eval_segment(std::size_t i, double x) const {
  const auto xs = table_.xs();
  const auto ys = table_.ys();
  const double h = xs[i + 1] - xs[i];
  const double t = (x - xs[i]) / h;
  if (t == 0.0)
    return ys[i];
  if (t == 1.0)
    return ys[i + 1];
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * ys[i] + h10 * h * slopes_[i] + h01 * ys[i + 1] + h11 * h * slopes_[i + 1];
}

double MonotoneCubic::deriv_segment(std::size_t i, double x) const {
  const auto xs = table_.xs();
  const auto ys = table_.ys();
  const double h = xs[i + 1] - xs[i];
  const double t = (x - xs[i]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * ys[i] + d10 * slopes_[i] + d01 * ys[i + 1] + d11 * slopes_[i + 1];
}

double MonotoneCubic::value(double x) const { return eval_segment(segment(x), x); }

double MonotoneCubic::derivative(double x) const { return deriv_segment(segment(x), x); }

double MonotoneCubic::invert(double y) const {
  const auto xs = table_.xs();
  const auto ys = table_.ys();
  const std::size_t n = ys.size();
  const bool increasing = ys[1] > ys[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (increasing ? !(ys[i + 1] > ys[i]) : !(ys[i + 1] < ys[i]))
      throw std::invalid_argument("invert_monotone: ys not strictly monotone at index " +
                                  std::to_string(i + 1));
  }
  const double lo_y = increasing ? ys.front() : ys.back();
  const double hi_y = increasing ? ys.back() : ys.front();
  if (!(y >= lo_y && y <= hi_y))
    throw RangeError(y, lo_y, hi_y, "inversion target out of range");

  // Segment i with y between ys[i] and ys[i+1].
  std::size_t i;
  if (increasing)
    i = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
  else
    i = static_cast<std::size_t>(
        std::upper_bound(ys.begin(), ys.end(), y, std::greater<>()) - ys.begin());
  i = std::min(i == 0 ? 0 : i - 1, n - 2);
  if (ys[i] == y)
    return xs[i];
  if (ys[i + 1] == y)
    return xs[i + 1];

  double lo = xs[i];
  double hi = xs[i + 1];
  const double scale = std::max(std::fabs(lo), std::fabs(hi));
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 1e-13 * scale)
      break;
    const double v = eval_segment(i, mid);
    if ((v < y) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double interp_monotone(const Table1D& table, double x) { return MonotoneCubic(table).value(x); }

double invert_monotone(const Table1D& table, double y) { return MonotoneCubic(table).invert(y); }

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2)
    throw std::invalid_argument("linspace: n must be >= 2");
  std::vector<double> out(n);
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

} // namespace cosmichist
