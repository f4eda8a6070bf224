#include "canard/odeint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace canard {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

using Vec = std::vector<double>;

class Sampler {
 public:
  Sampler(Trajectory& traj, const std::vector<double>& times) : traj_(traj), times_(times) {}

  bool every_step() const { return times_.empty(); }

  // Emit every requested time in (t_old, t_new] (or [t_old, t_new] on the first call).
  template <class Interp>
  void emit(double t_old, double t_new, const Vec& y_new, Interp&& interp, bool first) {
    while (next_ < times_.size()) {
      const double ts = times_[next_];
      if (ts > t_new) break;
      if (ts < t_old || (ts == t_old && !first)) {
        ++next_;
        continue;
      }
      push(ts, ts == t_new ? y_new : interp(ts));
      ++next_;
    }
  }

  void push(double t, Vec y) {
    for (double v : y)
      if (!std::isfinite(v)) throw NumericalError("non-finite state at t = " + format_double(t));
    traj_.times.push_back(t);
    traj_.states.push_back(std::move(y));
  }

 private:
  Trajectory& traj_;
  const std::vector<double>& times_;
  std::size_t next_ = 0;
};

void check_finite(const Vec& y, double t) {
  for (double v : y)
    if (!std::isfinite(v)) throw NumericalError("non-finite state at t = " + format_double(t));
}

double rms_norm(const Vec& v, const Vec& scale) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] / scale[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

void run_dopri(const VectorField& field, Vec y, double t, double t1, const IntegrateOptions& o, Trajectory& traj,
               Sampler& sampler) {
  const std::size_t n = y.size();
  auto rhs = [&](const Vec& x, Vec& out) {
    ++traj.meta.evaluations;
    try {
      field.eval(std::span<const double>(x), std::span<double>(out));
    } catch (const EvalError&) {
      std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
    }
  };
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n), sk(n), err(n);
  Vec r1(n), r2(n), r3(n), r4(n), r5(n);
  rhs(y, k1);
  check_finite(k1, t);

  // Initial step guess.
  for (std::size_t i = 0; i < n; ++i) sk[i] = o.atol + o.rtol * std::abs(y[i]);
  const double dn0 = rms_norm(y, sk), dn1 = rms_norm(k1, sk);
  double h = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
  h = std::min(h, o.max_step);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - k1[i];
  const double dn2 = rms_norm(err, sk) / h;
  const double dmax = std::max(dn1, dn2);
  const double h1 = !std::isfinite(dmax) ? h * 1e-3 : dmax <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dmax, 0.2);
  h = std::min({100.0 * h, h1, o.max_step, t1 - t});

  constexpr double beta = 0.04, safe = 0.9, facc1 = 5.0, facc2 = 0.1;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    if (traj.meta.accepted_steps + traj.meta.rejected_steps >= o.max_steps)
      throw NumericalError("step budget exhausted at t = " + format_double(t));
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw NumericalError("step size underflow at t = " + format_double(t) + " (h = " + format_double(h) +
                           "); the system is too stiff for the explicit integrator, epsilon values far below "
                           "the built-in defaults are out of scope");
    const bool final_step = t + h >= t1;
    if (final_step) h = t1 - t;

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(y1, k7);

    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      sk[i] = o.atol + o.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      finite = finite && std::isfinite(y1[i]) && std::isfinite(k7[i]);
    }
    const double e = finite ? rms_norm(err, sk) : std::numeric_limits<double>::infinity();
    const double fac11 = std::pow(e, expo1);

    if (e <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      facold = std::max(e, 1e-4);
      ++traj.meta.accepted_steps;

      const double t_old = t;
      const double t_new = final_step ? t1 : t + h;
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        r1[i] = y[i];
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k7[i] - bspl;
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      auto interp = [&](double ts) {
        const double th = (ts - t_old) / h, th1 = 1.0 - th;
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i)
          out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return out;
      };
      check_finite(y1, t_new);
      if (sampler.every_step()) {
        sampler.push(t_new, y1);
      } else {
        sampler.emit(t_old, t_new, y1, interp, false);
      }

      y.swap(y1);
      k1.swap(k7);
      t = t_new;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = std::min(hnew, o.max_step);
    } else {
      ++traj.meta.rejected_steps;
      last_rejected = true;
      h = std::isfinite(fac11) ? h / std::min(facc1, fac11 / safe) : h * 0.1;
    }
  }
}

void run_rk4(const VectorField& field, Vec y, double t0, double t1, const IntegrateOptions& o, Trajectory& traj,
             Sampler& sampler) {
  const std::size_t n = y.size();
  if (!(o.fixed_step > 0.0)) throw Error("fixed_step must be positive");
  auto rhs = [&](const Vec& x, Vec& out) {
    ++traj.meta.evaluations;
    try {
      field.eval(std::span<const double>(x), std::span<double>(out));
    } catch (const EvalError& e) {
      throw NumericalError(std::string("vector field evaluation failed: ") + e.what());
    }
  };
  const double span = t1 - t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / o.fixed_step - 1e-9));
  if (steps > o.max_steps) throw NumericalError("fixed-step run exceeds the step budget");
  const double h = span / static_cast<double>(steps);
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n), y1(n), f1(n);
  rhs(y, k1);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    const double t_new = s + 1 == steps ? t1 : t0 + static_cast<double>(s + 1) * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_finite(y1, t_new);
    rhs(y1, f1);
    ++traj.meta.accepted_steps;

    auto interp = [&](double ts) {
      const double th = (ts - t) / h;
      const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
      const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
      Vec out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = h00 * y[i] + h10 * h * k1[i] + h01 * y1[i] + h11 * h * f1[i];
      return out;
    };
    if (sampler.every_step()) {
      sampler.push(t_new, y1);
    } else {
      sampler.emit(t, t_new, y1, interp, false);
    }
    y.swap(y1);
    k1.swap(f1);
  }
}

}  // namespace

std::string_view to_string(OdeMethod m) {
  return m == OdeMethod::DormandPrince ? "dopri5" : "rk4";
}

std::string format_double(double v, int precision) {
  char buf[64];
  const auto res = precision > 0 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision)
                                 : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> sample_grid(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("sample spacing must be positive");
  if (t1 < t0) throw Error("sample grid end precedes start");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    if (t > t1 - 1e-9 * dt) break;
    out.push_back(t);
  }
  out.push_back(t1);
  return out;
}

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegrateOptions& opts) {
  const std::size_t n = field.dim();
  if (x0.size() != n) throw Error("initial state has dimension " + std::to_string(x0.size()) + ", field has " +
                                  std::to_string(n));
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0) throw Error("time span must be finite with t1 >= t0");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0) || !(opts.max_step > 0.0))
    throw Error("tolerances and max_step must be positive");
  for (std::size_t i = 1; i < opts.sample_times.size(); ++i)
    if (!(opts.sample_times[i] > opts.sample_times[i - 1])) throw Error("sample times must be strictly increasing");
  if (!opts.sample_times.empty() && (opts.sample_times.front() < t0 || opts.sample_times.back() > t1))
    throw Error("sample times must lie inside the integration span");

  Trajectory traj;
  traj.meta.solver = std::string(to_string(opts.method));
  traj.meta.rtol = opts.rtol;
  traj.meta.atol = opts.atol;
  traj.meta.max_step = opts.max_step;
  traj.meta.fixed_step = opts.method == OdeMethod::RK4 ? opts.fixed_step : 0.0;

  Vec y(x0.begin(), x0.end());
  check_finite(y, t0);
  Sampler sampler(traj, opts.sample_times);
  if (sampler.every_step() || opts.sample_times.front() == t0) sampler.push(t0, y);
  if (t1 == t0) return traj;
  if (!sampler.every_step()) sampler.emit(t0, t0, y, [&](double) { return y; }, false);

  if (opts.method == OdeMethod::DormandPrince) {
    run_dopri(field, y, t0, t1, opts, traj, sampler);
  } else {
    run_rk4(field, y, t0, t1, opts, traj, sampler);
  }
  return traj;
}

CanardMetrics canard_metrics(const Trajectory& traj, const SlowFastSystem& sys, std::span<const double> m,
                             double eta) {
  if (m.size() != sys.dim()) throw Error("canard_metrics: reference point has wrong dimension");
  CanardMetrics cm;
  cm.eta = eta;
  cm.closest_approach_to_m = std::numeric_limits<double>::infinity();
  std::vector<int> branch(traj.states.size(), 0);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    double d = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) d += (s[i] - m[i]) * (s[i] - m[i]);
    d = std::sqrt(d);
    if (d < cm.closest_approach_to_m) {
      cm.closest_approach_to_m = d;
      cm.closest_time = traj.times[k];
    }
    const auto [g, gy] = fold_residuals(sys, s);
    if (std::abs(g) < eta) branch[k] = gy < 0.0 ? -1 : (gy > 0.0 ? 1 : 0);
  }
  for (std::size_t k = 0; k + 1 < branch.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    cm.attracting_dwell += 0.5 * dt * ((branch[k] < 0) + (branch[k + 1] < 0));
    cm.repelling_dwell += 0.5 * dt * ((branch[k] > 0) + (branch[k + 1] > 0));
  }
  return cm;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << 't';
  for (const auto& n : traj.names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]);
    for (double v : traj.states[k]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace canard
