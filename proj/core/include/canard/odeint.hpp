#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "canard/diffgeo.hpp"
#include "canard/slowfast.hpp"

namespace canard {

enum class OdeMethod { DormandPrince, RK4 };
std::string_view to_string(OdeMethod m);

struct IntegrateOptions {
  OdeMethod method = OdeMethod::DormandPrince;
  double rtol = 1e-9;
  double atol = 1e-11;
  double max_step = 1e-2;
  double fixed_step = 1e-3;  // RK4 only
  std::size_t max_steps = 100'000'000;
  /// Sorted output times inside [t0, t1]. Empty: every accepted step.
  std::vector<double> sample_times;
};

struct TrajectoryMeta {
  std::string solver;
  double rtol = 0.0;
  double atol = 0.0;
  double max_step = 0.0;
  double fixed_step = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t evaluations = 0;
};

struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  TrajectoryMeta meta;
};

/// t0, t0 + dt, t0 + 2 dt, ... up to t1 (t1 itself always included).
std::vector<double> sample_grid(double t0, double t1, double dt);

/// Dormand-Prince 5(4) with PI step control and 5th-order dense output, or
/// classical RK4 with a fixed step and cubic Hermite dense output.
/// NumericalError on step-size underflow or a non-finite state.
Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegrateOptions& opts = {});

struct CanardMetrics {
  double closest_approach_to_m = 0.0;
  double closest_time = 0.0;
  double attracting_dwell = 0.0;  // |g| < eta and dg/dy1 < 0
  double repelling_dwell = 0.0;   // |g| < eta and dg/dy1 > 0
  double eta = 0.05;
};

inline constexpr double kDefaultEta = 0.05;

/// Branch dwell times by trapezoidal accumulation of the branch indicator over
/// consecutive samples, and the closest sampled approach to `m`.
CanardMetrics canard_metrics(const Trajectory& traj, const SlowFastSystem& sys, std::span<const double> m,
                             double eta = kDefaultEta);

/// Header `t,<names>`, 17 significant digits, LF line endings.
void write_csv(const Trajectory& traj, std::ostream& out);

/// Shortest round-trip or fixed 17-digit rendering of a double.
std::string format_double(double v, int precision = 17);

}  // namespace canard
