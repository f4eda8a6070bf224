#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "canard/diffgeo.hpp"
#include "canard/slowfast.hpp"

namespace canard {

enum class JacobianVerdict { CanardBySaddle, DegenerateCanardBySaddle, NoCanardEvidence };
std::string_view to_string(JacobianVerdict v);

/// Per-variable search intervals keyed by variable name. Variables without an
/// entry use the default interval.
struct SearchBox {
  std::map<std::string, std::pair<double, double>> bounds;
  std::pair<double, double> fallback{-2.0, 2.0};

  std::pair<double, double> interval(const std::string& name) const;
};

struct SearchOptions {
  std::size_t grid_per_axis = 10;
  std::size_t max_iterations = 60;
  double residual_tol = 1e-12;
  double accept_tol = 1e-9;
  double dedupe_tol = 1e-6;
};

struct PseudoSingularPoint {
  std::vector<double> chart;
  std::vector<double> full;
  double residual_norm = 0.0;
  SpectrumReport spectrum;
  JacobianVerdict verdict = JacobianVerdict::NoCanardEvidence;
  /// p = 3 only: the solution set is a curve through this point.
  bool family = false;
  std::vector<double> family_direction;  // unit tangent in full coordinates
  std::size_t pinned_index = 0;          // full-coordinate index fixed to pick this representative
};

struct SearchStats {
  std::size_t seeds = 0;
  std::size_t converged = 0;
  std::size_t singular_skipped = 0;
  std::size_t diverged = 0;
  std::vector<std::vector<double>> singular_seeds;
};

struct SearchResult {
  std::vector<PseudoSingularPoint> points;
  SearchStats stats;
};

struct Residual {
  std::vector<double> value;  // (g, dg/dy1, sum_i dg/dx_i f_i)
  Matrix jacobian;            // 3 x (p + 1), exact
};

/// The three defining residuals of a pseudo-singular point and their Jacobian
/// with respect to the full coordinates.
Residual pseudo_singular_residual(const SlowFastSystem& sys, std::span<const double> full);

/// Damped Newton from every grid cell centre of the chart box, x1 seeded by the
/// elimination rule. For p = 3 the under-determined system is reduced to a
/// square one by fixing the coordinate that moves most along the solution curve.
SearchResult find_pseudo_singular(const SlowFastSystem& sys, const SearchBox& box, const SearchOptions& opts = {});

/// Move a family representative to full coordinate `index` = `value` and
/// re-solve. Returns nullopt when Newton fails.
std::optional<PseudoSingularPoint> locate_on_family(const SlowFastSystem& sys, const PseudoSingularPoint& point,
                                                    std::size_t index, double value);

/// Spectrum of the reduced-field Jacobian at an equilibrium (||F|| < 1e-6).
SpectrumReport classify_reduced(const VectorField& reduced, std::span<const double> chart);

inline constexpr double kEquilibriumTol = 1e-6;

struct ThresholdCheck {
  std::string condition;
  bool satisfied = false;
  std::map<std::string, double> values;
};

/// Closed-form saddle condition for the built-in Chua models.
std::optional<ThresholdCheck> builtin_threshold(const SlowFastSystem& sys);

struct JacobianAnalysis {
  SearchResult search;
  JacobianVerdict verdict = JacobianVerdict::NoCanardEvidence;
  std::optional<ThresholdCheck> threshold;
};

JacobianAnalysis canard_verdict_jacobian(const SlowFastSystem& sys, const SearchBox& box,
                                         const SearchOptions& opts = {});

}  // namespace canard
