#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canard/diffgeo.hpp"
#include "canard/pseudosing.hpp"

namespace canard {

/// phi = det(X', X'', ..., X^(n)) along the flow of an n-dimensional field.
double flow_curvature(const VectorField& field, std::span<const double> point);

/// Same determinant carried through second-order jets (division-free
/// expansion, so equilibria where every entry vanishes are handled exactly).
Jet2 flow_curvature(const VectorField& field, std::span<const Jet2> point);

/// phi as a scalar field, for gradient and Hessian evaluation.
std::shared_ptr<const ScalarField> curvature_field(std::shared_ptr<const VectorField> field);

enum class HessianClass { LocalMin, LocalMax, Saddle, Degenerate };
enum class CurvatureVerdict { CanardByCurvatureSaddle, NoCanardEvidence, Degenerate };
std::string_view to_string(HessianClass c);
std::string_view to_string(CurvatureVerdict v);

inline constexpr double kDegeneracyRelTol = 1e-9;
inline constexpr double kExtremumRelTol = 1e-6;

struct CurvatureReport {
  std::vector<double> point;
  double phi = 0.0;
  std::vector<double> grad_phi;
  double grad_norm = 0.0;
  Matrix hessian;
  double d1 = 0.0;
  double d2 = 0.0;
  std::optional<double> d3;
  double degeneracy_tol = 0.0;
  HessianClass hessian_class = HessianClass::Degenerate;
  CurvatureVerdict verdict = CurvatureVerdict::Degenerate;
  bool extremum_violated = false;
};

/// Second derivative test on leading principal minors of a 2x2 or 3x3 Hessian.
CurvatureReport hessian_test(const SecondOrder& s, std::span<const double> point);

/// Second derivative test for an arbitrary scalar function.
CurvatureReport hessian_test(const ScalarField& fn, std::span<const double> point);

/// Second derivative test of phi for a 2D or 3D field.
CurvatureReport curvature_hessian_test(std::shared_ptr<const VectorField> field, std::span<const double> point);

/// x1 x2 l1 l2 (l2 - l1) in 2D, x1 x2 x3 l1 l2 l3 (l2 - l1)(l1 - l3)(l2 - l3) in 3D.
double linear_identity_phi(std::span<const double> eigenvalues, std::span<const double> point);

struct CurvaturePointResult {
  std::vector<double> chart;
  std::string role;  // "representative" or "family offset"
  std::optional<CurvatureReport> report;
  std::string error;
};

struct CurvatureAnalysis {
  std::vector<CurvaturePointResult> points;
  CurvatureVerdict verdict = CurvatureVerdict::NoCanardEvidence;
  JacobianVerdict jacobian_verdict = JacobianVerdict::NoCanardEvidence;
  /// True when both methods agree on whether a canard is predicted. The
  /// degenerate Jacobian label counts as a saddle for this comparison.
  bool agrees = true;
};

inline constexpr double kFamilyOffset = 0.5;

/// Curvature test at each pseudo-singular point; family representatives are
/// also tested at the pinned coordinate shifted by +-kFamilyOffset.
CurvatureAnalysis canard_verdict_curvature(const SlowFastSystem& sys, const JacobianAnalysis& jac);

bool verdicts_agree(JacobianVerdict j, CurvatureVerdict c);

}  // namespace canard
