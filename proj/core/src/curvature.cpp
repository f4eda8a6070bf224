#include "canard/curvature.hpp"

#include <cmath>

namespace canard {

namespace {

class CurvatureField final : public ScalarField {
 public:
  explicit CurvatureField(std::shared_ptr<const VectorField> f) : f_(std::move(f)) {}
  std::size_t dim() const override { return f_->dim(); }
  double eval(std::span<const double> x) const override { return flow_curvature(*f_, x); }
  Jet2 eval(std::span<const Jet2> x) const override { return flow_curvature(*f_, x); }

 private:
  std::shared_ptr<const VectorField> f_;
};

void check_dim(std::size_t n) {
  if (n < 2 || n > kMaxTrajectoryOrder)
    throw Error("flow curvature needs a field of dimension 2.." + std::to_string(kMaxTrajectoryOrder));
}

}  // namespace

std::string_view to_string(HessianClass c) {
  switch (c) {
    case HessianClass::LocalMin: return "LocalMin";
    case HessianClass::LocalMax: return "LocalMax";
    case HessianClass::Saddle: return "Saddle";
    case HessianClass::Degenerate: return "Degenerate";
  }
  return "?";
}

std::string_view to_string(CurvatureVerdict v) {
  switch (v) {
    case CurvatureVerdict::CanardByCurvatureSaddle: return "CanardByCurvatureSaddle";
    case CurvatureVerdict::NoCanardEvidence: return "NoCanardEvidence";
    case CurvatureVerdict::Degenerate: return "Degenerate";
  }
  return "?";
}

double flow_curvature(const VectorField& field, std::span<const double> point) {
  const std::size_t n = field.dim();
  check_dim(n);
  const auto jets = trajectory_jets(field, point, n);
  Matrix m(n, n);
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, j - 1) = jets[j][i];
  return determinant(m);
}

Jet2 flow_curvature(const VectorField& field, std::span<const Jet2> point) {
  const std::size_t n = field.dim();
  check_dim(n);
  const auto jets = trajectory_jets<Jet2>(field, point, n);
  std::vector<Jet2> m(n * n);
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t i = 0; i < n; ++i) m[i * n + (j - 1)] = jets[j][i];
  return determinant_expansion<Jet2>(m, n);
}

std::shared_ptr<const ScalarField> curvature_field(std::shared_ptr<const VectorField> field) {
  return std::make_shared<CurvatureField>(std::move(field));
}

CurvatureReport hessian_test(const SecondOrder& s, std::span<const double> point) {
  const Matrix& h = s.hessian;
  const std::size_t n = h.rows();
  if (n != 2 && n != 3) throw Error("second derivative test supports 2 or 3 variables");
  CurvatureReport r;
  r.point.assign(point.begin(), point.end());
  r.phi = s.value;
  r.grad_phi = s.gradient;
  double g2 = 0.0;
  for (double v : s.gradient) g2 += v * v;
  r.grad_norm = std::sqrt(g2);
  r.hessian = h;

  const double hn = h.frobenius_norm();
  r.degeneracy_tol = kDegeneracyRelTol * (1.0 + hn * hn);
  r.d1 = h(0, 0);
  r.d2 = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  auto sign = [&](double v) { return std::abs(v) <= r.degeneracy_tol ? 0 : (v > 0.0 ? 1 : -1); };

  if (n == 2) {
    const int s2 = sign(r.d2);
    const int s1 = sign(r.d1);
    if (s2 == 0) {
      r.hessian_class = HessianClass::Degenerate;
    } else if (s2 < 0) {
      r.hessian_class = HessianClass::Saddle;
    } else if (s1 > 0) {
      r.hessian_class = HessianClass::LocalMin;
    } else if (s1 < 0) {
      r.hessian_class = HessianClass::LocalMax;
    } else {
      r.hessian_class = HessianClass::Degenerate;
    }
  } else {
    r.d3 = determinant3(h);
    const int s1 = sign(r.d1), s2 = sign(r.d2), s3 = sign(*r.d3);
    if (s3 == 0) {
      r.hessian_class = HessianClass::Degenerate;
    } else if (s1 > 0 && s2 > 0 && s3 > 0) {
      r.hessian_class = HessianClass::LocalMin;
    } else if (s1 < 0 && s2 > 0 && s3 < 0) {
      r.hessian_class = HessianClass::LocalMax;
    } else {
      r.hessian_class = HessianClass::Saddle;
    }
  }

  switch (r.hessian_class) {
    case HessianClass::Saddle: r.verdict = CurvatureVerdict::CanardByCurvatureSaddle; break;
    case HessianClass::Degenerate: r.verdict = CurvatureVerdict::Degenerate; break;
    default: r.verdict = CurvatureVerdict::NoCanardEvidence; break;
  }
  r.extremum_violated = r.grad_norm > kExtremumRelTol * (1.0 + std::abs(r.phi) + hn);
  return r;
}

CurvatureReport hessian_test(const ScalarField& fn, std::span<const double> point) {
  return hessian_test(value_gradient_hessian(fn, point), point);
}

CurvatureReport curvature_hessian_test(std::shared_ptr<const VectorField> field, std::span<const double> point) {
  const std::size_t n = field->dim();
  if (n != 2 && n != 3) throw Error("curvature_hessian_test supports 2D and 3D charts only");
  auto phi = curvature_field(std::move(field));
  return hessian_test(*phi, point);
}

double linear_identity_phi(std::span<const double> l, std::span<const double> x) {
  if (l.size() != x.size()) throw Error("linear_identity_phi: eigenvalue and point dimensions differ");
  if (l.size() == 2) return x[0] * x[1] * l[0] * l[1] * (l[1] - l[0]);
  if (l.size() == 3)
    return x[0] * x[1] * x[2] * l[0] * l[1] * l[2] * (l[1] - l[0]) * (l[0] - l[2]) * (l[1] - l[2]);
  throw Error("linear_identity_phi needs 2 or 3 eigenvalues");
}

bool verdicts_agree(JacobianVerdict j, CurvatureVerdict c) {
  const bool jac_canard = j != JacobianVerdict::NoCanardEvidence;
  const bool curv_canard = c == CurvatureVerdict::CanardByCurvatureSaddle;
  return jac_canard == curv_canard;
}

CurvatureAnalysis canard_verdict_curvature(const SlowFastSystem& sys, const JacobianAnalysis& jac) {
  CurvatureAnalysis a;
  a.jacobian_verdict = jac.verdict;
  std::shared_ptr<const VectorField> reduced = reduce(sys);

  auto run = [&](const std::vector<double>& chart, const std::string& role) {
    CurvaturePointResult res;
    res.chart = chart;
    res.role = role;
    try {
      res.report = curvature_hessian_test(reduced, chart);
    } catch (const Error& e) {
      res.error = e.what();
    }
    a.points.push_back(std::move(res));
  };

  bool saddle = false, degenerate = false;
  for (const auto& pt : jac.search.points) {
    run(pt.chart, "representative");
    const auto& rep = a.points.back().report;
    if (rep) {
      saddle = saddle || rep->hessian_class == HessianClass::Saddle;
      degenerate = degenerate || rep->hessian_class == HessianClass::Degenerate;
    }
    if (pt.family && pt.pinned_index < sys.dim()) {
      for (double off : {-kFamilyOffset, kFamilyOffset}) {
        auto moved = locate_on_family(sys, pt, pt.pinned_index, pt.full[pt.pinned_index] + off);
        if (moved) {
          run(moved->chart, "family offset");
        } else {
          CurvaturePointResult res;
          res.role = "family offset";
          res.error = "could not follow the pseudo-singular curve";
          a.points.push_back(std::move(res));
        }
      }
    }
  }
  a.verdict = saddle       ? CurvatureVerdict::CanardByCurvatureSaddle
              : degenerate ? CurvatureVerdict::Degenerate
                           : CurvatureVerdict::NoCanardEvidence;
  a.agrees = verdicts_agree(a.jacobian_verdict, a.verdict);
  return a;
}

}  // namespace canard
