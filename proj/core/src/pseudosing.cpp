#include "canard/pseudosing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace canard {

namespace {

constexpr std::size_t kNoPin = std::numeric_limits<std::size_t>::max();

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

enum class NewtonStatus { Converged, Singular, Diverged };

struct NewtonOutcome {
  NewtonStatus status = NewtonStatus::Diverged;
  std::vector<double> u;
  double norm = 0.0;
};

// Unknowns are every full coordinate except `pin`. With p = 3 and no pin the
// step is the minimum-norm Gauss-Newton step.
NewtonOutcome newton(const SlowFastSystem& sys, std::vector<double> u, std::size_t pin, const SearchOptions& opts) {
  const std::size_t n = sys.dim();
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < n; ++k)
    if (k != pin) free.push_back(k);
  const std::size_t m = free.size();

  NewtonOutcome out;
  Residual r;
  try {
    r = pseudo_singular_residual(sys, u);
  } catch (const EvalError&) {
    out.u = u;
    return out;
  }
  double nr = norm2(r.value);

  for (std::size_t it = 0; it < opts.max_iterations && nr > opts.residual_tol; ++it) {
    Matrix j(3, m);
    for (std::size_t row = 0; row < 3; ++row)
      for (std::size_t c = 0; c < m; ++c) j(row, c) = r.jacobian(row, free[c]);
    std::vector<double> minus_r = {-r.value[0], -r.value[1], -r.value[2]};
    std::vector<double> delta;
    try {
      if (m == 3) {
        delta = solve(j, minus_r, 1e-12);
      } else {
        const Matrix jt = j.transposed();
        const std::vector<double> w = solve(j * jt, minus_r, 1e-14);
        delta = jt * std::span<const double>(w);
      }
    } catch (const NumericalError&) {
      out.status = NewtonStatus::Singular;
      out.u = u;
      out.norm = nr;
      return out;
    }

    bool accepted = false;
    double lambda = 1.0;
    for (int h = 0; h <= 30 && !accepted; ++h, lambda *= 0.5) {
      std::vector<double> trial = u;
      for (std::size_t c = 0; c < m; ++c) trial[free[c]] += lambda * delta[c];
      try {
        Residual rt = pseudo_singular_residual(sys, trial);
        const double nt = norm2(rt.value);
        if (nt < nr) {
          u = std::move(trial);
          r = std::move(rt);
          nr = nt;
          accepted = true;
        }
      } catch (const EvalError&) {
      }
    }
    if (!accepted) break;
  }

  out.u = u;
  out.norm = nr;
  out.status = nr <= opts.accept_tol ? NewtonStatus::Converged : NewtonStatus::Diverged;
  return out;
}

// Signed 3x3 minors of a 3x4 matrix: a vector spanning its null space when the rank is 3.
std::vector<double> null_direction(const Matrix& j) {
  std::vector<double> nd(4);
  for (std::size_t k = 0; k < 4; ++k) {
    Matrix sub(3, 3);
    for (std::size_t r = 0; r < 3; ++r) {
      std::size_t c2 = 0;
      for (std::size_t c = 0; c < 4; ++c)
        if (c != k) sub(r, c2++) = j(r, c);
    }
    nd[k] = ((k % 2 == 0) ? 1.0 : -1.0) * determinant3(sub);
  }
  return nd;
}

bool inside(const SlowFastSystem& sys, const SearchBox& box, std::span<const double> full) {
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto [lo, hi] = box.interval(sys.full_names()[i]);
    const double slack = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
    if (full[i] < lo - slack || full[i] > hi + slack) return false;
  }
  return true;
}

PseudoSingularPoint finish(const SlowFastSystem& sys, const VectorField& reduced, std::vector<double> full,
                           std::size_t pin) {
  PseudoSingularPoint pt;
  const Residual r = pseudo_singular_residual(sys, full);
  pt.residual_norm = norm2(r.value);
  pt.chart.assign(full.begin() + 1, full.end());
  pt.full = std::move(full);
  if (sys.p() == 3) {
    pt.family = true;
    std::vector<double> nd = null_direction(r.jacobian);
    const double len = norm2(nd);
    if (len > 0.0) {
      // Orient so that the largest component is positive.
      std::size_t big = 0;
      for (std::size_t k = 1; k < nd.size(); ++k)
        if (std::abs(nd[k]) > std::abs(nd[big])) big = k;
      const double s = (nd[big] < 0.0 ? -1.0 : 1.0) / len;
      for (double& v : nd) v *= s;
    }
    pt.family_direction = std::move(nd);
    pt.pinned_index = pin;
  }
  pt.spectrum = classify_reduced(reduced, pt.chart);
  switch (pt.spectrum.classification) {
    case Classification::Saddle: pt.verdict = JacobianVerdict::CanardBySaddle; break;
    case Classification::DegenerateSaddle: pt.verdict = JacobianVerdict::DegenerateCanardBySaddle; break;
    default: pt.verdict = JacobianVerdict::NoCanardEvidence; break;
  }
  return pt;
}

}  // namespace

std::string_view to_string(JacobianVerdict v) {
  switch (v) {
    case JacobianVerdict::CanardBySaddle: return "CanardBySaddle";
    case JacobianVerdict::DegenerateCanardBySaddle: return "DegenerateCanardBySaddle";
    case JacobianVerdict::NoCanardEvidence: return "NoCanardEvidence";
  }
  return "?";
}

std::pair<double, double> SearchBox::interval(const std::string& name) const {
  auto it = bounds.find(name);
  return it == bounds.end() ? fallback : it->second;
}

Residual pseudo_singular_residual(const SlowFastSystem& sys, std::span<const double> full) {
  const std::size_t n = sys.dim();
  const std::size_t p = sys.p();
  if (full.size() != n) throw ShapeError("pseudo_singular_residual: wrong dimension");
  std::vector<Jet2> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = Jet2::variable(full[i], n, i);
  const Jet2 g = sys.g<Jet2>(x);
  std::vector<Jet2> f(p);
  for (std::size_t i = 0; i < p; ++i) f[i] = sys.f<Jet2>(i, x);

  Residual r;
  r.value = {g.value(), g.d(p), 0.0};
  r.jacobian = Matrix(3, n);
  for (std::size_t k = 0; k < n; ++k) {
    r.jacobian(0, k) = g.d(k);
    r.jacobian(1, k) = g.dd(p, k);
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += g.dd(i, k) * f[i].value() + g.d(i) * f[i].d(k);
    r.jacobian(2, k) = s;
  }
  for (std::size_t i = 0; i < p; ++i) r.value[2] += g.d(i) * f[i].value();
  return r;
}

SpectrumReport classify_reduced(const VectorField& reduced, std::span<const double> chart) {
  const std::vector<double> fx = reduced(chart);
  const double nf = norm2(fx);
  if (!(nf < kEquilibriumTol))
    throw NumericalError("classify_reduced: point is not an equilibrium of the reduced field (|F| = " +
                         std::to_string(nf) + ")");
  return spectrum(jacobian(reduced, chart));
}

SearchResult find_pseudo_singular(const SlowFastSystem& sys, const SearchBox& box, const SearchOptions& opts) {
  if (opts.grid_per_axis < 2) throw Error("grid_per_axis must be at least 2");
  const std::size_t n = sys.dim();
  const std::size_t p = sys.p();
  for (const auto& name : sys.full_names()) {
    const auto [lo, hi] = box.interval(name);
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw Error("search interval for '" + name + "' is empty or not finite");
  }
  for (const auto& [name, iv] : box.bounds)
    if (std::find(sys.full_names().begin(), sys.full_names().end(), name) == sys.full_names().end())
      throw Error("search box names unknown variable '" + name + "'");

  auto reduced = reduce(sys);
  SearchResult result;
  std::vector<PseudoSingularPoint> found;

  const std::size_t g = opts.grid_per_axis;
  std::size_t total = 1;
  for (std::size_t i = 0; i < p; ++i) total *= g;

  const auto [x1_lo, x1_hi] = box.interval(sys.full_names()[0]);
  std::vector<double> chart(p), seed(n);
  for (std::size_t cell = 0; cell < total; ++cell) {
    std::size_t rem = cell;
    for (std::size_t i = 0; i < p; ++i) {
      const auto [lo, hi] = box.interval(sys.chart_names()[i]);
      const std::size_t k = rem % g;
      rem /= g;
      chart[i] = lo + (static_cast<double>(k) + 0.5) * (hi - lo) / static_cast<double>(g);
    }
    seed[0] = 0.5 * (x1_lo + x1_hi);
    try {
      seed[0] = reduced->x1<double>(chart);
    } catch (const Error&) {
    }
    for (std::size_t i = 0; i < p; ++i) seed[i + 1] = chart[i];
    ++result.stats.seeds;

    NewtonOutcome o = newton(sys, seed, kNoPin, opts);
    std::size_t pin = kNoPin;
    if (o.status == NewtonStatus::Converged && p == 3) {
      const Residual r = pseudo_singular_residual(sys, o.u);
      const std::vector<double> nd = null_direction(r.jacobian);
      std::size_t big = 0;
      for (std::size_t k = 1; k < nd.size(); ++k)
        if (std::abs(nd[k]) > std::abs(nd[big])) big = k;
      if (std::abs(nd[big]) > 0.0) {
        const auto [lo, hi] = box.interval(sys.full_names()[big]);
        std::vector<double> u = o.u;
        u[big] = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : 0.5 * (lo + hi);
        NewtonOutcome pinned = newton(sys, u, big, opts);
        if (pinned.status == NewtonStatus::Converged) {
          o = std::move(pinned);
          pin = big;
        }
      }
    }

    if (o.status == NewtonStatus::Singular) {
      ++result.stats.singular_skipped;
      result.stats.singular_seeds.push_back(seed);
      continue;
    }
    if (o.status != NewtonStatus::Converged) {
      ++result.stats.diverged;
      continue;
    }
    ++result.stats.converged;
    if (!inside(sys, box, o.u)) continue;

    bool duplicate = false;
    for (auto& f : found) {
      double d = 0.0;
      for (std::size_t i = 0; i < p; ++i) d += (f.chart[i] - o.u[i + 1]) * (f.chart[i] - o.u[i + 1]);
      if (std::sqrt(d) <= opts.dedupe_tol) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    found.push_back(finish(sys, *reduced, o.u, pin));
  }

  std::sort(found.begin(), found.end(),
            [](const PseudoSingularPoint& a, const PseudoSingularPoint& b) { return a.chart < b.chart; });
  result.points = std::move(found);
  return result;
}

std::optional<PseudoSingularPoint> locate_on_family(const SlowFastSystem& sys, const PseudoSingularPoint& point,
                                                    std::size_t index, double value) {
  if (index >= sys.dim()) throw Error("locate_on_family: coordinate index out of range");
  std::vector<double> u = point.full;
  u[index] = value;
  const NewtonOutcome o = newton(sys, u, index, SearchOptions{});
  if (o.status != NewtonStatus::Converged) return std::nullopt;
  auto reduced = reduce(sys);
  return finish(sys, *reduced, o.u, index);
}

std::optional<ThresholdCheck> builtin_threshold(const SlowFastSystem& sys) {
  ThresholdCheck t;
  switch (sys.builtin()) {
    case BuiltinModel::Chua3: {
      const double alpha = sys.params().at("alpha");
      t.condition = "3 + 40*alpha > 0 and alpha > 0";
      t.values = {{"alpha", alpha}, {"3 + 40*alpha", 3.0 + 40.0 * alpha}};
      t.satisfied = 3.0 + 40.0 * alpha > 0.0 && alpha > 0.0;
      return t;
    }
    case BuiltinModel::Chua4: {
      const double alpha2 = sys.params().at("alpha2");
      const double c2 = sys.params().at("c2");
      const double threshold = -2.0 * c2 / (3.0 + 2.0 * c2);
      t.condition = "alpha2 < -2*c2/(3 + 2*c2)";
      t.values = {{"alpha2", alpha2}, {"-2*c2/(3 + 2*c2)", threshold}};
      t.satisfied = alpha2 < threshold;
      return t;
    }
    case BuiltinModel::None: break;
  }
  return std::nullopt;
}

JacobianAnalysis canard_verdict_jacobian(const SlowFastSystem& sys, const SearchBox& box, const SearchOptions& opts) {
  JacobianAnalysis a;
  a.search = find_pseudo_singular(sys, box, opts);
  a.threshold = builtin_threshold(sys);
  bool saddle = false, degenerate = false;
  for (const auto& pt : a.search.points) {
    saddle = saddle || pt.spectrum.classification == Classification::Saddle;
    degenerate = degenerate || pt.spectrum.classification == Classification::DegenerateSaddle;
  }
  a.verdict = saddle       ? JacobianVerdict::CanardBySaddle
              : degenerate ? JacobianVerdict::DegenerateCanardBySaddle
                           : JacobianVerdict::NoCanardEvidence;
  return a;
}

}  // namespace canard
