#ifndef DRESSING_FORGE_ORACLE_HPP
#define DRESSING_FORGE_ORACLE_HPP

// Independent numerical route: fixed-step RK4 along axis-aligned paths for
// the Lax connection and for the real-dressing system of pi~ and y. Nothing
// here calls the closed-form dressing updates except through a metric field.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dressing_forge/frames.hpp"

namespace dressing_forge {

/// Axis-aligned segments from the origin: (axis, target coordinate) in order.
struct PathSpec {
  std::vector<std::pair<int, double>> segments;

  /// Staircase to `u` visiting axes in `order`.
  static PathSpec staircase(const RVector& u, const std::vector<int>& order) {
    PathSpec p;
    for (int k : order) p.segments.emplace_back(k, u(k));
    return p;
  }
};

/// h and beta at an arbitrary parameter point.
using MetricField = std::function<MetricPoint(const RVector&)>;

/// Exact field of a dressed frame.
inline MetricField exact_field(const ExtendedFrame& frame) {
  return [frame](const RVector& u) { return frame.metric_at(u); };
}

/// Local tensor-product cubic Lagrange interpolation (4 nodes per axis) of a
/// grid-sampled metric, for externally supplied data.
class GridInterpolator {
 public:
  explicit GridInterpolator(EgoroffMetric metric) : m_(std::move(metric)) {
    for (const auto& a : m_.grid.axes())
      if (a.points < 4) fail(ErrorKind::InvalidArgument, "cubic interpolation needs at least 4 points per axis");
  }

  MetricPoint operator()(const RVector& u) const {
    const Grid& g = m_.grid;
    const int n = g.n();
    std::vector<std::array<int, 4>> nodes(static_cast<std::size_t>(n));
    std::vector<std::array<double, 4>> weights(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const GridAxis& a = g.axis(k);
      const double s = (u(k) - a.min) / a.spacing();
      if (s < -1e-9 || s > a.points - 1 + 1e-9) fail(ErrorKind::OutOfDomain, "interpolation point outside the grid");
      const int start = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, a.points - 4);
      for (int j = 0; j < 4; ++j) {
        nodes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = start + j;
        double w = 1.0;
        for (int l = 0; l < 4; ++l)
          if (l != j) w *= (s - (start + l)) / double(j - l);
        weights[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = w;
      }
    }
    MetricPoint out{CVector::Zero(n), CMatrix::Zero(n, n)};
    std::size_t combos = 1;
    for (int k = 0; k < n; ++k) combos *= 4;
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rem = c;
      double w = 1.0;
      for (int k = 0; k < n; ++k) {
        const auto j = rem % 4;
        rem /= 4;
        idx[static_cast<std::size_t>(k)] = nodes[static_cast<std::size_t>(k)][j];
        w *= weights[static_cast<std::size_t>(k)][j];
      }
      const std::size_t flat = g.flat_index(idx);
      out.h += w * m_.h[flat];
      out.beta += w * m_.beta[flat];
    }
    return out;
  }

 private:
  EgoroffMetric m_;
};

namespace detail {

template <class State, class Rhs>
State rk4_step(const State& x, const RVector& u, int axis, double hs, Rhs&& rhs) {
  RVector mid = u;
  mid(axis) += 0.5 * hs;
  RVector end = u;
  end(axis) += hs;
  const State k1 = rhs(x, u);
  const State k2 = rhs(State(x + (0.5 * hs) * k1), mid);
  const State k3 = rhs(State(x + (0.5 * hs) * k2), mid);
  const State k4 = rhs(State(x + hs * k3), end);
  return x + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Calls step(u, axis, hs) for every RK4 step along the path.
template <class Step>
void walk_path(int n, const PathSpec& path, double step, Step&& fn) {
  if (!(step > 0.0)) fail(ErrorKind::InvalidArgument, "step must be positive");
  RVector u = RVector::Zero(n);
  for (const auto& [axis, target] : path.segments) {
    if (axis < 0 || axis >= n) fail(ErrorKind::InvalidArgument, "path axis out of range");
    const double length = target - u(axis);
    if (length == 0.0) continue;
    const int m = std::max(1, static_cast<int>(std::ceil(std::abs(length) / step - 1e-9)));
    const double hs = length / m;
    const double start = u(axis);
    for (int i = 0; i < m; ++i) {
      fn(u, axis, hs);
      u(axis) = (i + 1 == m) ? target : start + (i + 1) * hs;
    }
  }
}

}  // namespace detail

/// F at the end of the path, integrating F' = F theta_l(d/du_axis) from F(0) = I.
inline FrameValue integrate_frame(const MetricField& field, int n, cd lambda, const PathSpec& path, double step) {
  CMatrix f = identity(n + 1);
  auto rhs = [&](const CMatrix& x, const RVector& at, int axis) {
    const MetricPoint m = field(at);
    return CMatrix(x * LaxConnection{m.beta, m.h}.theta(lambda, axis));
  };
  detail::walk_path(n, path, step, [&](const RVector& u, int axis, double hs) {
    f = detail::rk4_step(f, u, axis, hs, [&](const CMatrix& x, const RVector& at) { return rhs(x, at, axis); });
  });
  return {f.topLeftCorner(n, n), f.topRightCorner(n, 1)};
}

/// log2(r1 / r2) for residuals at nested steps s and s/2.
inline double estimate_order(double r1, double r2) { return std::log2(r1 / r2); }

struct OracleResult {
  FrameValue value;
  double step = 0.0;
  /// Endpoint max-norm difference against the reference (when one was given).
  std::optional<double> residual;
  /// Self-convergence order from steps s, s/2, s/4.
  double order = 0.0;
};

/// integrate_frame plus a self-convergence order estimate; raises StepTooLarge
/// when the estimate falls below 3 while the differences are above round-off.
inline OracleResult integrate_frame_checked(const MetricField& field, int n, cd lambda, const PathSpec& path,
                                            double step, const std::optional<FrameValue>& reference = std::nullopt) {
  const FrameValue a = integrate_frame(field, n, lambda, path, step);
  const FrameValue b = integrate_frame(field, n, lambda, path, 0.5 * step);
  const FrameValue c = integrate_frame(field, n, lambda, path, 0.25 * step);
  auto gap = [](const FrameValue& x, const FrameValue& y) {
    return std::max(max_norm(CMatrix(x.E - y.E)), max_norm(CMatrix(x.X - y.X)));
  };
  const double r1 = gap(a, b);
  const double r2 = gap(b, c);
  OracleResult out{a, step, std::nullopt, r2 > 0.0 ? estimate_order(r1, r2) : 4.0};
  if (r1 > 1e-11 && out.order < 3.0) {
    fail(ErrorKind::StepTooLarge, "RK4 self-convergence order " + std::to_string(out.order) + " < 3");
  }
  if (reference) out.residual = gap(a, *reference);
  return out;
}

struct BfResult {
  CMatrix pi;
  CVector y;
  /// Largest per-step re-projection correction |P_projected - P|.
  double max_correction = 0.0;
  std::size_t steps = 0;
};

namespace oracle_tol {
inline constexpr double kProjectionDrift = 1e-6;
}

/// Nearest Hermitian projection by thresholding the eigenvalues of the Hermitian part at 1/2.
inline CMatrix reproject(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (p + p.adjoint()));
  const auto& v = eig.eigenvalues();
  const CMatrix& q = eig.eigenvectors();
  CMatrix out = CMatrix::Zero(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) > 0.5) out += q.col(i) * q.col(i).adjoint();
  return out;
}

/// RK4 for the real-dressing system along the path,
///   d pi~ = -([[delta,beta], pi~] + alpha [delta, pi~](I - 2 pi~)),  pi~(0) = pi0,
///   dy    = -[delta, beta - 2 alpha pi~] y + pi~ delta h - alpha delta y,  y(0) = b,
/// with beta, h from the undressed field. pi~ is re-projected after each step.
inline BfResult integrate_bf(const MetricField& field, double alpha, const CMatrix& pi0, const RVector& b,
                             const PathSpec& path, double step) {
  const auto n = pi0.rows();
  if (b.size() != n) fail(ErrorKind::DimensionMismatch, "b and pi0 dimensions differ");
  // State packs [pi~ | y] as an n x (n+1) matrix.
  CMatrix state(n, n + 1);
  state.leftCols(n) = pi0;
  state.col(n) = b.cast<cd>();
  const CMatrix id = identity(n);
  auto rhs = [&](const CMatrix& s, const RVector& at, int axis) {
    const MetricPoint m = field(at);
    const CMatrix p = s.leftCols(n);
    const CVector y = s.col(n);
    CMatrix ekk = CMatrix::Zero(n, n);
    ekk(axis, axis) = 1.0;
    const CMatrix bcomm = ekk * m.beta - m.beta * ekk;
    const CMatrix shifted = m.beta - 2.0 * alpha * p;
    CMatrix out(n, n + 1);
    out.leftCols(n) = -(bcomm * p - p * bcomm + alpha * (ekk * p - p * ekk) * (id - 2.0 * p));
    out.col(n) = -(ekk * shifted - shifted * ekk) * y + p * (ekk * m.h) - alpha * (ekk * y);
    return out;
  };
  BfResult result;
  detail::walk_path(static_cast<int>(n), path, step, [&](const RVector& u, int axis, double hs) {
    state = detail::rk4_step(state, u, axis, hs, [&](const CMatrix& x, const RVector& at) { return rhs(x, at, axis); });
    const CMatrix p = state.leftCols(n);
    const CMatrix fixed = reproject(p);
    const double correction = max_norm(CMatrix(fixed - p));
    if (correction > oracle_tol::kProjectionDrift) {
      fail(ErrorKind::ProjectionDrift, "re-projection correction " + std::to_string(correction) + " exceeds 1e-6");
    }
    result.max_correction = std::max(result.max_correction, correction);
    state.leftCols(n) = fixed;
    ++result.steps;
  });
  result.pi = state.leftCols(n);
  result.y = state.col(n);
  return result;
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_ORACLE_HPP
