#ifndef DRESSING_FORGE_GEOMETRY_HPP
#define DRESSING_FORGE_GEOMETRY_HPP

// Geometric checks on sampled metrics and immersions. Derivatives are
// second-order finite differences on the grid (central inside, one-sided at
// the ends) so every residual here is O(du^2) on smooth data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "dressing_forge/frames.hpp"
#include "dressing_forge/report.hpp"

namespace dressing_forge {

namespace detail {

/// d/du_axis of a grid field at one flat index.
template <class Get>
auto grid_derivative(const Grid& grid, std::size_t flat, int axis, Get&& get) {
  const auto idx = grid.multi_index(flat);
  const int i = idx[static_cast<std::size_t>(axis)];
  const int m = grid.axis(axis).points;
  const double du = grid.axis(axis).spacing();
  const auto stride = grid.stride(axis);
  if (m < 3) fail(ErrorKind::InvalidArgument, "finite differences need at least 3 points per axis");
  if (i == 0) return decltype(get(flat))((-3.0 * get(flat) + 4.0 * get(flat + stride) - get(flat + 2 * stride)) / (2.0 * du));
  if (i == m - 1) return decltype(get(flat))((3.0 * get(flat) - 4.0 * get(flat - stride) + get(flat - 2 * stride)) / (2.0 * du));
  return decltype(get(flat))((get(flat + stride) - get(flat - stride)) / (2.0 * du));
}

inline void require_points(const Grid& grid, int minimum, const char* what) {
  for (const auto& a : grid.axes())
    if (a.points < minimum) {
      fail(ErrorKind::InvalidArgument, std::string(what) + " needs at least " + std::to_string(minimum) + " points per axis");
    }
}

}  // namespace detail

/// Residuals of (beta_ij)_{u_k} = beta_ik beta_kj (distinct i, j, k) and
/// (beta_ij)_{u_i} + (beta_ij)_{u_j} + sum_k beta_ik beta_jk = 0 (i != j).
inline VerificationReport check_darboux_egoroff(const EgoroffMetric& metric, double tolerance = 1e-4) {
  detail::require_points(metric.grid, 5, "check_darboux_egoroff");
  const Grid& grid = metric.grid;
  const int n = grid.n();
  double cross = 0.0;
  double diagonal = 0.0;
  double symmetry = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const CMatrix& b = metric.beta[p];
    symmetry = std::max({symmetry, max_norm(CMatrix(b - b.transpose())), b.diagonal().cwiseAbs().maxCoeff()});
    std::vector<CMatrix> d(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      d[static_cast<std::size_t>(k)] = detail::grid_derivative(grid, p, k, [&](std::size_t q) { return metric.beta[q]; });
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        cd sum = 0.0;
        for (int k = 0; k < n; ++k) sum += b(i, k) * b(j, k);
        diagonal = std::max(diagonal, std::abs(d[static_cast<std::size_t>(i)](i, j) + d[static_cast<std::size_t>(j)](i, j) + sum));
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          cross = std::max(cross, std::abs(d[static_cast<std::size_t>(k)](i, j) - b(i, k) * b(k, j)));
        }
      }
  }
  VerificationReport r;
  if (n >= 3) {
    r.add("darboux_egoroff_cross", cross, tolerance);
  } else {
    r.skip("darboux_egoroff_cross", "needs n >= 3 (no distinct triples)");
  }
  r.add("darboux_egoroff_diagonal", diagonal, tolerance);
  r.add("beta_symmetric_zero_diagonal", symmetry, 1e-10);
  return r;
}

/// Exact tangents d_i X = h_i E e_i: symplectic residual max |Im((d_i X)* d_j X)|
/// and metric residual max |(d_i X)* d_j X - delta_ij h_i^2|.
inline VerificationReport check_lagrangian(const ExtendedFrame& frame, const Grid& grid, cd lambda,
                                           double tolerance = 1e-10) {
  VerificationReport r;
  if (lambda.imag() != 0.0) {
    r.skip("lagrangian_symplectic", "lambda is not real; E is not unitary off the real axis");
    r.skip("lagrangian_metric", "lambda is not real");
    return r;
  }
  double omega = 0.0;
  double metric = 0.0;
  const int n = frame.n();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const RVector u = grid.point(p);
    const CMatrix e = frame.E(u, lambda);
    const CVector h = frame.metric_at(u).h;
    CMatrix t(n, n);
    for (int i = 0; i < n; ++i) t.col(i) = h(i) * e.col(i);
    const CMatrix gram = t.adjoint() * t;
    omega = std::max(omega, gram.imag().cwiseAbs().maxCoeff());
    CMatrix expected = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) expected(i, i) = h(i) * std::conj(h(i));
    metric = std::max(metric, max_norm(CMatrix(gram - expected)));
  }
  r.add("lagrangian_symplectic", omega, tolerance);
  r.add("lagrangian_metric", metric, tolerance);
  return r;
}

/// Center of the sphere carrying X(., lambda) for a spherical metric with h(0) = c.
inline CVector sphere_center(const RVector& c, cd lambda) { return (kI / lambda) * c.cast<cd>(); }

/// max | |X(u) - center| - |c|/|lambda| | over the sample.
inline VerificationReport check_sphere(const ImmersionSample& sample, const RVector& c, double tolerance = 1e-9) {
  const cd lambda = sample.lambda;
  if (lambda.imag() != 0.0 || lambda.real() == 0.0) fail(ErrorKind::InvalidArgument, "sphere check needs real nonzero lambda");
  const CVector center = sphere_center(c, lambda);
  const double radius = c.norm() / std::abs(lambda);
  double worst = 0.0;
  for (const auto& x : sample.X) worst = std::max(worst, std::abs((x - center).norm() - radius));
  VerificationReport r;
  auto& rec = r.add("sphere", worst, tolerance);
  rec.metadata["radius"] = std::to_string(radius);
  if (!rec.pass) rec.status = "not spherical";
  return r;
}

/// dh + [delta, beta] h = 0 (all components), (h_i)_{u_i} = -sum_j beta_ij h_j,
/// and constancy of |h|^2 (spread over the grid and its gradient).
inline VerificationReport check_partial_invariance(const EgoroffMetric& metric, double tolerance = 1e-4,
                                                   double spread_tolerance = 1e-10) {
  detail::require_points(metric.grid, 5, "check_partial_invariance");
  const Grid& grid = metric.grid;
  const int n = grid.n();
  double full = 0.0;
  double diag = 0.0;
  double gradient = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto norm2 = [&](std::size_t q) { return cd(metric.h[q].squaredNorm(), 0.0); };
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const CVector& h = metric.h[p];
    const CMatrix& b = metric.beta[p];
    const CVector bh = b * h;
    const double nn = h.squaredNorm();
    lo = std::min(lo, nn);
    hi = std::max(hi, nn);
    for (int k = 0; k < n; ++k) {
      const CVector dh = detail::grid_derivative(grid, p, k, [&](std::size_t q) { return CVector(metric.h[q]); });
      for (int i = 0; i < n; ++i) {
        // ([e_kk, beta] h)_i = delta_ik (beta h)_k - beta_ik h_k
        const cd comm = (i == k ? bh(k) : cd(0.0)) - b(i, k) * h(k);
        full = std::max(full, std::abs(dh(i) + comm));
      }
      diag = std::max(diag, std::abs(dh(k) + bh(k)));
      gradient = std::max(gradient, std::abs(detail::grid_derivative(grid, p, k, norm2)));
    }
  }
  VerificationReport r;
  r.add("partial_invariance_dh", full, tolerance);
  r.add("partial_invariance_diagonal", diag, tolerance);
  r.add("norm_gradient", gradient, tolerance);
  r.add("norm_spread", hi - lo, spread_tolerance);
  return r;
}

/// max |(h_i)_{u_j} - beta_ij h_j| over i != j: h solves the linear system of
/// the rotation coefficients.
inline double h_system_residual(const EgoroffMetric& metric) {
  const Grid& grid = metric.grid;
  const int n = grid.n();
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int j = 0; j < n; ++j) {
      const CVector dh = detail::grid_derivative(grid, p, j, [&](std::size_t q) { return CVector(metric.h[q]); });
      for (int i = 0; i < n; ++i)
        if (i != j) worst = std::max(worst, std::abs(dh(i) - metric.beta[p](i, j) * metric.h[p](j)));
    }
  return worst;
}

/// Accumulated beta against beta_ij = (h_i)_{u_j} / h_j.
inline double beta_two_way_residual(const EgoroffMetric& metric) {
  const Grid& grid = metric.grid;
  const int n = grid.n();
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int j = 0; j < n; ++j) {
      const CVector dh = detail::grid_derivative(grid, p, j, [&](std::size_t q) { return CVector(metric.h[q]); });
      for (int i = 0; i < n; ++i)
        if (i != j) worst = std::max(worst, std::abs(dh(i) / metric.h[p](j) - metric.beta[p](i, j)));
    }
  return worst;
}

/// max over grid and axes of |dX/du_i (finite differences) - h_i E e_i|.
inline double position_equation_residual(const ExtendedFrame& frame, const Grid& grid, cd lambda) {
  const ImmersionSample s = sample_immersion(frame, grid, lambda);
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const RVector u = grid.point(p);
    const CMatrix e = frame.E(u, lambda);
    const CVector h = frame.metric_at(u).h;
    for (int i = 0; i < grid.n(); ++i) {
      const CVector dx = detail::grid_derivative(grid, p, i, [&](std::size_t q) { return CVector(s.X[q]); });
      worst = std::max(worst, max_norm(CMatrix(dx - h(i) * e.col(i))));
    }
  }
  return worst;
}

/// max |phi_grid - phi_reference| over the grid.
inline double potential_residual(const EgoroffMetric& metric, const std::vector<cd>& reference) {
  if (reference.size() != metric.phi.size()) fail(ErrorKind::DimensionMismatch, "potential sizes differ");
  double worst = 0.0;
  for (std::size_t p = 0; p < reference.size(); ++p) worst = std::max(worst, std::abs(metric.phi[p] - reference[p]));
  return worst;
}

/// Integral of sum h_i^2 du_i along the staircase from 0 visiting the axes in
/// `order`, composite 8-point Gauss-Legendre on each grid cell.
inline cd staircase_potential(const std::function<CVector(const RVector&)>& h_of, const Grid& grid,
                              const RVector& target, const std::vector<int>& order) {
  using Gauss = boost::math::quadrature::gauss<double, 8>;
  RVector u = RVector::Zero(target.size());
  cd total = 0.0;
  for (int k : order) {
    const double end = target(k);
    if (end == 0.0) continue;
    const double du = grid.axis(k).spacing();
    const int cells = std::max(1, static_cast<int>(std::ceil(std::abs(end) / du - 1e-9)));
    const double width = end / cells;
    for (int c = 0; c < cells; ++c) {
      const double a = c * width;
      auto f = [&](double t) {
        RVector v = u;
        v(k) = t;
        const cd hk = h_of(v)(k);
        return hk * hk;
      };
      const double re = Gauss::integrate([&](double t) { return f(t).real(); }, a, a + width);
      const double im = Gauss::integrate([&](double t) { return f(t).imag(); }, a, a + width);
      total += cd(re, im);
    }
    u(k) = end;
  }
  return total;
}

/// Largest difference between staircase potentials over all axis orderings, maximised over the grid.
inline double potential_axis_spread(const std::function<CVector(const RVector&)>& h_of, const Grid& grid) {
  std::vector<int> order(static_cast<std::size_t>(grid.n()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> orders;
  do orders.push_back(order);
  while (std::next_permutation(order.begin(), order.end()));
  double spread = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const RVector u = grid.point(p);
    const cd ref = staircase_potential(h_of, grid, u, orders.front());
    for (std::size_t o = 1; o < orders.size(); ++o)
      spread = std::max(spread, std::abs(staircase_potential(h_of, grid, u, orders[o]) - ref));
  }
  return spread;
}

struct LimitNet {
  Grid grid;
  std::vector<RVector> points;
  double max_imag = 0.0;
};

/// X(u, 0) on the grid; throws NonReal when some |Im X(u,0)| exceeds the tolerance.
inline LimitNet limit_net(const ExtendedFrame& frame, const Grid& grid, double tolerance = 1e-10) {
  LimitNet net{grid, {}, 0.0};
  net.points.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const CVector x = frame.X(grid.point(p), cd{0.0, 0.0});
    net.max_imag = std::max(net.max_imag, x.imag().cwiseAbs().maxCoeff());
    net.points.push_back(x.real());
  }
  if (!(net.max_imag < tolerance)) {
    fail(ErrorKind::NonReal, "limit net has |Im X(u,0)| = " + std::to_string(net.max_imag) + " (sigma-incompatible history?)");
  }
  return net;
}

/// -i dE/dl(u,0) h(u): the limit net of a spherical frame.
inline CVector limit_net_from_derivative(const ExtendedFrame& frame, const RVector& u) {
  return -kI * (frame_dlambda_at_zero(frame, u) * frame.metric_at(u).h);
}

/// Direct X(u,0) against -i dE/dl(u,0) h(u) (spherical frames only).
inline VerificationReport check_limit_net(const ExtendedFrame& frame, const Grid& grid, double tolerance = 1e-7,
                                          double real_tolerance = 1e-10) {
  VerificationReport r;
  double imag = 0.0;
  double gap = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const RVector u = grid.point(p);
    const CVector x = frame.X(u, cd{0.0, 0.0});
    imag = std::max(imag, x.imag().cwiseAbs().maxCoeff());
    if (frame.spherical()) gap = std::max(gap, max_norm(CMatrix(x - limit_net_from_derivative(frame, u))));
  }
  r.add("limit_net_real", imag, real_tolerance);
  if (frame.spherical()) {
    r.add("limit_net_derivative_formula", gap, tolerance);
  } else {
    r.skip("limit_net_derivative_formula", "frame is not spherical");
  }
  return r;
}

/// Y = X - i l^{-1} h(0): the spherical immersion recentred at the origin.
inline std::vector<CVector> recentre(const ImmersionSample& sample, const RVector& c) {
  const CVector center = sphere_center(c, sample.lambda);
  std::vector<CVector> out;
  out.reserve(sample.X.size());
  for (const auto& x : sample.X) out.push_back(x - center);
  return out;
}

/// Affine chart of CP^{n-1}: (Y_j / Y_chart)_{j != chart}.
inline std::vector<CVector> hopf_project(const std::vector<CVector>& y, int chart) {
  std::vector<CVector> out;
  out.reserve(y.size());
  for (const auto& v : y) {
    if (chart < 0 || chart >= v.size()) fail(ErrorKind::InvalidArgument, "chart index out of range");
    if (!(std::abs(v(chart)) > 1e-8)) fail(ErrorKind::ChartSingular, "chart component vanishes");
    CVector w(v.size() - 1);
    for (Eigen::Index j = 0, m = 0; j < v.size(); ++j)
      if (j != chart) w(m++) = v(j) / v(chart);
    out.push_back(w);
  }
  return out;
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_GEOMETRY_HPP
