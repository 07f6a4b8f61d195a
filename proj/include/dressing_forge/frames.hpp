#ifndef DRESSING_FORGE_FRAMES_HPP
#define DRESSING_FORGE_FRAMES_HPP

// Extended frames F(u, l) = [[E, X], [0, 1]] with F^{-1} dF = theta_l and
// F(0, l) = I. A frame is a vacuum seed plus an ordered dressing history; each
// record applies a closed-form update to the frame below it, so evaluation at
// any (u, l) needs no PDE solve.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "dressing_forge/algebra.hpp"
#include "dressing_forge/grid.hpp"
#include "dressing_forge/seed.hpp"

namespace dressing_forge {

struct FrameValue {
  CMatrix E;
  CVector X;
};

struct MetricPoint {
  CVector h;
  CMatrix beta;
};

/// Lax connection theta_l = [[i l delta + [delta, beta], delta h], [0, 0]] at one point.
struct LaxConnection {
  CMatrix beta;
  CVector h;

  /// theta_l(d/du_axis), an (n+1) x (n+1) matrix.
  CMatrix theta(cd lambda, int axis) const {
    const auto n = beta.rows();
    CMatrix out = CMatrix::Zero(n + 1, n + 1);
    CMatrix ekk = CMatrix::Zero(n, n);
    ekk(axis, axis) = 1.0;
    out.topLeftCorner(n, n) = kI * lambda * ekk + ekk * beta - beta * ekk;
    out(axis, n) = h(axis);
    return out;
  }
};

enum class RecordKind {
  Complex,        // g_{z, pi}, tau-real only
  Real,           // g_{i alpha, pi} with real pi
  Spherical,      // real one-pole with Im(pi) orthogonal to h(0)
  TwoPoleFirst,   // g_{z, pi} half of f_{z, pi}
  TwoPoleSecond,  // g_{-conj z, rho} half of f_{z, pi}
  Translation,    // k_{i alpha, b}
};

/// u-dependent data of a record: pi~ and eta for one-pole records, y for translations.
struct RecordPointData {
  CMatrix pi_tilde;
  CVector eta;
  CVector y;
};

class DressingRecord;

namespace frame_tol {
/// Distance (scaled by max(1, |p|)) below which evaluation switches to the contour form.
inline constexpr double kNearPole = 1e-4;
inline constexpr int kContourNodes = 32;
/// Apparent poles closer than this are treated as one.
inline constexpr double kPoleMerge = 1e-6;
}  // namespace frame_tol

class ExtendedFrame {
 public:
  ExtendedFrame() = default;
  explicit ExtendedFrame(SeedProfile seed) : seed_(std::make_shared<const SeedProfile>(std::move(seed))) {}

  int n() const { return seed_->n(); }
  const SeedProfile& seed() const { return *seed_; }
  const std::shared_ptr<const DressingRecord>& top() const noexcept { return top_; }

  /// Records from the seed upwards.
  std::vector<std::shared_ptr<const DressingRecord>> history() const;
  std::size_t depth() const { return history().size(); }

  /// Closed-form (E, X) at (u, l). Within kNearPole of an apparent pole of the
  /// history the value is taken from the Cauchy integral on a circle around
  /// the pole; the frame is entire in l, so this is exact up to quadrature.
  FrameValue eval(const RVector& u, cd lambda) const;

  /// Evaluation by the record formulas only, without pole handling.
  FrameValue eval_direct(const RVector& u, cd lambda) const;

  CMatrix E(const RVector& u, cd lambda) const { return eval(u, lambda).E; }
  CVector X(const RVector& u, cd lambda) const { return eval(u, lambda).X; }

  /// h and beta accumulated through the history.
  MetricPoint metric_at(const RVector& u) const;

  /// Potential from closed forms when every record has one (real, spherical
  /// and translation records); otherwise empty.
  std::optional<cd> closed_form_phi(const RVector& u) const;

  /// Poles of the individual record formulas (removable for the frame itself).
  std::vector<cd> apparent_poles() const;

  /// True when every record satisfies the sigma reality condition
  /// (real one-pole, spherical, complete two-pole pairs, translations).
  bool sigma_compatible() const;

  /// True when the metric is partial-invariant (constant seed and only
  /// sphere-preserving records), so X = -i l^{-1} (E h - h(0)).
  bool spherical() const;

  ExtendedFrame with_record(std::shared_ptr<const DressingRecord> record) const {
    ExtendedFrame out = *this;
    out.top_ = std::move(record);
    return out;
  }

 private:
  FrameValue eval_contour(const RVector& u, cd lambda, cd pole, double radius) const;

  std::shared_ptr<const SeedProfile> seed_;
  std::shared_ptr<const DressingRecord> top_;
};

/// One applied dressing: the factor data plus the frame it was applied to.
class DressingRecord {
 public:
  static std::shared_ptr<const DressingRecord> one_pole(RecordKind kind, ExtendedFrame parent, cd z,
                                                        HermitianProjection pi) {
    auto rec = std::shared_ptr<DressingRecord>(new DressingRecord());
    rec->kind_ = kind;
    rec->parent_ = std::move(parent);
    rec->pole_ = z;
    rec->pi_ = std::move(pi);
    return rec;
  }

  static std::shared_ptr<const DressingRecord> translation(ExtendedFrame parent, double alpha, RVector b) {
    auto rec = std::shared_ptr<DressingRecord>(new DressingRecord());
    rec->kind_ = RecordKind::Translation;
    rec->parent_ = std::move(parent);
    rec->pole_ = cd{0.0, alpha};
    rec->b_ = std::move(b);
    return rec;
  }

  RecordKind kind() const noexcept { return kind_; }
  bool is_translation() const noexcept { return kind_ == RecordKind::Translation; }
  const ExtendedFrame& parent() const noexcept { return parent_; }
  /// z for one-pole records, i alpha for translations.
  cd pole() const noexcept { return pole_; }
  double alpha() const noexcept { return pole_.imag(); }
  const HermitianProjection& pi() const noexcept { return pi_; }
  const RVector& b() const noexcept { return b_; }
  bool preserves_sphere() const noexcept { return preserves_sphere_; }

  /// Marks a real record whose projection kills h(0) of a spherical parent.
  std::shared_ptr<const DressingRecord> with_sphere_flag(bool flag) const {
    auto rec = std::shared_ptr<DressingRecord>(new DressingRecord());
    rec->kind_ = kind_;
    rec->parent_ = parent_;
    rec->pole_ = pole_;
    rec->pi_ = pi_;
    rec->b_ = b_;
    rec->preserves_sphere_ = flag;
    return rec;
  }

  std::vector<cd> poles() const {
    if (is_translation()) return {pole_};
    return {pole_, std::conj(pole_)};
  }

  /// pi~(u), eta(u) (or y(u)); memoised per u.
  RecordPointData point_data(const RVector& u) const {
    std::vector<double> key(u.data(), u.data() + u.size());
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    RecordPointData data = compute_point_data(u);
    std::lock_guard<std::mutex> lock(mutex_);
    if (cache_.size() > kCacheLimit) cache_.clear();
    cache_.emplace(std::move(key), data);
    return data;
  }

  /// Applies the record to the frame value below it at the same (u, l).
  FrameValue apply(const FrameValue& below, const RecordPointData& d, cd lambda) const {
    if (is_translation()) {
      FrameValue out = below;
      out.X += kI * (b_.cast<cd>() - below.E * d.y) / (lambda - pole_);
      return out;
    }
    const auto n = below.E.rows();
    const cd z = pole_;
    const cd zb = std::conj(z);
    const CMatrix& p = pi_.matrix();
    const CMatrix pperp = identity(n) - p;
    const CMatrix pt_perp = identity(n) - d.pi_tilde;
    const cd s = (lambda - zb) / (lambda - z);
    FrameValue out;
    // E~ = g_{z,pi} E g_{z,pi~}^{-1}
    out.E = (p + s * pperp) * below.E * (d.pi_tilde + (1.0 / s) * pt_perp);
    // X~ = g_{conj z, pi^perp} (X - (conj z - z)/(l - z) E pi~ eta)
    const CVector inner = below.X - ((zb - z) / (lambda - z)) * (below.E * (d.pi_tilde * d.eta));
    out.X = (pperp + (1.0 / s) * p) * inner;
    return out;
  }

 private:
  static constexpr std::size_t kCacheLimit = 1u << 18;

  DressingRecord() = default;

  RecordPointData compute_point_data(const RVector& u) const {
    RecordPointData d;
    if (is_translation()) {
      const CMatrix e_pole = parent_.E(u, pole_);
      d.y = solve_linear(e_pole, CVector(b_.cast<cd>()));
      return d;
    }
    // E(u, conj z)* = E(u, z)^{-1} by the tau reality condition.
    const FrameValue at_conj = parent_.eval(u, std::conj(pole_));
    const CMatrix span = at_conj.E.adjoint() * pi_.basis();
    d.pi_tilde = project_onto_span(span).matrix();
    d.eta = solve_linear(at_conj.E, at_conj.X);
    return d;
  }

  RecordKind kind_ = RecordKind::Complex;
  ExtendedFrame parent_;
  cd pole_;
  HermitianProjection pi_;
  RVector b_;
  bool preserves_sphere_ = false;

  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, RecordPointData> cache_;
};

inline std::vector<std::shared_ptr<const DressingRecord>> ExtendedFrame::history() const {
  std::vector<std::shared_ptr<const DressingRecord>> out;
  for (auto rec = top_; rec; rec = rec->parent().top()) out.push_back(rec);
  std::reverse(out.begin(), out.end());
  return out;
}

inline FrameValue ExtendedFrame::eval_direct(const RVector& u, cd lambda) const {
  if (!top_) return {vacuum_E(*seed_, u, lambda), vacuum_X(*seed_, u, lambda)};
  const FrameValue below = top_->parent().eval_direct(u, lambda);
  return top_->apply(below, top_->point_data(u), lambda);
}

inline std::vector<cd> ExtendedFrame::apparent_poles() const {
  std::vector<cd> out;
  for (const auto& rec : history())
    for (cd p : rec->poles()) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](cd q) { return std::abs(q - p) < frame_tol::kPoleMerge; });
      if (!seen) out.push_back(p);
    }
  return out;
}

inline FrameValue ExtendedFrame::eval(const RVector& u, cd lambda) const {
  if (!top_) return eval_direct(u, lambda);
  const auto poles = apparent_poles();
  const cd* nearest = nullptr;
  for (const cd& p : poles) {
    if (std::abs(lambda - p) < frame_tol::kNearPole * std::max(1.0, std::abs(p))) {
      if (nearest == nullptr || std::abs(lambda - p) < std::abs(lambda - *nearest)) nearest = &p;
    }
  }
  if (nearest == nullptr) return eval_direct(u, lambda);
  double gap = 1.0;
  for (const cd& q : poles)
    if (&q != nearest) gap = std::min(gap, std::abs(q - *nearest));
  const double radius = 0.3 * gap;
  if (!(radius > 2.0 * std::abs(lambda - *nearest))) {
    fail(ErrorKind::AtPole, "apparent poles too close together for contour evaluation");
  }
  return eval_contour(u, lambda, *nearest, radius);
}

inline FrameValue ExtendedFrame::eval_contour(const RVector& u, cd lambda, cd pole, double radius) const {
  // f(l) = (1/M) sum_k f(w_k) (w_k - p)/(w_k - l),  w_k = p + r e^{2 pi i k / M}
  const int m = frame_tol::kContourNodes;
  FrameValue acc{CMatrix::Zero(n(), n()), CVector::Zero(n())};
  for (int k = 0; k < m; ++k) {
    const cd w = pole + radius * std::exp(kI * (2.0 * std::numbers::pi * k / m));
    const cd weight = (w - pole) / (w - lambda) / double(m);
    const FrameValue f = eval_direct(u, w);
    acc.E += weight * f.E;
    acc.X += weight * f.X;
  }
  return acc;
}

inline MetricPoint ExtendedFrame::metric_at(const RVector& u) const {
  MetricPoint m{seed_->h(u).cast<cd>(), CMatrix::Zero(n(), n())};
  for (const auto& rec : history()) {
    const RecordPointData d = rec->point_data(u);
    if (rec->is_translation()) {
      m.h += d.y;
      continue;
    }
    const cd c = kI * (rec->pole() - std::conj(rec->pole()));
    m.beta += c * star_reduce(d.pi_tilde);
    m.h += c * (d.pi_tilde * d.eta);
  }
  return m;
}

inline std::optional<cd> ExtendedFrame::closed_form_phi(const RVector& u) const {
  cd phi = seed_->phi(u);
  for (const auto& rec : history()) {
    const double alpha = rec->alpha();
    const RecordPointData d = rec->point_data(u);
    switch (rec->kind()) {
      case RecordKind::Real:
        // phi~ = phi - 2 alpha eta^t pi~ eta
        phi -= 2.0 * alpha * (d.eta.transpose() * d.pi_tilde * d.eta)(0, 0);
        break;
      case RecordKind::Spherical: {
        // phi~ = phi - (2/alpha) h^t pi~ h
        const CVector h = rec->parent().metric_at(u).h;
        phi -= (2.0 / alpha) * (h.transpose() * d.pi_tilde * h)(0, 0);
        break;
      }
      case RecordKind::Translation: {
        // phi~ = phi + 2 b^t X(u, -i alpha) + (|y|^2 - |b|^2) / (2 alpha)
        const CVector x_neg = rec->parent().X(u, cd{0.0, -alpha});
        const CVector b = rec->b().cast<cd>();
        phi += 2.0 * (b.transpose() * x_neg)(0, 0) +
               ((d.y.transpose() * d.y)(0, 0) - (b.transpose() * b)(0, 0)) / (2.0 * alpha);
        break;
      }
      default:
        return std::nullopt;
    }
  }
  return phi;
}

inline bool ExtendedFrame::sigma_compatible() const {
  const auto h = history();
  for (std::size_t i = 0; i < h.size(); ++i) {
    switch (h[i]->kind()) {
      case RecordKind::Complex:
        return false;
      case RecordKind::TwoPoleFirst:
        if (i + 1 >= h.size() || h[i + 1]->kind() != RecordKind::TwoPoleSecond) return false;
        ++i;
        break;
      case RecordKind::TwoPoleSecond:
        return false;
      default:
        break;
    }
  }
  return true;
}

inline bool ExtendedFrame::spherical() const {
  if (!seed_->is_spherical()) return false;
  for (const auto& rec : history()) {
    const bool ok = rec->kind() == RecordKind::Spherical || (rec->kind() == RecordKind::Real && rec->preserves_sphere());
    if (!ok) return false;
  }
  return true;
}

/// vacuum_E / vacuum_X are in seed.hpp; these evaluate the full frame.
inline FrameValue frame_eval(const ExtendedFrame& frame, const RVector& u, cd lambda) { return frame.eval(u, lambda); }

/// dE/dl (u, 0) by 4th-order central differences (step 1e-3) plus one Richardson level.
inline CMatrix frame_dlambda_at_zero(const ExtendedFrame& frame, const RVector& u, double step = 1e-3) {
  auto central = [&](double h) {
    const CMatrix fp1 = frame.E(u, cd{h, 0.0});
    const CMatrix fm1 = frame.E(u, cd{-h, 0.0});
    const CMatrix fp2 = frame.E(u, cd{2.0 * h, 0.0});
    const CMatrix fm2 = frame.E(u, cd{-2.0 * h, 0.0});
    return CMatrix((-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h));
  };
  const CMatrix coarse = central(step);
  const CMatrix fine = central(0.5 * step);
  return (16.0 * fine - coarse) / 15.0;
}

/// Samples X(., lambda) on a grid.
inline ImmersionSample sample_immersion(const ExtendedFrame& frame, const Grid& grid, cd lambda) {
  ImmersionSample s{lambda, grid, {}};
  s.X.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s.X.push_back(frame.X(grid.point(i), lambda));
  return s;
}

namespace detail {

/// Cumulative trapezoid of f along t-values sorted outward from 0 (t[0] = 0).
inline void cumulative_trapezoid(const std::vector<double>& t, const std::vector<cd>& f, std::vector<cd>& out) {
  out.assign(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
}

}  // namespace detail

/// Staircase path integral of sum_i h_i^2 du_i from the origin to every grid
/// point (axis 0 first), trapezoid rule with the grid spacing on each segment.
inline std::vector<cd> integrate_potential_on_grid(const Grid& grid,
                                                   const std::function<CVector(const RVector&)>& h_of) {
  const int n = grid.n();
  std::vector<cd> phi(grid.size(), 0.0);
  // For each axis k and each prefix (u_0..u_{k-1}) on the grid, integrate
  // along axis k from 0 through the grid nodes, trailing axes at 0.
  for (int k = 0; k < n; ++k) {
    const GridAxis& ax = grid.axis(k);
    // t-values: 0 followed by nodes on the positive side ascending, and separately the negative side.
    std::vector<int> pos, neg;
    for (int i = 0; i < ax.points; ++i) (ax.node(i) >= 0.0 ? pos : neg).push_back(i);
    std::reverse(neg.begin(), neg.end());

    std::size_t prefixes = 1;
    for (int j = 0; j < k; ++j) prefixes *= static_cast<std::size_t>(grid.axis(j).points);
    for (std::size_t pre = 0; pre < prefixes; ++pre) {
      // Decode prefix indices.
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      std::size_t rem = pre;
      for (int j = k - 1; j >= 0; --j) {
        const auto p = static_cast<std::size_t>(grid.axis(j).points);
        idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % p);
        rem /= p;
      }
      RVector u = RVector::Zero(n);
      for (int j = 0; j < k; ++j) u(j) = grid.axis(j).node(idx[static_cast<std::size_t>(j)]);

      std::vector<cd> integral_at_node(static_cast<std::size_t>(ax.points), 0.0);
      for (const auto* side : {&pos, &neg}) {
        if (side->empty()) continue;
        std::vector<double> t{0.0};
        for (int i : *side) t.push_back(ax.node(i));
        std::vector<cd> f(t.size());
        for (std::size_t m = 0; m < t.size(); ++m) {
          u(k) = t[m];
          const CVector h = h_of(u);
          f[m] = h(k) * h(k);
        }
        std::vector<cd> cum;
        detail::cumulative_trapezoid(t, f, cum);
        for (std::size_t m = 0; m < side->size(); ++m) integral_at_node[static_cast<std::size_t>((*side)[m])] = cum[m + 1];
      }
      // Add this segment's contribution to every grid point sharing the prefix
      // (row-major: a fixed (i_0..i_k) is one contiguous block of stride(k) points).
      std::size_t base = 0;
      for (int j = 0; j < k; ++j) base += static_cast<std::size_t>(idx[static_cast<std::size_t>(j)]) * grid.stride(j);
      const std::size_t block = grid.stride(k);
      for (int i = 0; i < ax.points; ++i) {
        const std::size_t start = base + static_cast<std::size_t>(i) * block;
        for (std::size_t q = 0; q < block; ++q) phi[start + q] += integral_at_node[static_cast<std::size_t>(i)];
      }
    }
  }
  return phi;
}

/// h and beta from the closed-form accumulated updates on the grid; phi by
/// trapezoid staircase integration from the origin.
inline EgoroffMetric metric_from_frame(const ExtendedFrame& frame, const Grid& grid) {
  if (grid.n() != frame.n()) fail(ErrorKind::DimensionMismatch, "grid and frame dimensions differ");
  EgoroffMetric m;
  m.grid = grid;
  m.h.reserve(grid.size());
  m.beta.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const MetricPoint p = frame.metric_at(grid.point(i));
    bool positive = true;
    for (Eigen::Index j = 0; j < p.h.size(); ++j)
      positive = positive && p.h(j).real() > 0.0 && std::abs(p.h(j).imag()) < 1e-10 * std::max(1.0, std::abs(p.h(j)));
    if (!positive) ++m.nonpositive_points;
    m.h.push_back(p.h);
    m.beta.push_back(p.beta);
  }
  m.phi = integrate_potential_on_grid(grid, [&](const RVector& u) { return frame.metric_at(u).h; });
  return m;
}

/// Throws NonPositive when the metric left the immersion chart somewhere.
inline void require_positive(const EgoroffMetric& m) {
  if (m.nonpositive_points > 0) {
    fail(ErrorKind::NonPositive, std::to_string(m.nonpositive_points) + " grid points have a non-positive h_i");
  }
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_FRAMES_HPP
