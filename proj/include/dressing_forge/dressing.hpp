#ifndef DRESSING_FORGE_DRESSING_HPP
#define DRESSING_FORGE_DRESSING_HPP

// Dressing actions on extended frames. Every operation appends records to the
// frame history; metric fields follow from ExtendedFrame::metric_at and the
// potential from ExtendedFrame::closed_form_phi.

#include <functional>
#include <string>
#include <utility>

#include "dressing_forge/frames.hpp"
#include "dressing_forge/loop_factors.hpp"
#include "dressing_forge/report.hpp"

namespace dressing_forge {

namespace dressing_tol {
/// |pi h(0)| below this counts as Im(pi) orthogonal to h(0).
inline constexpr double kSphereCondition = 1e-10;
}  // namespace dressing_tol

using EEvaluator = std::function<CMatrix(const RVector&, cd)>;

/// E~ = g_{z,pi} E g_{z,pi~}^{-1} with pi~ the projection onto E(u, conj z)* Im(pi).
inline EEvaluator dress_frame_E(EEvaluator e, cd z, HermitianProjection pi) {
  if (z.imag() == 0.0) fail(ErrorKind::InvalidArgument, "dressing pole must be off the real axis");
  return [e = std::move(e), z, pi = std::move(pi)](const RVector& u, cd lambda) -> CMatrix {
    const CMatrix ez = e(u, std::conj(z));
    if (ez.rows() != pi.dim()) fail(ErrorKind::DimensionMismatch, "projection and frame dimensions differ");
    const CMatrix pt = project_onto_span(CMatrix(ez.adjoint() * pi.basis())).matrix();
    const auto n = pt.rows();
    const cd s = (lambda - std::conj(z)) / (lambda - z);
    return (pi.matrix() + s * pi.complement()) * e(u, lambda) * (pt + (1.0 / s) * (identity(n) - pt));
  };
}

namespace detail {

inline void require_dim(const ExtendedFrame& frame, Eigen::Index dim, const char* what) {
  if (dim != frame.n()) fail(ErrorKind::DimensionMismatch, std::string(what) + ": dimension does not match the frame");
}

inline double sphere_defect(const ExtendedFrame& frame, const HermitianProjection& pi) {
  const CVector c = frame.seed().h(RVector::Zero(frame.n())).cast<cd>();
  return (pi.matrix() * c).norm();
}

}  // namespace detail

/// Dressing by the one-pole factor g_{z,pi}. Pure-imaginary z with real pi is
/// recorded as a real one-pole dressing.
inline ExtendedFrame dress_extended(const ExtendedFrame& frame, cd z, const HermitianProjection& pi) {
  if (z.imag() == 0.0) fail(ErrorKind::InvalidArgument, "dressing pole must be off the real axis");
  detail::require_dim(frame, pi.dim(), "dress_extended");
  const RecordKind kind = (z.real() == 0.0 && pi.is_real()) ? RecordKind::Real : RecordKind::Complex;
  return frame.with_record(DressingRecord::one_pole(kind, frame, z, pi));
}

/// g_{i alpha, pi} with real pi: h~ = h - 2 alpha pi~ eta, beta~ = beta - 2 alpha pi~_*.
inline ExtendedFrame dress_real(const ExtendedFrame& frame, double alpha, const HermitianProjection& pi) {
  if (alpha == 0.0 || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "alpha must be a nonzero real");
  if (!pi.is_real()) fail(ErrorKind::InvalidArgument, "real dressing needs a real projection");
  detail::require_dim(frame, pi.dim(), "dress_real");
  auto rec = DressingRecord::one_pole(RecordKind::Real, frame, cd{0.0, alpha}, pi);
  if (frame.spherical() && detail::sphere_defect(frame, pi) < dressing_tol::kSphereCondition) {
    rec = rec->with_sphere_flag(true);
  }
  return frame.with_record(std::move(rec));
}

/// Real dressing of a spherical frame that stays spherical: requires Im(pi) orthogonal to h(0).
inline ExtendedFrame dress_spherical(const ExtendedFrame& frame, double alpha, const HermitianProjection& pi) {
  if (alpha == 0.0 || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "alpha must be a nonzero real");
  if (!pi.is_real()) fail(ErrorKind::InvalidArgument, "spherical dressing needs a real projection");
  detail::require_dim(frame, pi.dim(), "dress_spherical");
  if (!frame.spherical()) {
    fail(ErrorKind::SphericalViolation, "spherical dressing needs a spherical frame (constant seed, sphere-preserving history)");
  }
  const double defect = detail::sphere_defect(frame, pi);
  if (!(defect < dressing_tol::kSphereCondition)) {
    fail(ErrorKind::SphericalViolation,
         "sphere preservation requires Im(pi) orthogonal to h(0); |pi h(0)| = " + std::to_string(defect));
  }
  auto rec = DressingRecord::one_pole(RecordKind::Spherical, frame, cd{0.0, alpha}, pi)->with_sphere_flag(true);
  return frame.with_record(std::move(rec));
}

/// k_{i alpha, b}: X~ = X + i (b - E E(u, i alpha)^{-1} b)/(l - i alpha), h~ = h + E(u, i alpha)^{-1} b.
inline ExtendedFrame dress_translation(const ExtendedFrame& frame, double alpha, const RVector& b) {
  if (alpha == 0.0 || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "alpha must be a nonzero real");
  detail::require_dim(frame, b.size(), "dress_translation");
  return frame.with_record(DressingRecord::translation(frame, alpha, b));
}

/// r_{i alpha, pi, b}: real dressing followed by the translation k_{-i alpha, -2 alpha b}.
/// The metric satisfies h~ = h - 2 alpha y with y(0) = b.
inline ExtendedFrame dress_real_translated(const ExtendedFrame& frame, double alpha, const HermitianProjection& pi,
                                           const RVector& b) {
  return dress_translation(dress_real(frame, alpha, pi), -alpha, -2.0 * alpha * b);
}

/// f_{z,pi} = g_{-conj z, rho} g_{z,pi}, applied as two one-pole records.
inline ExtendedFrame dress_two_pole(const ExtendedFrame& frame, cd z, const HermitianProjection& pi) {
  if (z.imag() == 0.0) fail(ErrorKind::InvalidArgument, "two-pole dressing needs Im z != 0");
  if (std::abs(z.real()) <= pole_tolerance(z)) {
    fail(ErrorKind::PoleCollision, "two-pole dressing needs Re z != 0 (z and -conj z coincide)");
  }
  detail::require_dim(frame, pi.dim(), "dress_two_pole");
  const TwoPoleFactor f = make_two_pole(z, pi);
  const ExtendedFrame first = frame.with_record(DressingRecord::one_pole(RecordKind::TwoPoleFirst, frame, z, pi));
  return first.with_record(DressingRecord::one_pole(RecordKind::TwoPoleSecond, first, -std::conj(z), f.rho));
}

/// Residue of the real-dressed X~ at l = -i alpha,
/// -2 i alpha pi (X_{-i alpha} - E_{-i alpha} pi~ E_{i alpha}^t X_{-i alpha}), for the top record.
inline CVector real_dressing_residue(const ExtendedFrame& dressed, const RVector& u) {
  const auto& rec = dressed.top();
  if (!rec || (rec->kind() != RecordKind::Real && rec->kind() != RecordKind::Spherical)) {
    fail(ErrorKind::InvalidArgument, "residue check needs a frame whose last record is a real dressing");
  }
  const double alpha = rec->alpha();
  const ExtendedFrame& parent = rec->parent();
  const FrameValue minus = parent.eval(u, cd{0.0, -alpha});
  const CMatrix e_plus = parent.E(u, cd{0.0, alpha});
  const CMatrix pt = rec->point_data(u).pi_tilde;
  const CVector inner = minus.X - minus.E * (pt * (e_plus.transpose() * minus.X));
  return cd{0.0, -2.0 * alpha} * (rec->pi().matrix() * inner);
}

struct PermutedDressing {
  ExtendedFrame f12;  // g_{z2,rho2} g_{z1,pi1}
  ExtendedFrame f21;  // g_{z1,rho1} g_{z2,pi2}
  HermitianProjection rho1;
  HermitianProjection rho2;
  VerificationReport report;
};

struct PermutationSampling {
  Grid grid;
  std::vector<cd> lambdas;
  double tolerance = 1e-9;
};

/// Both orderings of a two-factor dressing, computed independently, with the
/// frame, h and beta discrepancies and the transported-eta closed form for h12.
inline PermutedDressing dress_permuted(const ExtendedFrame& frame, cd z1, const HermitianProjection& pi1, cd z2,
                                       const HermitianProjection& pi2, const PermutationSampling& sampling) {
  auto [rho1, rho2] = permute_factors(z1, pi1, z2, pi2);
  PermutedDressing out{dress_extended(dress_extended(frame, z1, pi1), z2, rho2),
                       dress_extended(dress_extended(frame, z2, pi2), z1, rho1), rho1, rho2, {}};

  double frame_gap = 0.0;
  double h_gap = 0.0;
  double beta_gap = 0.0;
  double h12_closed_gap = 0.0;
  const auto& first = out.f12.top()->parent();  // frame dressed by g_{z1,pi1}
  for (std::size_t i = 0; i < sampling.grid.size(); ++i) {
    const RVector u = sampling.grid.point(i);
    for (const cd l : sampling.lambdas) {
      const FrameValue a = out.f12.eval(u, l);
      const FrameValue b = out.f21.eval(u, l);
      frame_gap = std::max({frame_gap, max_norm(a.E - b.E), max_norm(CMatrix(a.X - b.X))});
    }
    const MetricPoint m12 = out.f12.metric_at(u);
    const MetricPoint m21 = out.f21.metric_at(u);
    h_gap = std::max(h_gap, max_norm(CMatrix(m12.h - m21.h)));
    beta_gap = std::max(beta_gap, max_norm(m12.beta - m21.beta));

    // h12 = h + i(z1 - conj z1) pi~1 eta1 + i(z2 - conj z2) rho~2 eta12 with
    // eta12 = g_{conj z1, pi~1^perp}(conj z2) eta2 + (conj z1 - z1)/(conj z1 - conj z2) pi~1 eta1.
    const RecordPointData d1 = first.top()->point_data(u);
    const RecordPointData d12 = out.f12.top()->point_data(u);
    const FrameValue base = frame.eval(u, std::conj(z2));
    const CVector eta2 = solve_linear(base.E, base.X);
    const auto n = d1.pi_tilde.rows();
    const cd z1b = std::conj(z1);
    const cd z2b = std::conj(z2);
    const CMatrix g = (identity(n) - d1.pi_tilde) + ((z2b - z1) / (z2b - z1b)) * d1.pi_tilde;
    const CVector eta12 = g * eta2 + ((z1b - z1) / (z1b - z2b)) * (d1.pi_tilde * d1.eta);
    const CVector h12 = frame.metric_at(u).h + kI * (z1 - z1b) * (d1.pi_tilde * d1.eta) +
                        kI * (z2 - z2b) * (d12.pi_tilde * eta12);
    h12_closed_gap = std::max(h12_closed_gap, max_norm(CMatrix(h12 - m21.h)));
  }
  out.report.add("frame_F12_vs_F21", frame_gap, sampling.tolerance);
  out.report.add("h12_vs_h21", h_gap, sampling.tolerance);
  out.report.add("beta12_vs_beta21", beta_gap, sampling.tolerance);
  out.report.add("h12_transport_formula", h12_closed_gap, sampling.tolerance);
  return out;
}

/// Spherical metrics/immersions sharing the rotation coefficients of a
/// sigma-compatible frame: h~(u) = E~(u,0)^{-1} c~, X~ = -i l^{-1}(E~(u,l) h~(u) - c~).
class SphericalFamily {
 public:
  SphericalFamily(ExtendedFrame frame, RVector c) : frame_(std::move(frame)), c_(std::move(c)) {
    detail::require_dim(frame_, c_.size(), "spherical family");
  }

  const ExtendedFrame& frame() const noexcept { return frame_; }
  const RVector& center_data() const noexcept { return c_; }

  CVector h(const RVector& u) const { return solve_linear(frame_.E(u, cd{0.0, 0.0}), CVector(c_.cast<cd>())); }

  CVector X(const RVector& u, cd lambda) const {
    if (lambda == cd{0.0, 0.0}) fail(ErrorKind::InvalidArgument, "spherical family X needs lambda != 0");
    return (-kI / lambda) * (frame_.E(u, lambda) * h(u) - c_.cast<cd>());
  }

 private:
  ExtendedFrame frame_;
  RVector c_;
};

/// Dresses a spherical frame by a real one-pole or two-pole factor and attaches c~.
inline SphericalFamily dress_spherical_family(const ExtendedFrame& frame, const LoopFactor& factor, const RVector& c) {
  if (const auto* g = std::get_if<RealOnePoleFactor>(&factor)) {
    return {dress_real(frame, g->alpha, g->pi), c};
  }
  if (const auto* f = std::get_if<TwoPoleFactor>(&factor)) {
    return {dress_two_pole(frame, f->z, f->pi), c};
  }
  fail(ErrorKind::InvalidArgument, "spherical family needs a real one-pole or two-pole factor");
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_DRESSING_HPP
