#ifndef DRESSING_FORGE_LOOP_FACTORS_HPP
#define DRESSING_FORGE_LOOP_FACTORS_HPP

// Rational loop elements g : CP^1 -> GL(n, C) normalised by g(inf) = I.
//
//   g_{a1,a2,pi}(l) = pi + (l - a2)/(l - a1) (I - pi)      two-point factor
//   g_{z,pi}        = g_{z, conj z, pi}                    tau-real one-pole
//   f_{z,pi}        = g_{-conj z, rho} g_{z, pi}           two-pole generator
//   k_{i a, b}(l)   = [[I, i b/(l - i a)], [0, 1]]          translation, (n+1) x (n+1)

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "dressing_forge/algebra.hpp"
#include "dressing_forge/report.hpp"

namespace dressing_forge {

inline double pole_tolerance(cd pole) { return 1e-8 * std::max(1.0, std::abs(pole)); }

struct TwoPointFactor {
  cd pole;  // alpha_1
  cd zero;  // alpha_2
  HermitianProjection pi;
};

/// g_{i alpha, pi} with real alpha != 0 and real pi: satisfies both reality conditions.
struct RealOnePoleFactor {
  double alpha = 0.0;
  HermitianProjection pi;

  cd pole() const { return {0.0, alpha}; }
};

/// f_{z,pi} = g_{-conj z, rho} g_{z, pi}; rho is derived, use make_two_pole.
struct TwoPoleFactor {
  cd z;
  HermitianProjection pi;
  HermitianProjection rho;
};

struct TranslationFactor {
  double alpha = 0.0;
  RVector b;
};

using LoopFactor = std::variant<TwoPointFactor, RealOnePoleFactor, TwoPoleFactor, TranslationFactor>;

/// The tau-real one-pole factor g_{z,pi} = g_{z, conj z, pi}.
inline TwoPointFactor make_one_pole(cd z, HermitianProjection pi) {
  if (z.imag() == 0.0) fail(ErrorKind::InvalidArgument, "one-pole factor needs a non-real pole");
  return {z, std::conj(z), std::move(pi)};
}

inline RealOnePoleFactor make_real_one_pole(double alpha, HermitianProjection pi) {
  if (alpha == 0.0 || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "alpha must be a nonzero real");
  if (!pi.is_real()) fail(ErrorKind::InvalidArgument, "real one-pole factor needs a real projection");
  return {alpha, std::move(pi)};
}

/// Evaluates g_{a1,a2,pi}(lambda) from raw data.
inline CMatrix eval_two_point(cd pole, cd zero, const CMatrix& pi, cd lambda) {
  if (std::abs(lambda - pole) <= pole_tolerance(pole)) {
    fail(ErrorKind::AtPole, "evaluation within pole tolerance of a factor pole");
  }
  const auto n = pi.rows();
  const cd s = (lambda - zero) / (lambda - pole);
  return pi + s * (identity(n) - pi);
}

inline CMatrix eval_factor(const TwoPointFactor& g, cd lambda) {
  return eval_two_point(g.pole, g.zero, g.pi.matrix(), lambda);
}

inline CMatrix eval_factor(const RealOnePoleFactor& g, cd lambda) {
  return eval_two_point(g.pole(), std::conj(g.pole()), g.pi.matrix(), lambda);
}

inline CMatrix eval_factor(const TwoPoleFactor& g, cd lambda) {
  const CMatrix outer = eval_two_point(-std::conj(g.z), -g.z, g.rho.matrix(), lambda);
  const CMatrix inner = eval_two_point(g.z, std::conj(g.z), g.pi.matrix(), lambda);
  return outer * inner;
}

inline CMatrix eval_factor(const TranslationFactor& g, cd lambda) {
  const cd pole{0.0, g.alpha};
  if (std::abs(lambda - pole) <= pole_tolerance(pole)) {
    fail(ErrorKind::AtPole, "evaluation within pole tolerance of the translation pole");
  }
  const auto n = g.b.size();
  CMatrix out = identity(n + 1);
  out.topRightCorner(n, 1) = (kI / (lambda - pole)) * g.b.cast<cd>();
  return out;
}

inline CMatrix eval_factor(const LoopFactor& g, cd lambda) {
  return std::visit([&](const auto& f) { return eval_factor(f, lambda); }, g);
}

/// Exact limit at lambda = infinity.
inline CMatrix eval_at_infinity(const LoopFactor& g) {
  return std::visit(
      [](const auto& f) -> CMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, TranslationFactor>) {
          return identity(f.b.size() + 1);
        } else {
          return identity(f.pi.dim());
        }
      },
      g);
}

inline TwoPointFactor invert_factor(const TwoPointFactor& g) { return {g.zero, g.pole, g.pi}; }

/// Hermitian projection onto M * Im(pi), with M applied to the stored basis.
inline HermitianProjection transport_image(const CMatrix& m, const HermitianProjection& pi) {
  return project_onto_span(m * pi.basis());
}

/// Builds f_{z,pi}: rho is the Hermitian projection onto g_{z,pi}(-conj z) Im(conj pi).
inline TwoPoleFactor make_two_pole(cd z, HermitianProjection pi) {
  if (z.real() == 0.0 || z.imag() == 0.0) {
    fail(ErrorKind::InvalidArgument, "two-pole factor needs a pole off both axes");
  }
  const CMatrix g_at = eval_two_point(z, std::conj(z), pi.matrix(), -std::conj(z));
  HermitianProjection rho = transport_image(g_at, pi.conjugate());
  return {z, std::move(pi), std::move(rho)};
}

/// Poles of a factor (where eval_factor raises AtPole).
inline std::vector<cd> factor_poles(const LoopFactor& g) {
  return std::visit(
      [](const auto& f) -> std::vector<cd> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, TwoPointFactor>) return {f.pole};
        if constexpr (std::is_same_v<T, RealOnePoleFactor>) return {f.pole()};
        if constexpr (std::is_same_v<T, TwoPoleFactor>) return {f.z, -std::conj(f.z)};
        if constexpr (std::is_same_v<T, TranslationFactor>) return {cd{0.0, f.alpha}};
      },
      g);
}

/// Reports the tau residual max |g(conj l)* g(l) - I| and the sigma residual
/// max |g(-l)^t g(l) - I| over the samples. The sigma check is asserted only for
/// the tau-sigma generators; for translations it is the (n+1)-block condition
/// conj(k(l)) = k(-conj l) and tau is taken on the linear block.
inline VerificationReport check_reality(const LoopFactor& g, std::span<const cd> samples,
                                        double tau_tolerance = 1e-12, double sigma_tolerance = 1e-12) {
  double tau = 0.0;
  double sigma = 0.0;
  const bool is_translation = std::holds_alternative<TranslationFactor>(g);
  for (const cd l : samples) {
    const CMatrix gl = eval_factor(g, l);
    const CMatrix gbar = eval_factor(g, std::conj(l));
    const CMatrix gneg = eval_factor(g, -l);
    if (is_translation) {
      const auto n = gl.rows() - 1;
      const CMatrix a = gl.topLeftCorner(n, n);
      const CMatrix abar = gbar.topLeftCorner(n, n);
      tau = std::max(tau, max_norm(abar.adjoint() * a - identity(n)));
      const CMatrix gnegbar = eval_factor(g, -std::conj(l));
      sigma = std::max(sigma, max_norm(CMatrix(gl.conjugate()) - gnegbar));
    } else {
      const auto n = gl.rows();
      tau = std::max(tau, max_norm(gbar.adjoint() * gl - identity(n)));
      sigma = std::max(sigma, max_norm(gneg.transpose() * gl - identity(n)));
    }
  }
  const bool sigma_asserted = !std::holds_alternative<TwoPointFactor>(g);
  VerificationReport report;
  report.add("tau_reality", tau, tau_tolerance);
  auto& rec = report.add("sigma_reality", sigma, sigma_tolerance);
  if (!sigma_asserted) {
    // One-pole complex factors are only tau-real; the residual is informative.
    rec.status = "not asserted for this factor type";
    rec.pass = true;
  }
  return report;
}

/// Recomputes projections so that g_{z2,rho2} g_{z1,pi1} = g_{z1,rho1} g_{z2,pi2}.
inline std::pair<HermitianProjection, HermitianProjection> permute_factors(cd z1, const HermitianProjection& pi1,
                                                                           cd z2, const HermitianProjection& pi2) {
  if (z1.imag() == 0.0 || z2.imag() == 0.0) fail(ErrorKind::InvalidArgument, "poles must be off the real axis");
  const double t = pole_tolerance(z1);
  if (std::abs(z1 - z2) <= t || std::abs(z1 - std::conj(z2)) <= t) {
    fail(ErrorKind::PoleCollision, "z1 coincides with z2 or its conjugate");
  }
  const CMatrix g2_at_z1 = eval_two_point(z2, std::conj(z2), pi2.matrix(), z1);
  const CMatrix g1_at_z2 = eval_two_point(z1, std::conj(z1), pi1.matrix(), z2);
  return {transport_image(g2_at_z1, pi1), transport_image(g1_at_z2, pi2)};
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_LOOP_FACTORS_HPP
