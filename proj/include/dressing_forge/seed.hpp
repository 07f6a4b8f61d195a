#ifndef DRESSING_FORGE_SEED_HPP
#define DRESSING_FORGE_SEED_HPP

// Vacuum seeds: beta = 0 with one positive profile h_j(u_j) per axis. The
// associated family is the product of plane curves
//   X_j(u, l) = int_0^{u_j} h_j(t) e^{i l t} dt,   E = diag(e^{i l u_j}).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dressing_forge/algebra.hpp"

namespace dressing_forge {

/// Natural cubic spline through (knots, values).
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> knots, std::vector<double> values)
      : x_(std::move(knots)), y_(std::move(values)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) fail(ErrorKind::InvalidArgument, "spline needs >= 2 matching knots/values");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorKind::InvalidArgument, "spline knots must be strictly increasing");
    if (n == 2) return;
    // Tridiagonal system for second derivatives, natural end conditions.
    std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      sub[i] = h0;
      diag[i] = 2.0 * (h0 + h1);
      sup[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }

  double operator()(double t) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  const std::vector<double>& knots() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }

 private:
  std::vector<double> x_, y_, m_;
};

struct ConstantProfile {
  double r = 1.0;
};

/// h(t) = sum_k coeffs[k] t^k on [lo, hi].
struct PolynomialProfile {
  std::vector<double> coeffs;
  double lo = -1.0;
  double hi = 1.0;
};

/// Spline through positive samples, clamped below at half the smallest sample.
struct SampledProfile {
  CubicSpline spline;
  double floor = 0.0;
};

using AxisProfile = std::variant<ConstantProfile, PolynomialProfile, SampledProfile>;

inline SampledProfile make_sampled_profile(std::vector<double> knots, std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "sampled profile needs values");
  for (double v : values)
    if (!(v > 0.0)) fail(ErrorKind::InvalidArgument, "sampled profile values must be positive");
  const double floor = 0.5 * *std::min_element(values.begin(), values.end());
  return {CubicSpline(std::move(knots), std::move(values)), floor};
}

namespace detail {

inline double quad_tolerance() { return 1e-10; }

/// (e^w - 1)/w without cancellation for small |w|.
inline cd expm1_over(cd w) {
  if (std::abs(w) < 1e-8) return 1.0 + w / 2.0 + w * w / 6.0;
  const double a = w.real();
  const double b = w.imag();
  const double s = std::sin(0.5 * b);
  const cd em1{std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
  return em1 / w;
}

/// Moments M_k = int_0^u t^k e^{i l t} dt for k = 0..kmax.
inline std::vector<cd> oscillatory_moments(int kmax, double u, cd lambda) {
  std::vector<cd> out(static_cast<std::size_t>(kmax) + 1);
  const cd il = kI * lambda;
  if (std::abs(il * u) <= 2.0) {
    for (int k = 0; k <= kmax; ++k) {
      // sum_m (i l)^m u^{k+m+1} / (m! (k+m+1))
      cd term = std::pow(u, k + 1);  // m = 0 numerator
      cd sum = term / double(k + 1);
      for (int m = 1; m < 200; ++m) {
        term *= il * u / double(m);
        const cd add = term / double(k + m + 1);
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
      }
      out[static_cast<std::size_t>(k)] = sum;
    }
    return out;
  }
  const cd e = std::exp(il * u);
  out[0] = u * expm1_over(il * u);
  double upow = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    upow *= u;
    out[static_cast<std::size_t>(k)] = (upow * e - double(k) * out[static_cast<std::size_t>(k) - 1]) / il;
  }
  return out;
}

template <typename F>
double gk_integrate(F&& f, double a, double b) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, quad_tolerance(), &err);
}

/// Integrates f over [0, u] piecewise between spline knots.
template <typename F>
cd integrate_over_knots(const std::vector<double>& knots, double u, F&& f) {
  std::vector<double> cuts{0.0};
  const double lo = std::min(0.0, u);
  const double hi = std::max(0.0, u);
  for (double k : knots)
    if (k > lo && k < hi) cuts.push_back(k);
  cuts.push_back(u);
  std::sort(cuts.begin(), cuts.end());
  if (u < 0.0) std::reverse(cuts.begin(), cuts.end());
  cd total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double re = gk_integrate([&](double t) { return f(t).real(); }, a, b);
    const double im = gk_integrate([&](double t) { return f(t).imag(); }, a, b);
    total += cd{re, im};
  }
  return total;
}

}  // namespace detail

/// Per-axis positive profiles of a vacuum (beta = 0) flat Egoroff metric.
class SeedProfile {
 public:
  SeedProfile() = default;

  explicit SeedProfile(std::vector<AxisProfile> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) fail(ErrorKind::InvalidArgument, "seed needs at least one axis");
    for (std::size_t j = 0; j < axes_.size(); ++j) validate_axis(j);
  }

  /// Flat torus seed h = r (constant profiles).
  static SeedProfile constant(const std::vector<double>& r) {
    std::vector<AxisProfile> axes;
    for (double v : r) axes.emplace_back(ConstantProfile{v});
    return SeedProfile(std::move(axes));
  }

  int n() const noexcept { return static_cast<int>(axes_.size()); }
  const std::vector<AxisProfile>& axes() const noexcept { return axes_; }

  /// All profiles constant: the seed metric is spherical (partial-invariant).
  bool is_spherical() const {
    return std::all_of(axes_.begin(), axes_.end(),
                       [](const AxisProfile& a) { return std::holds_alternative<ConstantProfile>(a); });
  }

  std::pair<double, double> domain(int j) const {
    const auto& a = axes_.at(static_cast<std::size_t>(j));
    if (const auto* p = std::get_if<PolynomialProfile>(&a)) return {p->lo, p->hi};
    if (const auto* s = std::get_if<SampledProfile>(&a))
      return {s->spline.knots().front(), s->spline.knots().back()};
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }

  void check_domain(const RVector& u) const {
    if (u.size() != n()) fail(ErrorKind::DimensionMismatch, "parameter vector has wrong length");
    for (int j = 0; j < n(); ++j) {
      const auto [lo, hi] = domain(j);
      if (!(u(j) >= lo && u(j) <= hi)) {
        fail(ErrorKind::OutOfDomain, "u_" + std::to_string(j + 1) + " = " + std::to_string(u(j)) +
                                         " outside the seed domain");
      }
    }
  }

  double h_axis(int j, double t) const {
    return std::visit(
        [t](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantProfile>) {
            return p.r;
          } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
            double v = 0.0;
            for (std::size_t k = p.coeffs.size(); k-- > 0;) v = v * t + p.coeffs[k];
            return v;
          } else {
            return std::max(p.spline(t), p.floor);
          }
        },
        axes_.at(static_cast<std::size_t>(j)));
  }

  RVector h(const RVector& u) const {
    check_domain(u);
    RVector out(n());
    for (int j = 0; j < n(); ++j) out(j) = h_axis(j, u(j));
    return out;
  }

  /// int_0^t h_j(s) e^{i l s} ds.
  cd x_axis(int j, double t, cd lambda) const {
    return std::visit(
        [&](const auto& p) -> cd {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantProfile>) {
            return p.r * t * detail::expm1_over(kI * lambda * t);
          } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
            if (p.coeffs.empty()) return 0.0;
            const auto mom = detail::oscillatory_moments(static_cast<int>(p.coeffs.size()) - 1, t, lambda);
            cd sum = 0.0;
            for (std::size_t k = 0; k < p.coeffs.size(); ++k) sum += p.coeffs[k] * mom[k];
            return sum;
          } else {
            return detail::integrate_over_knots(p.spline.knots(), t, [&](double s) {
              return std::max(p.spline(s), p.floor) * std::exp(kI * lambda * s);
            });
          }
        },
        axes_.at(static_cast<std::size_t>(j)));
  }

  /// int_0^t h_j(s)^2 ds, the axis contribution to the potential.
  double phi_axis(int j, double t) const {
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantProfile>) {
            return p.r * p.r * t;
          } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
            const std::size_t m = p.coeffs.size();
            double sum = 0.0;
            for (std::size_t a = 0; a < m; ++a)
              for (std::size_t b = 0; b < m; ++b)
                sum += p.coeffs[a] * p.coeffs[b] * std::pow(t, double(a + b + 1)) / double(a + b + 1);
            return sum;
          } else {
            return detail::integrate_over_knots(p.spline.knots(), t, [&](double s) -> cd {
                     const double v = std::max(p.spline(s), p.floor);
                     return v * v;
                   }).real();
          }
        },
        axes_.at(static_cast<std::size_t>(j)));
  }

  double phi(const RVector& u) const {
    check_domain(u);
    double sum = 0.0;
    for (int j = 0; j < n(); ++j) sum += phi_axis(j, u(j));
    return sum;
  }

 private:
  void validate_axis(std::size_t j) const {
    const auto& a = axes_[j];
    if (const auto* c = std::get_if<ConstantProfile>(&a)) {
      if (!(c->r > 0.0)) fail(ErrorKind::InvalidArgument, "constant profile must be positive");
      return;
    }
    const auto [lo, hi] = domain(static_cast<int>(j));
    if (!(lo <= 0.0 && hi >= 0.0 && lo < hi)) fail(ErrorKind::InvalidArgument, "profile domain must contain 0");
    if (const auto* p = std::get_if<PolynomialProfile>(&a)) {
      if (p->coeffs.empty()) fail(ErrorKind::InvalidArgument, "polynomial profile needs coefficients");
      constexpr int samples = 2001;
      for (int i = 0; i < samples; ++i) {
        const double t = lo + (hi - lo) * i / double(samples - 1);
        if (!(h_axis(static_cast<int>(j), t) > 0.0)) {
          fail(ErrorKind::InvalidArgument, "polynomial profile is not positive on its domain");
        }
      }
    }
  }

  std::vector<AxisProfile> axes_;
};

/// diag(e^{i l u_j}).
inline CMatrix vacuum_E(const SeedProfile& seed, const RVector& u, cd lambda) {
  seed.check_domain(u);
  CMatrix out = CMatrix::Zero(seed.n(), seed.n());
  for (int j = 0; j < seed.n(); ++j) out(j, j) = std::exp(kI * lambda * u(j));
  return out;
}

inline CVector vacuum_X(const SeedProfile& seed, const RVector& u, cd lambda) {
  seed.check_domain(u);
  CVector out(seed.n());
  for (int j = 0; j < seed.n(); ++j) out(j) = seed.x_axis(j, u(j), lambda);
  return out;
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_SEED_HPP
