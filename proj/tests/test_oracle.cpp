#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"

#include "dressing_forge/dressing.hpp"
#include "dressing_forge/oracle.hpp"

using namespace dressing_forge;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

HermitianProjection line(std::initializer_list<cd> v) {
  CMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (cd x : v) m(i++, 0) = x;
  return project_onto_span(m);
}

ExtendedFrame torus2() { return ExtendedFrame(SeedProfile::constant({1.0, 0.7})); }

double gap(const FrameValue& a, const FrameValue& b) {
  return std::max(max_norm(CMatrix(a.E - b.E)), max_norm(CMatrix(a.X - b.X)));
}

}  // namespace

TEST_CASE("RK4 on the vacuum") {
  const ExtendedFrame f = torus2();
  const MetricField vac = [](const RVector&) {
    CVector h(2);
    h << 1.0, 0.7;
    return MetricPoint{h, CMatrix::Zero(2, 2)};
  };
  const RVector u = vec({0.6, -0.4});
  for (const cd l : {cd(1.0, 0.0), cd(0.5, 0.3)}) {
    const FrameValue a = integrate_frame(vac, 2, l, PathSpec::staircase(u, {0, 1}), 1e-2);
    CHECK(gap(a, f.eval(u, l)) < 1e-10);
  }
}

TEST_CASE("RK4 against the dressed frame") {
  const ExtendedFrame f = dress_real(torus2(), 0.4, line({1.0, 0.5}));
  const MetricField field = exact_field(f);
  const RVector u = vec({0.7, -0.5});
  const cd l(0.8, 0.0);
  const FrameValue ref = f.eval(u, l);
  const double e1 = gap(integrate_frame(field, 2, l, PathSpec::staircase(u, {0, 1}), 0.1), ref);
  const double e2 = gap(integrate_frame(field, 2, l, PathSpec::staircase(u, {0, 1}), 0.05), ref);
  CHECK(estimate_order(e1, e2) > 3.6);
  CHECK(estimate_order(e1, e2) < 4.4);
  CHECK(gap(integrate_frame(field, 2, l, PathSpec::staircase(u, {0, 1}), 1e-2), ref) < 1e-9);

  const FrameValue a = integrate_frame(field, 2, l, PathSpec::staircase(u, {0, 1}), 1e-2);
  const FrameValue b = integrate_frame(field, 2, l, PathSpec::staircase(u, {1, 0}), 1e-2);
  CHECK(gap(a, b) < 1e-9);

  const auto checked = integrate_frame_checked(field, 2, l, PathSpec::staircase(u, {1, 0}), 0.05, ref);
  REQUIRE(checked.residual.has_value());
  CHECK(*checked.residual < 1e-6);
  CHECK(checked.order > 3.5);
}

TEST_CASE("RK4 on a two-pole dressing in three dimensions") {
  const ExtendedFrame f =
      dress_two_pole(ExtendedFrame(SeedProfile::constant({1.0, 0.7, 0.5})), cd(0.4, 0.9), line({1.0, cd(0.3, 0.5), -0.2}));
  const RVector u = vec({0.3, -0.6, 0.5});
  const cd l(-0.7, 0.2);
  const FrameValue a = integrate_frame(exact_field(f), 3, l, PathSpec::staircase(u, {2, 0, 1}), 1e-2);
  CHECK(gap(a, f.eval(u, l)) < 1e-9);
}

TEST_CASE("step too large is reported") {
  const ExtendedFrame f = dress_real(torus2(), 0.4, line({1.0, 0.5}));
  try {
    integrate_frame_checked(exact_field(f), 2, 40.0, PathSpec::staircase(vec({0.9, 0.9}), {0, 1}), 0.3);
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepTooLarge);
  }
  CHECK_THROWS_AS(integrate_frame(exact_field(f), 2, 1.0, PathSpec::staircase(vec({0.5, 0.5}), {0, 1}), 0.0), Error);
}

TEST_CASE("estimate_order") {
  CHECK(std::abs(estimate_order(16.0, 1.0) - 4.0) < 1e-15);
  CHECK(std::abs(estimate_order(1e-4, 2.5e-5) - 2.0) < 1e-12);
}

TEST_CASE("real-dressing system against the algebraic dressing") {
  const auto base = torus2();
  const double alpha = 0.4;
  const HermitianProjection pi = line({1.0, 0.5});
  for (const RVector& b : {RVector(RVector::Zero(2)), vec({1.0, 0.0})}) {
    const ExtendedFrame f = dress_real_translated(base, alpha, pi, b);
    const auto& real_rec = f.top()->parent().top();
    for (const RVector& u : {vec({0.5, -0.4}), vec({-0.7, 0.3})}) {
      const BfResult r = integrate_bf(exact_field(base), alpha, pi.matrix(), b, PathSpec::staircase(u, {0, 1}), 1e-2);
      // h~ = h - 2 alpha y
      const CVector y = (base.metric_at(u).h - f.metric_at(u).h) / (2.0 * alpha);
      CHECK(max_norm(CMatrix(r.pi - real_rec->point_data(u).pi_tilde)) < 1e-9);
      CHECK(max_norm(CMatrix(r.y - y)) < 1e-9);
      CHECK(r.max_correction < 1e-8);
      CHECK(r.steps > 0);
    }
  }
}

TEST_CASE("real-dressing system has trivial fixed points") {
  const auto base = dress_real(torus2(), 0.3, line({0.4, 1.0}));
  const RVector u = vec({0.5, -0.6});
  const BfResult zero = integrate_bf(exact_field(base), 0.5, CMatrix::Zero(2, 2), RVector::Zero(2), PathSpec::staircase(u, {0, 1}), 0.05);
  CHECK(max_norm(zero.pi) == 0.0);
  CHECK(zero.y.norm() == 0.0);
  const BfResult full = integrate_bf(exact_field(base), 0.5, identity(2), RVector::Zero(2), PathSpec::staircase(u, {1, 0}), 0.05);
  CHECK(max_norm(CMatrix(full.pi - identity(2))) < 1e-14);
}

TEST_CASE("projection drift is detected") {
  try {
    integrate_bf(exact_field(torus2()), 6.0, line({1.0, 0.5}).matrix(), RVector::Zero(2),
                 PathSpec::staircase(vec({0.9, 0.9}), {0, 1}), 0.45);
    FAIL("expected ProjectionDrift");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ProjectionDrift);
  }
}

TEST_CASE("reproject") {
  const CMatrix p = line({1.0, 0.5}).matrix();
  CMatrix noisy = p;
  noisy(0, 1) += 1e-7;
  CHECK(max_norm(CMatrix(reproject(noisy) - p)) < 1e-6);
  CHECK(max_norm(CMatrix(reproject(p) - p)) < 1e-15);
}

TEST_CASE("grid interpolation") {
  // cubic data are reproduced exactly
  const Grid g = Grid::uniform(2, -1.0, 1.0, 9);
  EgoroffMetric m;
  m.grid = g;
  auto h_of = [](const RVector& u) {
    CVector h(2);
    h << 1.0 + u(0) * u(0) * u(0) - 0.5 * u(1), 0.7 + u(0) * u(1) * u(1);
    return h;
  };
  for (std::size_t p = 0; p < g.size(); ++p) {
    const RVector u = g.point(p);
    m.h.push_back(h_of(u));
    CMatrix b = CMatrix::Zero(2, 2);
    b(0, 1) = b(1, 0) = u(0) * u(1);
    m.beta.push_back(b);
  }
  m.phi.assign(g.size(), 0.0);
  const GridInterpolator interp(m);
  for (const RVector& u : {vec({0.13, -0.77}), vec({-0.99, 0.5}), vec({1.0, 1.0})}) {
    const MetricPoint v = interp(u);
    CHECK(max_norm(CMatrix(v.h - h_of(u))) < 1e-13);
    CHECK(std::abs(v.beta(0, 1) - u(0) * u(1)) < 1e-13);
  }
  CHECK_THROWS_AS(interp(vec({1.5, 0.0})), Error);

  // smooth field: interpolated oracle still tracks the frame
  const ExtendedFrame f = dress_real(torus2(), 0.4, line({1.0, 0.5}));
  const auto fine = metric_from_frame(f, Grid::uniform(2, -1.0, 1.0, 81));
  const RVector u = vec({0.6, -0.45});
  const FrameValue a = integrate_frame(GridInterpolator(fine), 2, 0.8, PathSpec::staircase(u, {0, 1}), 0.025);
  CHECK(gap(a, f.eval(u, 0.8)) < 1e-5);
}
