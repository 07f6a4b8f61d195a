#include <random>

#include "catch_amalgamated.hpp"

#include "dressing_forge/algebra.hpp"

using namespace dressing_forge;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cd(g(rng), g(rng));
  return m;
}

}  // namespace

TEST_CASE("projection onto a coordinate axis") {
  CMatrix v(2, 1);
  v << 1.0, 0.0;
  const auto p = project_onto_span(v);
  CMatrix expected(2, 2);
  expected << 1.0, 0.0, 0.0, 0.0;
  CHECK(max_norm(CMatrix(p.matrix() - expected)) < 1e-14);
  CHECK(p.rank() == 1);
  CHECK(p.is_real());
}

TEST_CASE("projection onto the diagonal line") {
  CMatrix v(2, 1);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto p = project_onto_span(v);
  CMatrix expected = CMatrix::Constant(2, 2, 0.5);
  CHECK(max_norm(CMatrix(p.matrix() - expected)) < 1e-14);
}

TEST_CASE("projection onto a complex line matches the scalar formula") {
  // V = (1, i): V*V = 2 and V V* = [[1, -i], [i, 1]].
  CMatrix v(2, 1);
  v << 1.0, kI;
  const cd vv = std::conj(v(0)) * v(0) + std::conj(v(1)) * v(1);
  CMatrix expected(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) expected(i, j) = v(i) * std::conj(v(j)) / vv;
  const auto p = project_onto_span(v);
  CHECK(std::abs(expected(0, 1) - cd(0.0, -0.5)) < 1e-15);
  CHECK(max_norm(CMatrix(p.matrix() - expected)) < 1e-14);
  CHECK_FALSE(p.is_real());
}

TEST_CASE("dependent columns are rejected") {
  CMatrix v(3, 2);
  v << 1.0, 2.0, 0.5, 1.0, -1.0, -2.0;
  CHECK_THROWS_AS(project_onto_span(v), Error);
  try {
    project_onto_span(v);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
  CHECK_THROWS_AS(project_onto_span(CMatrix::Zero(2, 1)), Error);
}

TEST_CASE("projection depends only on the column span") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const Eigen::Index k = 1 + trial % static_cast<int>(n - 1);
    const CMatrix v = random_matrix(rng, n, k);
    CMatrix mix = random_matrix(rng, k, k) + 3.0 * identity(k);
    const auto a = project_onto_span(v);
    const auto b = project_onto_span(v * mix);
    CHECK(projection_distance(a, b) < 1e-12);
    CHECK(a.rank() == k);
    CHECK(std::abs(a.matrix().trace().real() - double(k)) < 1e-12);
  }
}

TEST_CASE("reflection I - 2 pi is unitary") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = project_onto_span(random_matrix(rng, 4, 2));
    const CMatrix r = identity(4) - 2.0 * p.matrix();
    CHECK(max_norm(CMatrix(r.adjoint() * r - identity(4))) < 1e-12);
    CHECK(p.idempotency_residual() < 1e-12);
    CHECK(p.adjoint_residual() < 1e-12);
  }
}

TEST_CASE("zero and full projections") {
  const auto z = HermitianProjection::zero(3);
  const auto f = HermitianProjection::full(3);
  CHECK(z.rank() == 0);
  CHECK(f.rank() == 3);
  CHECK(max_norm(f.matrix() - identity(3)) == 0.0);
  CHECK(project_onto_span(CMatrix::Zero(3, 0)).rank() == 0);
}

TEST_CASE("from_matrix rejects non-projections") {
  CMatrix m(2, 2);
  m << 1.0, 0.3, 0.3, 0.0;
  CHECK_THROWS_AS(HermitianProjection::from_matrix(m), Error);
  CMatrix ok(2, 2);
  ok << 0.5, 0.5, 0.5, 0.5;
  CHECK(HermitianProjection::from_matrix(ok).rank() == 1);
}

TEST_CASE("star_reduce zeroes the diagonal") {
  CHECK(max_norm(star_reduce(identity(3))) == 0.0);
  CMatrix a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  CMatrix expected(2, 2);
  expected << 0.0, 2.0, 3.0, 0.0;
  CHECK(max_norm(CMatrix(star_reduce(a) - expected)) == 0.0);

  std::mt19937_64 rng(13);
  const CMatrix x = random_matrix(rng, 4, 4);
  const CMatrix y = random_matrix(rng, 4, 4);
  CHECK(max_norm(CMatrix(star_reduce(star_reduce(x)) - star_reduce(x))) == 0.0);
  CHECK(max_norm(CMatrix(star_reduce(2.0 * x + y) - 2.0 * star_reduce(x) - star_reduce(y))) < 1e-14);

  const auto p = project_onto_span(random_matrix(rng, 3, 1));
  const CMatrix ps = star_reduce(p.matrix());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(ps(i, j) == (i == j ? cd(0.0) : p.matrix()(i, j)));
}

TEST_CASE("solve_linear") {
  std::mt19937_64 rng(14);
  const CMatrix b = random_matrix(rng, 3, 2);
  CHECK(max_norm(CMatrix(solve_linear(identity(3), b) - b)) < 1e-15);

  CMatrix a(2, 2);
  a << 2.0, 0.0, 0.0, 4.0;
  CVector rhs(2);
  rhs << 2.0, 4.0;
  const CVector x = solve_linear(a, rhs);
  CHECK(std::abs(x(0) - 1.0) < 1e-15);
  CHECK(std::abs(x(1) - 1.0) < 1e-15);

  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix m = random_matrix(rng, 5, 5) + 4.0 * identity(5);
    const CMatrix r = random_matrix(rng, 5, 3);
    CHECK(max_norm(CMatrix(m * solve_linear(m, r) - r)) < 1e-12);
  }
}

TEST_CASE("solve_linear rejects singular and mismatched input") {
  CMatrix a(2, 2);
  a << 1.0, 2.0, 2.0, 4.0;
  try {
    solve_linear(a, CMatrix(identity(2)));
    FAIL("expected Singular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
  CHECK_THROWS_AS(solve_linear(identity(2), CMatrix(CMatrix::Zero(3, 1))), Error);
}
