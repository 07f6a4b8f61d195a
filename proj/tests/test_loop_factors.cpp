#include <random>
#include <vector>

#include "catch_amalgamated.hpp"

#include "dressing_forge/loop_factors.hpp"

using namespace dressing_forge;

namespace {

HermitianProjection line(std::initializer_list<cd> v) {
  CMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (cd x : v) m(i++, 0) = x;
  return project_onto_span(m);
}

std::vector<cd> random_lambdas(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<cd> out;
  for (int i = 0; i < count; ++i) out.emplace_back(u(rng), u(rng));
  return out;
}

}  // namespace

TEST_CASE("factors are normalised at infinity") {
  const auto pi = line({1.0, cd(0.0, 0.4), 0.2});
  const cd z(0.3, 0.8);
  std::vector<LoopFactor> factors{make_one_pole(z, pi), make_real_one_pole(0.7, line({1.0, -0.5, 0.3})),
                                  make_two_pole(z, pi), TranslationFactor{0.6, RVector::Constant(3, 0.4)}};
  for (const auto& g : factors) {
    const CMatrix far = eval_factor(g, cd(1e8, 3e7));
    const CMatrix inf = eval_at_infinity(g);
    CHECK(max_norm(CMatrix(far - inf)) < 1e-7);
    CHECK(max_norm(CMatrix(inf - identity(inf.rows()))) == 0.0);
  }
}

TEST_CASE("one-pole factor values at special points") {
  const auto pi = line({1.0, cd(0.0, 0.4)});
  const cd z(0.3, 0.8);
  CHECK(max_norm(CMatrix(eval_factor(make_one_pole(z, pi), std::conj(z)) - pi.matrix())) < 1e-15);

  const auto pr = line({1.0, 0.5});
  const CMatrix at0 = eval_factor(make_real_one_pole(0.9, pr), 0.0);
  CHECK(max_norm(CMatrix(at0 - (pr.matrix() - pr.complement()))) < 1e-15);
}

TEST_CASE("evaluation at a pole raises AtPole") {
  const cd z(0.3, 0.8);
  const auto g = make_one_pole(z, line({1.0, 0.0}));
  try {
    eval_factor(g, z + cd(1e-10, 0.0));
    FAIL("expected AtPole");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AtPole);
  }
  CHECK_NOTHROW(eval_factor(g, z + cd(1e-6, 0.0)));
  CHECK_THROWS_AS(eval_factor(TranslationFactor{0.5, RVector::Ones(2)}, cd(0.0, 0.5)), Error);
}

TEST_CASE("inverse factor") {
  const auto pi = line({1.0, cd(0.2, -0.3), 0.5});
  const TwoPointFactor g = make_one_pole(cd(-0.4, 1.1), pi);
  const TwoPointFactor gi = invert_factor(g);
  const TwoPointFactor gii = invert_factor(gi);
  CHECK(gii.pole == g.pole);
  CHECK(gii.zero == g.zero);
  for (const cd l : random_lambdas(3, 10)) {
    CHECK(max_norm(CMatrix(eval_factor(g, l) * eval_factor(gi, l) - identity(3))) < 1e-12);
  }
  const TwoPointFactor trivial = make_one_pole(cd(0.2, 0.5), HermitianProjection::full(2));
  CHECK(max_norm(CMatrix(eval_factor(invert_factor(trivial), cd(1.3, -0.2)) - identity(2))) < 1e-15);
}

TEST_CASE("reality of the generators") {
  const auto samples = random_lambdas(4, 25);

  const auto real = check_reality(make_real_one_pole(0.8, line({1.0, 0.5, -0.2})), samples);
  CHECK(real.residual("tau_reality") < 1e-12);
  CHECK(real.residual("sigma_reality") < 1e-12);
  CHECK(real.all_pass());

  // Complex one-pole factors are tau-real only.
  const auto complex = check_reality(make_one_pole(cd(0.4, 0.9), line({1.0, cd(0.0, 0.5)})), samples);
  CHECK(complex.residual("tau_reality") < 1e-12);
  CHECK(complex.residual("sigma_reality") > 1e-2);

  const auto two = check_reality(make_two_pole(cd(0.4, 0.9), line({1.0, cd(0.0, 0.5)})), samples);
  CHECK(two.residual("tau_reality") < 1e-10);
  CHECK(two.residual("sigma_reality") < 1e-10);

  const auto trans = check_reality(TranslationFactor{0.7, RVector::Constant(3, -0.3)}, samples);
  CHECK(trans.all_pass());
}

TEST_CASE("two-pole factor has both factorisations") {
  // f_{z,pi} = g_{-conj z, rho} g_{z, pi} = g_{z, conj rho} g_{-conj z, conj pi}
  const cd z(0.4, 0.9);
  const auto pi = line({1.0, cd(0.3, 0.5), -0.2});
  const TwoPoleFactor f = make_two_pole(z, pi);
  for (const cd l : random_lambdas(5, 20)) {
    const CMatrix a = eval_factor(f, l);
    const CMatrix b = eval_two_point(z, std::conj(z), f.rho.conjugate().matrix(), l) *
                      eval_two_point(-std::conj(z), -z, pi.conjugate().matrix(), l);
    CHECK(max_norm(CMatrix(a - b)) < 1e-10);
  }
  CHECK_THROWS_AS(make_two_pole(cd(0.0, 0.9), pi), Error);
}

TEST_CASE("permutability of one-pole factors") {
  const cd z1(0.3, 0.7);
  const cd z2(-0.5, 0.4);
  const auto pi1 = line({1.0, cd(0.0, 0.3)});
  const auto pi2 = line({0.2, cd(1.0, 0.1)});
  const auto [rho1, rho2] = permute_factors(z1, pi1, z2, pi2);
  for (const cd l : random_lambdas(6, 20)) {
    const CMatrix a = eval_two_point(z2, std::conj(z2), rho2.matrix(), l) * eval_two_point(z1, std::conj(z1), pi1.matrix(), l);
    const CMatrix b = eval_two_point(z1, std::conj(z1), rho1.matrix(), l) * eval_two_point(z2, std::conj(z2), pi2.matrix(), l);
    CHECK(max_norm(CMatrix(a - b)) < 1e-10);
  }

  // The inverse loop has conjugate poles; permuting its factors recovers the inputs.
  const auto [back2, back1] = permute_factors(std::conj(z2), rho2, std::conj(z1), rho1);
  CHECK(projection_distance(back1, pi1) < 1e-9);
  CHECK(projection_distance(back2, pi2) < 1e-9);
}

TEST_CASE("permutability with equal projections is trivial") {
  const auto pi = line({1.0, cd(0.4, -0.2)});
  const auto [rho1, rho2] = permute_factors(cd(0.3, 0.7), pi, cd(-0.2, 1.3), pi);
  CHECK(projection_distance(rho1, pi) < 1e-12);
  CHECK(projection_distance(rho2, pi) < 1e-12);
}

TEST_CASE("permutability recovers the two-pole construction") {
  const cd z(0.4, 0.9);
  const auto pi = line({1.0, cd(0.3, 0.5), -0.2});
  const auto [rho1, rho2] = permute_factors(z, pi, -std::conj(z), pi.conjugate());
  CHECK(projection_distance(rho2, rho1.conjugate()) < 1e-9);
  CHECK(projection_distance(rho2, make_two_pole(z, pi).rho) < 1e-9);
}

TEST_CASE("pole collisions are refused") {
  const auto pi = line({1.0, 0.0});
  const cd z(0.3, 0.7);
  for (const cd other : {z, std::conj(z)}) {
    try {
      permute_factors(z, pi, other, pi);
      FAIL("expected PoleCollision");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PoleCollision);
    }
  }
}
