#include "doctest.h"

#include <json.hpp>
#include <random>

#include "dpw/loop_matrix.hpp"

using namespace dpw;

namespace {

std::mt19937 rng(12345);

Mat2 random_mat2() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat2 m;
  m << cplx(d(rng), d(rng)), cplx(d(rng), d(rng)), cplx(d(rng), d(rng)),
      cplx(d(rng), d(rng));
  return m;
}

LoopMatrix random_loop(int low, int high) {
  std::vector<Mat2> c;
  for (int k = low; k <= high; ++k) c.push_back(random_mat2());
  return LoopMatrix(low, std::move(c));
}

}  // namespace

TEST_SUITE("loop_algebra") {

TEST_CASE("additive identities") {
  LoopMatrix x = random_loop(-1, 5);
  LoopMatrix z = lm_add(x, LoopMatrix::zero());
  CHECK(lm_sub(z, x).norm() == 0.0);
  CHECK(lm_add(x, lm_scale(x, -1.0)).norm() == 0.0);

  // disjoint-support sum keeps exactly two nonzero coefficients
  Mat2 e12 = Mat2::Zero(), e21 = Mat2::Zero();
  e12(0, 1) = 1.0;
  e21(1, 0) = 1.0;
  LoopMatrix s = lm_add(LoopMatrix::monomial(-1, e12), LoopMatrix::monomial(1, e21));
  int nonzero = 0;
  for (int k = s.low_order(); k <= s.high_order(); ++k)
    if (s.coeff(k).norm() > 0) ++nonzero;
  CHECK(nonzero == 2);
}

TEST_CASE("monomial products") {
  Mat2 e12 = Mat2::Zero(), e21 = Mat2::Zero(), e11 = Mat2::Zero();
  e12(0, 1) = 1.0;
  e21(1, 0) = 1.0;
  e11(0, 0) = 1.0;
  LoopMatrix p = lm_mul(LoopMatrix::monomial(-1, e12), LoopMatrix::monomial(1, e21));
  CHECK((p.coeff(0) - e11).norm() == 0.0);
  CHECK(p.trimmed().low_order() == 0);
  CHECK(p.trimmed().high_order() == 0);

  LoopMatrix x = random_loop(-1, 4);
  CHECK(lm_sub(lm_mul(LoopMatrix::identity(), x), x).norm() == 0.0);
}

TEST_CASE("pointwise evaluation oracle for products") {
  global_trunc_order() = 10;
  // degree <= N/2 so the product support fits the window exactly
  LoopMatrix x = random_loop(-1, 4);
  LoopMatrix y = random_loop(-1, 4);
  LoopMatrix xy = lm_mul(x, y);
  for (double t : {0.3, 1.7, 4.1}) {
    cplx lambda = std::polar(1.0, t);
    Mat2 lhs = lm_eval(xy, lambda);
    Mat2 rhs = lm_eval(x, lambda) * lm_eval(y, lambda);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("associativity and distributivity on safe supports") {
  global_trunc_order() = 10;
  LoopMatrix x = random_loop(0, 3), y = random_loop(0, 3), z = random_loop(0, 3);
  CHECK(lm_sub(lm_mul(lm_mul(x, y), z), lm_mul(x, lm_mul(y, z))).norm() < 1e-13);
  CHECK(lm_sub(lm_mul(x, lm_add(y, z)), lm_add(lm_mul(x, y), lm_mul(x, z))).norm() <
        1e-13);
}

TEST_CASE("series inverse residual") {
  global_trunc_order() = 8;
  LoopMatrix x = lm_add(LoopMatrix::identity(), lm_scale(random_loop(0, 8), 0.3));
  LoopMatrix xi = lm_inverse(x);
  LoopMatrix r = lm_sub(lm_mul(x, xi), LoopMatrix::identity());
  CHECK(r.norm() < 1e-10);

  CHECK(lm_sub(lm_inverse(LoopMatrix::identity()), LoopMatrix::identity()).norm() ==
        0.0);
  Mat2 d = Mat2::Zero();
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  Mat2 dinv = lm_inverse(LoopMatrix::constant(d)).coeff(0);
  CHECK(std::abs(dinv(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(dinv(1, 1) - 2.0) < 1e-15);
  global_trunc_order() = 10;
}

TEST_CASE("inverse rejects singular leading term") {
  Mat2 n = Mat2::Zero();
  n(0, 1) = 1.0;
  CHECK_THROWS_AS((void)lm_inverse(LoopMatrix::constant(n)), SingularAtZero);
}

TEST_CASE("general inverse handles unit-monomial determinants") {
  global_trunc_order() = 10;
  // g = diag(λ, λ^{-1}) plus a small perturbation has det with a nonzero
  // leading coefficient
  Mat2 a = Mat2::Zero(), b = Mat2::Zero();
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  LoopMatrix g = lm_add(LoopMatrix::monomial(1, a), LoopMatrix::monomial(-1, b));
  LoopMatrix gi = lm_inverse_general(g);
  LoopMatrix r = lm_sub(lm_mul(g, gi), LoopMatrix::identity());
  CHECK(r.norm() < 1e-12);
}

TEST_CASE("star involution and unitarity") {
  LoopMatrix x = random_loop(-2, 6);
  CHECK(lm_sub(lm_star(lm_star(x)), x).norm() == 0.0);

  Mat2 h;
  h << cplx(1.0, 0.0), cplx(0.5, 0.25), cplx(0.5, -0.25), cplx(-2.0, 0.0);
  CHECK(lm_sub(lm_star(LoopMatrix::constant(h)), LoopMatrix::constant(h)).norm() ==
        0.0);

  Mat2 e12 = Mat2::Zero(), e21 = Mat2::Zero();
  e12(0, 1) = 1.0;
  e21(1, 0) = 1.0;
  LoopMatrix s = lm_star(LoopMatrix::monomial(1, e12));
  CHECK(s.trimmed().low_order() == -1);
  CHECK((s.coeff(-1) - e21).norm() == 0.0);

  // star evaluates to the conjugate transpose on the unit circle
  for (double t : {0.1, 2.2}) {
    cplx lambda = std::polar(1.0, t);
    Mat2 lhs = lm_eval(lm_star(x), lambda);
    Mat2 rhs = lm_eval(x, lambda).adjoint();
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("det and trace series") {
  CHECK(std::abs(lm_det(LoopMatrix::identity()).eval(0.7) - 1.0) < 1e-15);
  Mat2 a = Mat2::Zero(), b = Mat2::Zero();
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  LoopMatrix d = lm_add(LoopMatrix::monomial(1, a), LoopMatrix::monomial(-1, b));
  LaurentScalar det = lm_det(d).trimmed();
  CHECK(det.low == 0);
  CHECK(det.c.size() == 1);
  CHECK(std::abs(det.c[0] - 1.0) < 1e-15);

  Mat2 n = Mat2::Zero();
  n(0, 1) = 3.0;
  CHECK(lm_det(LoopMatrix::constant(n)).norm() == 0.0);
  CHECK(lm_trace(LoopMatrix::constant(n)).norm() == 0.0);

  // det is multiplicative pointwise
  LoopMatrix x = random_loop(-1, 3), y = random_loop(-1, 3);
  cplx lambda = std::polar(1.0, 0.9);
  CHECK(std::abs(lm_det(lm_mul(x, y)).eval(lambda) -
                 lm_det(x).eval(lambda) * lm_det(y).eval(lambda)) < 1e-12);
}

TEST_CASE("tail norm records dropped modes") {
  global_trunc_order() = 4;
  LoopMatrix x = random_loop(0, 4), y = random_loop(0, 4);
  LoopMatrix xy = lm_mul(x, y);
  CHECK(xy.high_order() == 4);
  CHECK(xy.tail_norm() > 0.0);
  global_trunc_order() = 10;
}

TEST_CASE("scalar series sqrt and inverse") {
  LaurentScalar s(-2, {cplx(4.0, 0.0), cplx(1.0, 0.5), cplx(0.25, 0.0)});
  LaurentScalar r = ls_sqrt(s, 8);
  LaurentScalar r2 = ls_mul(r, r);
  LaurentScalar diff = ls_sub(r2, s);
  // modes above 7 involve sqrt coefficients beyond the requested order
  for (int k = diff.low; k <= 7; ++k) CHECK(std::abs(diff.coeff(k)) < 1e-12);
  CHECK(r.low == -1);

  LaurentScalar inv = ls_inverse(s, 8);
  LaurentScalar one = ls_mul(inv, s);
  LaurentScalar odiff = ls_sub(one, LaurentScalar::constant(1.0));
  for (int k = odiff.low; k <= 6; ++k) CHECK(std::abs(odiff.coeff(k)) < 1e-12);
}

TEST_CASE("json round trip is bit exact") {
  LoopMatrix x = random_loop(-1, 7);
  nlohmann::json j = lm_to_json(x);
  std::string text = j.dump();
  LoopMatrix y = lm_from_json(nlohmann::json::parse(text));
  REQUIRE(y.low_order() == x.low_order());
  REQUIRE(y.coeffs().size() == x.coeffs().size());
  for (size_t k = 0; k < x.coeffs().size(); ++k)
    CHECK(x.coeffs()[k] == y.coeffs()[k]);
}

}  // TEST_SUITE
