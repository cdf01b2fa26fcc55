#include "doctest.h"

#include <cmath>
#include <random>

#include "dpw/potential.hpp"

using namespace dpw;

namespace {

std::mt19937 prng(777);

Mat2 real_tracefree() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat2 m;
  double a = d(prng);
  m << a, d(prng), d(prng), -a;
  return m;
}

// four poles on the unit circle, real trace-free residue coefficients in
// modes -1..2, last residue chosen so everything sums to zero
FuchsianPotential random_circle_potential() {
  FuchsianPotential xi;
  std::vector<cplx> zs = {std::polar(1.0, 0.4), std::polar(1.0, 1.9),
                          std::polar(1.0, 3.1), std::polar(1.0, 5.2)};
  LoopMatrix sum = LoopMatrix::zero();
  for (size_t k = 0; k < 4; ++k) {
    Pole p;
    p.z = zs[k];
    if (k < 3) {
      std::vector<Mat2> c;
      for (int m = -1; m <= 2; ++m) c.push_back(real_tracefree());
      p.residue = LoopMatrix(-1, std::move(c));
      sum = lm_add(sum, p.residue);
    } else {
      p.residue = lm_scale(sum, -1.0);
    }
    xi.poles.push_back(p);
  }
  xi.base_point = cplx(0.0, 0.0);
  return xi;
}

const Mat2 kSigma = (Mat2() << cplx(0, 1), 0, 0, cplx(0, -1)).finished();

LoopMatrix conj_by(const Mat2& g, const LoopMatrix& r) {
  return lm_mul(LoopMatrix::constant(g.inverse()),
                lm_mul(r, LoopMatrix::constant(g)));
}

// the standard four-pole σ-symmetric shape: poles (1, i, -1, -i) with
// residues (A, B, σ⁻¹Aσ, σ⁻¹Bσ) and the diagonal modes of A+B cancelling
FuchsianPotential sigma_symmetric_potential() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Mat2> ca, cb;
  for (int m = -1; m <= 2; ++m) {
    Mat2 a = real_tracefree();
    Mat2 b;
    b << -a(0, 0), d(prng), d(prng), a(0, 0);
    ca.push_back(a);
    cb.push_back(b);
  }
  LoopMatrix A(-1, ca), B(-1, cb);
  FuchsianPotential xi;
  auto add = [&](cplx z, const LoopMatrix& r) {
    Pole p;
    p.z = z;
    p.residue = r;
    xi.poles.push_back(p);
  };
  add(cplx(1, 0), A);
  add(cplx(0, 1), B);
  add(cplx(-1, 0), conj_by(kSigma, A));
  add(cplx(0, -1), conj_by(kSigma, B));
  xi.base_point = cplx(0.3, 0.1);
  return xi;
}

}  // namespace

TEST_SUITE("potential") {

TEST_CASE("evaluation matches the residue expansion") {
  FuchsianPotential xi = random_circle_potential();
  cplx z(0.3, 0.2), lambda = std::polar(1.0, 1.1);
  Mat2 direct = Mat2::Zero();
  for (const Pole& p : xi.poles)
    direct += lm_eval(p.residue, lambda) / (z - p.z);
  CHECK((xi.eval(z, lambda) - direct).norm() < 1e-14);
  CHECK((lm_eval(xi.eval_z(z), lambda) - direct).norm() < 1e-12);
  CHECK(xi.sum_residual() < 1e-13);
  CHECK(xi.trace_residual() < 1e-13);
}

TEST_CASE("real coefficients on the circle give reality residual zero") {
  FuchsianPotential xi = random_circle_potential();
  CHECK(check_reality(xi) < 1e-12);
}

TEST_CASE("reality residual detects perturbations") {
  FuchsianPotential xi = random_circle_potential();
  // imaginary perturbation of a single coefficient entry
  std::vector<Mat2> c = xi.poles[1].residue.coeffs();
  c[1](0, 1) += cplx(0.0, 1e-3);
  xi.poles[1].residue = LoopMatrix(xi.poles[1].residue.low_order(), c);
  CHECK(check_reality(xi) > 1e-4);

  Pole off;
  off.z = cplx(0.5, 0.0);
  off.residue = LoopMatrix::zero();
  FuchsianPotential bad = random_circle_potential();
  bad.poles.push_back(off);
  CHECK_THROWS_AS((void)check_reality(bad), PoleOffCircle);
}

TEST_CASE("moebius maps move poles and keep residues") {
  FuchsianPotential xi = random_circle_potential();
  MoebiusMap m =
      MoebiusMap::from_unnormalized(cplx(1), cplx(1), cplx(0.2), cplx(1));
  FuchsianPotential eta = apply_moebius(xi, m);
  REQUIRE(eta.poles.size() == xi.poles.size());
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    CHECK(std::abs(eta.poles[k].z - m.apply(xi.poles[k].z)) < 1e-13);
    CHECK(lm_sub(eta.poles[k].residue, xi.poles[k].residue).norm() == 0.0);
  }
  // coordinate invariance of the 1-form: η(m(z)) m'(z) = ξ(z)
  cplx z(0.25, 0.4), lambda = std::polar(1.0, 0.7);
  cplx dm = 1.0 / ((m.c * z + m.d) * (m.c * z + m.d));
  CHECK((eta.eval(m.apply(z), lambda) * dm - xi.eval(z, lambda)).norm() <
        1e-11);

  // round trip through the inverse map restores the pole set
  FuchsianPotential back = apply_moebius(eta, m.inverse());
  for (size_t k = 0; k < xi.poles.size(); ++k)
    CHECK(std::abs(back.poles[k].z - xi.poles[k].z) < 1e-12);
}

TEST_CASE("moebius map sending a pole to infinity") {
  FuchsianPotential xi = random_circle_potential();
  cplx p0 = xi.poles[0].z;
  MoebiusMap m = MoebiusMap::from_unnormalized(cplx(0), cplx(1), cplx(1), -p0);
  FuchsianPotential eta = apply_moebius(xi, m);
  CHECK(eta.poles[0].at_infinity);
  CHECK(eta.pole_at_infinity() != nullptr);
  // the finite residues still sum to minus the residue at infinity
  LoopMatrix fs = LoopMatrix::zero();
  for (size_t k : eta.finite_pole_indices())
    fs = lm_add(fs, eta.poles[k].residue);
  CHECK(lm_add(fs, eta.poles[0].residue).norm() < 1e-13);
}

TEST_CASE("three point map hits its targets") {
  MoebiusMap m = MoebiusMap::three_points(cplx(-1), cplx(0), cplx(1));
  CHECK(std::abs(m.apply(cplx(-1))) < 1e-14);
  CHECK(std::abs(m.apply(cplx(0)) - cplx(1)) < 1e-14);
  CHECK(m.sends_to_infinity(cplx(1)));
}

TEST_CASE("pullback by a power") {
  FuchsianPotential xi = random_circle_potential();
  int n = 3;
  FuchsianPotential eta = pullback_power(xi, n);
  CHECK(eta.poles.size() == 3 * xi.poles.size());
  // pullback identity: η(z) = ξ(zⁿ)·n·z^{n-1}
  cplx z(0.7, 0.5), lambda = std::polar(1.0, 2.3);
  cplx zn = std::pow(z, n);
  Mat2 lhs = eta.eval(z, lambda);
  Mat2 rhs =
      xi.eval(zn, lambda) * (static_cast<double>(n) * std::pow(z, n - 1));
  CHECK((lhs - rhs).norm() < 1e-11);
}

TEST_CASE("pullback scales residues at the branch points") {
  FuchsianPotential xi;
  Pole p0;
  p0.z = cplx{};
  Mat2 d = (Mat2() << 0.25, 0, 0, -0.25).finished();
  p0.residue = LoopMatrix::constant(d);
  p0.ev_num = 1;
  p0.ev_den = 4;
  p0.n = 2;
  p0.spin = 1;
  Pole pi_;
  pi_.at_infinity = true;
  pi_.residue = lm_scale(p0.residue, -1.0);
  pi_.ev_num = 1;
  pi_.ev_den = 4;
  xi.poles = {p0, pi_};
  FuchsianPotential eta = pullback_power(xi, 2);
  REQUIRE(eta.poles.size() == 2);
  CHECK((eta.poles[0].residue.coeff(0) - 2.0 * d).norm() < 1e-14);
  CHECK(eta.poles[0].ev_num == 1);
  CHECK(eta.poles[0].ev_den == 2);
  CHECK(eta.poles[0].n == 1);
}

TEST_CASE("pushdown by the square map") {
  FuchsianPotential xi = sigma_symmetric_potential();
  CHECK(pushdown_symmetry_residual(xi) < 1e-10);
  FuchsianPotential eta = pushdown_z2(xi);
  // pole images 1, -1 plus the created branch poles at 0 and infinity
  REQUIRE(eta.poles.size() == 4);
  CHECK(eta.pole_at_infinity() != nullptr);
  CHECK(eta.sum_residual() < 1e-12);

  // pushdown identity: η(z²)·2z equals ξ gauged by diag(z^{1/2}, z^{-1/2})
  for (cplx z : {cplx(0.4, 0.3), cplx(-0.8, 0.45), cplx(1.3, -0.2)}) {
    for (double t : {0.5, 2.9}) {
      cplx lambda = std::polar(1.0, t);
      Mat2 khalf = Mat2::Zero();
      khalf(0, 0) = std::sqrt(z);
      khalf(1, 1) = 1.0 / std::sqrt(z);
      Mat2 dterm = Mat2::Zero();
      dterm(0, 0) = 0.5 / z;
      dterm(1, 1) = -0.5 / z;
      Mat2 gauged = khalf.inverse() * xi.eval(z, lambda) * khalf + dterm;
      Mat2 lhs = eta.eval(z * z, lambda) * (2.0 * z);
      CHECK((lhs - gauged).norm() < 1e-10);
    }
  }

  // created branch poles carry eigenvalues ±1/4
  for (const Pole& p : eta.poles) {
    if (p.at_infinity || std::abs(p.z) < 1e-9) {
      CHECK(p.ev_num == 1);
      CHECK(p.ev_den == 4);
      CHECK(p.n == 2);
    }
  }
}

TEST_CASE("pushdown rejects asymmetric input") {
  FuchsianPotential xi = random_circle_potential();
  CHECK_THROWS_AS((void)pushdown_z2(xi), SymmetryViolated);
}

TEST_CASE("flip gauge removes a half-eigenvalue pole") {
  // diagonal model where the residue left behind at p vanishes exactly
  FuchsianPotential xi;
  Pole p;
  p.z = cplx(-1.0, 0.0);
  p.residue = LoopMatrix::constant((Mat2() << 0.5, 0, 0, -0.5).finished());
  p.ev_num = 1;
  p.ev_den = 2;
  p.n = 1;
  Pole q;
  q.z = cplx(2.0, 0.0);
  q.residue = LoopMatrix::constant((Mat2() << 0.25, 0, 0, -0.25).finished());
  q.ev_num = 1;
  q.ev_den = 4;
  Pole r;
  r.at_infinity = true;
  r.residue = lm_scale(lm_add(p.residue, q.residue), -1.0);
  r.ev_num = 3;  // -A-Q has eigenvalues ±3/4
  r.ev_den = 4;
  xi.poles = {p, q, r};
  FuchsianPotential eta = flip_gauge(xi, 0);
  REQUIRE(eta.poles.size() == 2);
  for (const Pole& pp : eta.poles)
    CHECK((pp.at_infinity || std::abs(pp.z + 1.0) > 1e-6));
  CHECK(eta.sum_residual() < 1e-12);
  CHECK(eta.det_residual() < 1e-10);
}

TEST_CASE("flip gauge keeps a nilpotent residue when the coupling survives") {
  FuchsianPotential xi;
  Pole p;
  p.z = cplx(-1.0, 0.0);
  p.residue = LoopMatrix::constant((Mat2() << 0.5, 0.3, 0, -0.5).finished());
  p.ev_num = 1;
  p.ev_den = 2;
  Pole q;  // couples into the lower-left corner of the regular part
  q.z = cplx(0.5, 0.0);
  q.residue = LoopMatrix::constant((Mat2() << -0.75, -0.3, -0.1, 0.75).finished());
  Pole r;
  r.at_infinity = true;
  r.residue = lm_scale(lm_add(p.residue, q.residue), -1.0);
  // residue at infinity is (0.25, 0 / 0.1, -0.25): eigenvalues ±1/4
  r.ev_num = 1;
  r.ev_den = 4;
  xi.poles = {p, q, r};
  FuchsianPotential eta = flip_gauge(xi, 0);
  REQUIRE(eta.poles.size() == 3);
  bool found_p = false, found_q = false;
  for (const Pole& pp : eta.poles) {
    if (pp.at_infinity) continue;
    if (std::abs(pp.z + 1.0) < 1e-9) {
      found_p = true;
      // only the nilpotent lower-left coupling survives
      LaurentScalar d = lm_det(pp.residue).trimmed();
      CHECK(d.norm() < 1e-12);
      CHECK(pp.residue.norm() > 1e-9);
    }
    if (std::abs(pp.z - 0.5) < 1e-9) {
      found_q = true;
      // determinant of the conjugated and rescaled residue is unchanged
      LaurentScalar d0 = lm_det(xi.poles[1].residue).trimmed();
      LaurentScalar d1 = lm_det(pp.residue).trimmed();
      CHECK(std::abs(d0.coeff(0) - d1.coeff(0)) < 1e-12);
    }
  }
  CHECK(found_p);
  CHECK(found_q);
  CHECK(eta.sum_residual() < 1e-12);
}

TEST_CASE("constant gauge conjugates residues") {
  FuchsianPotential xi = random_circle_potential();
  Mat2 g0;
  g0 << 1.0, 0.4, -0.2, 1.1;
  LoopMatrix g = LoopMatrix::constant(g0);
  FuchsianPotential eta = apply_constant_gauge(xi, g);
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    Mat2 want = g0.inverse() * xi.poles[k].residue.coeff(0) * g0;
    CHECK((eta.poles[k].residue.coeff(0) - want).norm() < 1e-12);
  }
  // determinant per pole is invariant
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    cplx l = std::polar(1.0, 0.3);
    CHECK(std::abs(lm_det(eta.poles[k].residue).eval(l) -
                   lm_det(xi.poles[k].residue).eval(l)) < 1e-10);
  }
}

TEST_CASE("symmetrizing gauge recovers the twisted symmetry") {
  // start from a potential that is symmetric under τ(z) = -1/z with the
  // σ-twist, hide the symmetry with a random constant conjugation, and
  // check the gauge construction restores it
  Mat2 m1 = (Mat2() << 0.2, 0.1, -0.4, -0.2).finished();  // nilpotent
  Mat2 m0 = real_tracefree();
  Mat2 mp = real_tracefree();
  LoopMatrix M(-1, {m1, m0, mp});
  // diagonal part of M, mode by mode
  std::vector<Mat2> dm;
  for (const Mat2& c : M.coeffs()) {
    Mat2 e = Mat2::Zero();
    e(0, 0) = c(0, 0);
    e(1, 1) = c(1, 1);
    dm.push_back(e);
  }
  LoopMatrix D(-1, dm);
  // off-diagonal free part of the residue at 0
  Mat2 o0 = (Mat2() << 0, 0.37, -0.21, 0).finished();
  LoopMatrix O = lm_add(LoopMatrix::constant(o0),
                        LoopMatrix::monomial(1, (Mat2() << 0, 0.1, 0.2, 0).finished()));

  auto flip_offdiag = [](const LoopMatrix& r) {
    std::vector<Mat2> c = r.coeffs();
    for (Mat2& e : c) {
      e(0, 1) = -e(0, 1);
      e(1, 0) = -e(1, 0);
    }
    return LoopMatrix(r.low_order(), std::move(c));
  };

  FuchsianPotential sym;
  auto add = [&](cplx z, bool inf_flag, const LoopMatrix& r) {
    Pole p;
    p.z = z;
    p.at_infinity = inf_flag;
    p.residue = r;
    sym.poles.push_back(p);
  };
  add(cplx(-1, 0), false, M);
  add(cplx(1, 0), false, flip_offdiag(M));
  add(cplx(0, 0), false, lm_add(lm_scale(D, -1.0), O));
  add(cplx(0, 0), true,
      lm_add(lm_scale(D, -1.0), flip_offdiag(O)));
  REQUIRE(sym.sum_residual() < 1e-13);

  // verify the model really is symmetric before hiding it
  auto twist_residual = [](const FuchsianPotential& f) {
    double worst = 0;
    for (cplx z : {cplx(0.4, 0.25), cplx(-0.7, 0.6), cplx(1.8, 0.3)}) {
      for (double t : {0.3, 1.7}) {
        cplx lambda = std::polar(1.0, t);
        Mat2 lhs = f.eval(-1.0 / z, lambda) / (z * z);
        Mat2 rhs = kSigma.inverse() * f.eval(z, lambda) * kSigma;
        worst = std::max(worst, std::min((lhs - rhs).norm(), (lhs + rhs).norm()));
      }
    }
    return worst;
  };
  REQUIRE(twist_residual(sym) < 1e-12);

  Mat2 g0;
  g0 << 1.0, 0.35, -0.15, 0.9;
  FuchsianPotential hidden = sym;
  for (Pole& p : hidden.poles) p.residue = conj_by(g0, p.residue);
  CHECK(twist_residual(hidden) > 1e-3);

  FuchsianPotential eta = symmetrizing_gauge(hidden);
  CHECK(twist_residual(eta) < 1e-8);
}

TEST_CASE("symmetrizing gauge rejects dependent kernels") {
  Mat2 n1 = (Mat2() << 0, 1, 0, 0).finished();  // kernel span(1,0)
  FuchsianPotential xi;
  auto add = [&](cplx z, bool inf_flag, const LoopMatrix& r) {
    Pole p;
    p.z = z;
    p.at_infinity = inf_flag;
    p.residue = r;
    xi.poles.push_back(p);
  };
  LoopMatrix R = lm_add(LoopMatrix::monomial(-1, n1),
                        LoopMatrix::constant(real_tracefree()));
  add(cplx(-1, 0), false, R);
  add(cplx(1, 0), false, R);  // same kernel on purpose
  add(cplx(0, 0), false, lm_scale(R, -1.0));
  add(cplx(0, 0), true, lm_scale(R, -1.0));
  CHECK_THROWS_AS((void)symmetrizing_gauge(xi), KernelsDependent);
}

TEST_CASE("spin detection") {
  FuchsianPotential xi;
  Pole a;
  a.z = cplx(1, 0);
  a.residue = LoopMatrix::monomial(-1, (Mat2() << 0, 1, 0, 0).finished());
  Pole b;
  b.z = cplx(-1, 0);
  b.residue = LoopMatrix::constant((Mat2() << 0.25, 0, 0, -0.25).finished());
  xi.poles = {a, b};
  CHECK(spin_of(xi, 0) == -1);
  CHECK(spin_of(xi, 1) == 1);
}

TEST_CASE("json round trip") {
  FuchsianPotential xi = random_circle_potential();
  xi.poles[2].at_infinity = true;
  xi.poles[2].z = cplx{};
  xi.poles[1].ev_num = 1;
  xi.poles[1].ev_den = 6;
  xi.poles[1].n = 3;
  xi.poles[1].spin = -1;
  nlohmann::json j = potential_to_json(xi);
  FuchsianPotential back = potential_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.poles.size() == xi.poles.size());
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    CHECK(back.poles[k].at_infinity == xi.poles[k].at_infinity);
    CHECK(back.poles[k].z == xi.poles[k].z);
    CHECK(back.poles[k].ev_num == xi.poles[k].ev_num);
    CHECK(back.poles[k].ev_den == xi.poles[k].ev_den);
    CHECK(back.poles[k].n == xi.poles[k].n);
    CHECK(back.poles[k].spin == xi.poles[k].spin);
    for (size_t m = 0; m < xi.poles[k].residue.coeffs().size(); ++m)
      CHECK(back.poles[k].residue.coeffs()[m] ==
            xi.poles[k].residue.coeffs()[m]);
  }
  CHECK(back.base_point == xi.base_point);
  CHECK(back.lambda1 == xi.lambda1);
}

TEST_CASE("real parametrization round trip") {
  FuchsianPotential xi = random_circle_potential();
  std::vector<double> x = residues_to_reals(xi);
  CHECK(x.size() == 4 * 3 * static_cast<size_t>(global_trunc_order() + 2));
  FuchsianPotential eta = xi;
  reals_to_residues(eta, x);
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    for (int m = -1; m <= 2; ++m) {
      Mat2 want = xi.poles[k].residue.coeff(m);
      Mat2 got = eta.poles[k].residue.coeff(m);
      CHECK((want - got).norm() < 1e-14);
    }
  }
}

}  // TEST_SUITE
