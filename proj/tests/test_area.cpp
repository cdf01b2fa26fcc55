#include "doctest.h"

#include <cmath>
#include <random>

#include "dpw/area.hpp"

using namespace dpw;

namespace {

std::mt19937 arng(991);

// residue in exact normal form, hidden behind a random conjugation
LoopMatrix synthetic_residue(int n, double a, Mat2* used_conj = nullptr) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double b = 0.7;
  double c = (1.0 - a * a) / b;  // -a² - bc = -1
  double s = 1.0 / (2.0 * n);
  Mat2 m_1 = Mat2::Zero(), m0 = Mat2::Zero(), mp = Mat2::Zero();
  m_1(0, 1) = s * b;
  m0(0, 0) = s * a;
  m0(1, 1) = -s * a;
  mp(1, 0) = s * c;
  LoopMatrix X(-1, {m_1, m0, mp});
  Mat2 g;
  g << 1.0 + 0.2 * d(arng), d(arng), d(arng), 1.0 + 0.2 * d(arng);
  if (std::abs(g.determinant()) < 0.2) g(0, 0) += 1.0;
  if (used_conj) *used_conj = g;
  return lm_mul(LoopMatrix::constant(g),
                lm_mul(X, LoopMatrix::constant(g.inverse())));
}

}  // namespace

TEST_SUITE("area") {

TEST_CASE("normal form recovers the invariant") {
  for (int n : {2, 3, 5}) {
    for (double a : {0.1, -0.35, 0.8}) {
      LoopMatrix R = synthetic_residue(n, a);
      NormalForm nf = residue_normal_form(R, n);
      CHECK(std::abs(nf.alpha - a / (2.0 * n)) < 1e-10);
      CHECK(nf.unit_det_residual < 1e-9);
    }
  }
}

TEST_CASE("invariant is independent of the conjugator completion") {
  // the completion w only enters through terms that vanish at λ = 0, so
  // conjugating v-preserving directions must leave alpha fixed
  LoopMatrix R = synthetic_residue(3, 0.4);
  NormalForm nf = residue_normal_form(R, 3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    // replace w by beta v + gamma w via a triangular change of basis
    cplx beta(d(arng), d(arng));
    cplx gamma(1.0 + 0.3 * d(arng), 0.2 * d(arng));
    Mat2 T;
    T << 1.0, beta, 0.0, gamma;
    Mat2 C2 = nf.C * T;
    Mat2 C2inv = C2.inverse();
    LoopMatrix X2 = lm_mul(LoopMatrix::constant(C2inv),
                           lm_mul(R, LoopMatrix::constant(C2)));
    CHECK(std::abs(X2.coeff(0)(0, 0).real() - nf.alpha) < 1e-10);
  }
}

TEST_CASE("normal form rejects spin +1 residues") {
  Mat2 diag = (Mat2() << 0.25, 0, 0, -0.25).finished();
  CHECK_THROWS_AS((void)residue_normal_form(LoopMatrix::constant(diag), 2),
                  SpinMismatch);
}

TEST_CASE("total area sums weighted vertex contributions") {
  // two spin -1 poles with known invariants and one spin +1 pole
  FuchsianPotential xi;
  auto add = [&](const LoopMatrix& r, int n, int spin) {
    Pole p;
    p.z = std::polar(1.0, 0.5 + xi.poles.size());
    p.residue = r;
    p.n = n;
    p.spin = spin;
    xi.poles.push_back(p);
  };
  double a1 = 0.3, a2 = -0.2;
  add(synthetic_residue(2, a1), 2, -1);
  add(synthetic_residue(3, a2), 3, -1);
  add(LoopMatrix::constant((Mat2() << 0.25, 0, 0, -0.25).finished()), 2, 1);
  long G = 12;
  double want = 2.0 * M_PI *
                ((1.0 - a1) * (G / 4.0) + (1.0 - a2) * (G / 6.0));
  CHECK(std::abs(total_area(xi, G) - want) < 1e-9);
}

TEST_CASE("area is invariant under constant gauges") {
  FuchsianPotential xi;
  Pole p;
  p.z = cplx(1, 0);
  p.residue = synthetic_residue(2, 0.25);
  p.n = 2;
  p.spin = -1;
  xi.poles = {p};
  double a0 = total_area(xi, 8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    Mat2 g;
    g << 1.0 + 0.2 * d(arng), d(arng), d(arng), 1.0 + 0.2 * d(arng);
    if (std::abs(g.determinant()) < 0.2) g(1, 1) += 1.0;
    FuchsianPotential eta = apply_constant_gauge(xi, LoopMatrix::constant(g));
    eta.poles[0].n = 2;
    CHECK(std::abs(total_area(eta, 8) - a0) < 1e-9);
  }
}

TEST_CASE("flat vertex has alpha 1/(2n) and zero contribution") {
  // a = 1 corresponds to 1 - 2n·α = 0: no area deficit at that vertex
  LoopMatrix R = synthetic_residue(4, 1.0 - 1e-12);
  NormalForm nf = residue_normal_form(R, 4);
  FuchsianPotential xi;
  Pole p;
  p.z = cplx(1, 0);
  p.residue = R;
  p.n = 4;
  xi.poles = {p};
  CHECK(std::abs(total_area(xi, 16)) < 1e-6);
  CHECK(std::abs(nf.alpha - 1.0 / 8.0) < 1e-9);
}

}  // TEST_SUITE
