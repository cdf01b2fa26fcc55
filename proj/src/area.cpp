#include "dpw/area.hpp"

#include <cmath>

namespace dpw {

namespace {

Mat2 inv2(const Mat2& m) {
  cplx d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (std::abs(d) < 1e-12) throw ConjugatorNotFound("singular conjugator");
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a / d;
}

}  // namespace

NormalForm residue_normal_form(const LoopMatrix& R, int n) {
  if (n < 1) throw BadInput("vertex integer must be positive");
  Mat2 nl = R.coeff(-1);
  if (nl.norm() < 1e-9)
    throw SpinMismatch("normal form needs a spin -1 residue");
  // the λ^{-1} coefficient is nilpotent, so its columns span its kernel
  Eigen::Vector2cd v =
      nl.col(0).norm() >= nl.col(1).norm() ? nl.col(0) : nl.col(1);
  if (v.norm() < 1e-12) throw ConjugatorNotFound("kernel vector vanishes");
  // deterministic phase: first nonzero entry real positive
  cplx lead = std::abs(v(0)) > 1e-12 ? v(0) : v(1);
  v *= std::conj(lead) / (std::abs(lead) * v.norm());

  // invariant: v is an eigenvector of the λ^0 mode; its eigenvalue at λ = 0
  // is the area invariant
  Mat2 M = R.coeff(0);
  cplx alpha_c;
  {
    Eigen::Vector2cd mv = M * v;
    alpha_c = v.dot(mv);  // v is unit length
  }
  // completion: eigenvector of M for the opposite eigenvalue, so the
  // conjugated matrix lands in the normal form; columns of (M - αI) work
  Mat2 shifted = M - alpha_c * Mat2::Identity();
  Eigen::Vector2cd w = shifted.col(0).norm() >= shifted.col(1).norm()
                           ? shifted.col(0)
                           : shifted.col(1);
  bool eigen_completion = true;
  cplx cross = v(0) * w(1) - v(1) * w(0);
  if (w.norm() < 1e-10 || std::abs(cross) < 1e-10 * w.norm()) {
    w = Eigen::Vector2cd(-std::conj(v(1)), std::conj(v(0)));
    eigen_completion = false;
  } else {
    w /= w.norm();
  }
  Mat2 C;
  C.col(0) = v;
  C.col(1) = w;
  LoopMatrix X =
      lm_mul(LoopMatrix::constant(inv2(C)), lm_mul(R, LoopMatrix::constant(C)))
          .trimmed();

  // structure checks valid for either completion: support in modes -1..1,
  // no λ^{-1} in the diagonal, (2,1) purely positive mode
  double struct_err = 0.0;
  for (int k = X.low_order(); k <= X.high_order(); ++k) {
    Mat2 c = X.coeff(k);
    if (k < -1 || k > 1) struct_err = std::max(struct_err, c.norm());
    if (k == -1) {
      struct_err = std::max(struct_err, std::abs(c(0, 0)));
      struct_err = std::max(struct_err, std::abs(c(1, 0)));
      struct_err = std::max(struct_err, std::abs(c(1, 1)));
    }
    if (k == 0) struct_err = std::max(struct_err, std::abs(c(1, 0)));
    if (k == 1 && eigen_completion)
      struct_err = std::max(struct_err, std::abs(c(0, 0)));
  }
  if (struct_err > 1e-7)
    throw ConjugatorNotFound("residue does not reach the normal form");

  NormalForm out;
  out.C = C;
  out.X = X;
  out.alpha = X.coeff(0)(0, 0).real();
  // determinant invariant: (2n)² det R = -(a² + bc) must equal -1
  double scale = 4.0 * static_cast<double>(n) * n;
  LaurentScalar d = lm_det(R).trimmed();
  double res = 0.0;
  for (int k = d.low; k <= d.high(); ++k) {
    cplx want = k == 0 ? cplx(-1.0 / scale) : cplx(0.0);
    res = std::max(res, std::abs(d.coeff(k) - want));
  }
  out.unit_det_residual = res * scale;
  return out;
}

double pole_area_weight(const Pole& p, long group_order) {
  if (p.n < 1) throw BadInput("pole without a vertex integer");
  return static_cast<double>(group_order) / (2.0 * p.n);
}

double total_area(const FuchsianPotential& xi, long group_order) {
  double area = 0.0;
  for (const Pole& p : xi.poles) {
    if (p.residue.coeff(-1).norm() < 1e-9) continue;  // spin +1
    NormalForm nf = residue_normal_form(p.residue, p.n);
    if (nf.unit_det_residual > 1e-8)
      throw ConjugatorNotFound("normal form determinant off target");
    area += (1.0 - 2.0 * p.n * nf.alpha) * pole_area_weight(p, group_order);
  }
  return 2.0 * M_PI * area;
}

}  // namespace dpw
