#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include <json.hpp>

#include "dpw/errors.hpp"

namespace dpw {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

// Global truncation order N for all Laurent arithmetic.  Default 10; flow
// endgames may raise it to 20.  Not thread-safe to mutate while compute
// threads are running; set it once up front.
int& global_trunc_order();

// Scalar truncated Laurent series in λ.  Coefficients run from exponent
// `low` upward, contiguously.
struct LaurentScalar {
  int low = 0;
  std::vector<cplx> c;

  LaurentScalar() = default;
  LaurentScalar(int low_order, std::vector<cplx> coeffs)
      : low(low_order), c(std::move(coeffs)) {}

  static LaurentScalar constant(cplx v) { return {0, {v}}; }
  static LaurentScalar monomial(int k, cplx v) { return {k, {v}}; }

  int high() const { return low + static_cast<int>(c.size()) - 1; }
  cplx coeff(int k) const {
    if (k < low || k > high()) return {};
    return c[static_cast<size_t>(k - low)];
  }
  cplx eval(cplx lambda) const;
  double norm() const;  // max |coeff|

  // Drops exact-zero margins; empty series becomes low=0, {0}.
  LaurentScalar trimmed() const;
};

LaurentScalar ls_add(const LaurentScalar& a, const LaurentScalar& b);
LaurentScalar ls_sub(const LaurentScalar& a, const LaurentScalar& b);
LaurentScalar ls_mul(const LaurentScalar& a, const LaurentScalar& b);
LaurentScalar ls_scale(const LaurentScalar& a, cplx s);
// 1/a as a series; requires a nonzero leading coefficient.
LaurentScalar ls_inverse(const LaurentScalar& a, int want_high);
// √a with even leading exponent, principal branch on the leading coefficient.
LaurentScalar ls_sqrt(const LaurentScalar& a, int want_high);

// 2×2 matrix-valued truncated Laurent series in λ.  Immutable in spirit:
// all operations return new values.
class LoopMatrix {
public:
  LoopMatrix() : low_(0), c_(1, Mat2::Zero()) {}
  LoopMatrix(int low, std::vector<Mat2> coeffs);

  static LoopMatrix zero() { return LoopMatrix(); }
  static LoopMatrix identity();
  static LoopMatrix constant(const Mat2& m);
  // m·λ^k
  static LoopMatrix monomial(int k, const Mat2& m);

  int low_order() const { return low_; }
  int high_order() const { return low_ + static_cast<int>(c_.size()) - 1; }
  const std::vector<Mat2>& coeffs() const { return c_; }
  Mat2 coeff(int k) const {
    if (k < low_ || k > high_order()) return Mat2::Zero();
    return c_[static_cast<size_t>(k - low_)];
  }

  double tail_norm() const { return tail_; }
  double norm() const;  // max Frobenius norm over modes

  LoopMatrix trimmed() const;  // drop exact-zero margins

  friend LoopMatrix lm_add(const LoopMatrix& a, const LoopMatrix& b);
  friend LoopMatrix lm_sub(const LoopMatrix& a, const LoopMatrix& b);
  friend LoopMatrix lm_mul(const LoopMatrix& a, const LoopMatrix& b);
  friend LoopMatrix lm_scale(const LoopMatrix& a, cplx s);
  friend LoopMatrix lm_scale_series(const LoopMatrix& a, const LaurentScalar& s);
  friend LoopMatrix lm_shift(const LoopMatrix& a, int k);  // multiply by λ^k
  friend LoopMatrix lm_inverse(const LoopMatrix& a);
  friend LoopMatrix lm_star(const LoopMatrix& a);

private:
  void set_tail(double t) { tail_ = t; }

  int low_;
  std::vector<Mat2> c_;
  double tail_ = 0.0;  // accumulated norm of modes dropped above N
};

LoopMatrix lm_add(const LoopMatrix& a, const LoopMatrix& b);
LoopMatrix lm_sub(const LoopMatrix& a, const LoopMatrix& b);
LoopMatrix lm_mul(const LoopMatrix& a, const LoopMatrix& b);
LoopMatrix lm_scale(const LoopMatrix& a, cplx s);
LoopMatrix lm_scale_series(const LoopMatrix& a, const LaurentScalar& s);
LoopMatrix lm_shift(const LoopMatrix& a, int k);

// Series inverse; requires low_order = 0 and det a(0) ≠ 0.
LoopMatrix lm_inverse(const LoopMatrix& a);

// General inverse via adjugate and scalar-series inversion of det; the
// leading det coefficient must be nonzero.  Used by gauges whose det is a
// unit Laurent monomial.
LoopMatrix lm_inverse_general(const LoopMatrix& a);

Mat2 lm_eval(const LoopMatrix& a, cplx lambda);
// a*(λ) = a(1/λ̄)†: coefficient at j is the conjugate transpose of the
// coefficient at −j.
LoopMatrix lm_star(const LoopMatrix& a);
LaurentScalar lm_det(const LoopMatrix& a);
LaurentScalar lm_trace(const LoopMatrix& a);

nlohmann::json lm_to_json(const LoopMatrix& a);
LoopMatrix lm_from_json(const nlohmann::json& j);

}  // namespace dpw
