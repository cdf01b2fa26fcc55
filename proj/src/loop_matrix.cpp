#include "dpw/loop_matrix.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace dpw {

int& global_trunc_order() {
  static int N = 10;
  return N;
}

// ---------------------------------------------------------------- scalars

cplx LaurentScalar::eval(cplx lambda) const {
  // Horner on the nonnegative-shifted polynomial, then the λ^low prefactor.
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * lambda + *it;
  return acc * std::pow(lambda, low);
}

double LaurentScalar::norm() const {
  double m = 0.0;
  for (const auto& v : c) m = std::max(m, std::abs(v));
  return m;
}

LaurentScalar LaurentScalar::trimmed() const {
  size_t b = 0, e = c.size();
  while (b < e && c[b] == cplx{}) ++b;
  while (e > b && c[e - 1] == cplx{}) --e;
  if (b == e) return {0, {cplx{}}};
  return {low + static_cast<int>(b),
          std::vector<cplx>(c.begin() + b, c.begin() + e)};
}

LaurentScalar ls_add(const LaurentScalar& a, const LaurentScalar& b) {
  int lo = std::min(a.low, b.low);
  int hi = std::max(a.high(), b.high());
  LaurentScalar r(lo, std::vector<cplx>(static_cast<size_t>(hi - lo + 1)));
  for (int k = lo; k <= hi; ++k)
    r.c[static_cast<size_t>(k - lo)] = a.coeff(k) + b.coeff(k);
  return r;
}

LaurentScalar ls_sub(const LaurentScalar& a, const LaurentScalar& b) {
  return ls_add(a, ls_scale(b, -1.0));
}

LaurentScalar ls_scale(const LaurentScalar& a, cplx s) {
  LaurentScalar r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

LaurentScalar ls_mul(const LaurentScalar& a, const LaurentScalar& b) {
  int N = global_trunc_order();
  int lo = a.low + b.low;
  int hi = std::min(a.high() + b.high(), N);
  if (hi < lo) hi = lo;
  LaurentScalar r(lo, std::vector<cplx>(static_cast<size_t>(hi - lo + 1)));
  for (int i = a.low; i <= a.high(); ++i) {
    cplx ai = a.coeff(i);
    if (ai == cplx{}) continue;
    for (int j = b.low; j <= b.high(); ++j) {
      int k = i + j;
      if (k > hi) break;
      r.c[static_cast<size_t>(k - lo)] += ai * b.coeff(j);
    }
  }
  return r;
}

LaurentScalar ls_inverse(const LaurentScalar& a, int want_high) {
  LaurentScalar t = a.trimmed();
  if (std::abs(t.c.front()) < 1e-300)
    throw SingularAtZero("ls_inverse: zero leading coefficient");
  // 1/(c0 λ^m (1 + u)) with u the higher-order tail.
  int m = t.low;
  cplx c0 = t.c.front();
  int len = want_high + m + 1;  // result exponents −m .. want_high
  if (len < 1) len = 1;
  std::vector<cplx> y(static_cast<size_t>(len));
  y[0] = 1.0 / c0;
  for (int k = 1; k < len; ++k) {
    cplx s = 0.0;
    for (int j = 1; j <= k && j < static_cast<int>(t.c.size()); ++j)
      s += t.c[static_cast<size_t>(j)] * y[static_cast<size_t>(k - j)];
    y[static_cast<size_t>(k)] = -s / c0;
  }
  return {-m, std::move(y)};
}

LaurentScalar ls_sqrt(const LaurentScalar& a, int want_high) {
  LaurentScalar t = a.trimmed();
  if (std::abs(t.c.front()) < 1e-300)
    throw SingularAtZero("ls_sqrt: zero leading coefficient");
  if (t.low % 2 != 0)
    throw BadInput("ls_sqrt: odd leading exponent");
  int m = t.low / 2;
  cplx s0 = std::sqrt(t.c.front());
  int len = want_high - m + 1;
  if (len < 1) len = 1;
  std::vector<cplx> s(static_cast<size_t>(len));
  s[0] = s0;
  for (int k = 1; k < len; ++k) {
    cplx acc = (k < static_cast<int>(t.c.size()))
                   ? t.c[static_cast<size_t>(k)]
                   : cplx{};
    for (int j = 1; j < k; ++j)
      acc -= s[static_cast<size_t>(j)] * s[static_cast<size_t>(k - j)];
    s[static_cast<size_t>(k)] = acc / (2.0 * s0);
  }
  return {m, std::move(s)};
}

// ----------------------------------------------------------- loop matrices

LoopMatrix::LoopMatrix(int low, std::vector<Mat2> coeffs) : low_(low), c_(std::move(coeffs)) {
  if (c_.empty()) c_.assign(1, Mat2::Zero());
}

LoopMatrix LoopMatrix::identity() { return constant(Mat2::Identity()); }

LoopMatrix LoopMatrix::constant(const Mat2& m) {
  return LoopMatrix(0, {m});
}

LoopMatrix LoopMatrix::monomial(int k, const Mat2& m) {
  return LoopMatrix(k, {m});
}

double LoopMatrix::norm() const {
  double m = 0.0;
  for (const auto& a : c_) m = std::max(m, a.norm());
  return m;
}

LoopMatrix LoopMatrix::trimmed() const {
  size_t b = 0, e = c_.size();
  auto zero = [](const Mat2& m) { return m.isZero(0.0); };
  while (b < e && zero(c_[b])) ++b;
  while (e > b && zero(c_[e - 1])) --e;
  if (b == e) return LoopMatrix();
  LoopMatrix r(low_ + static_cast<int>(b),
               std::vector<Mat2>(c_.begin() + b, c_.begin() + e));
  r.tail_ = tail_;
  return r;
}

LoopMatrix lm_add(const LoopMatrix& a, const LoopMatrix& b) {
  int lo = std::min(a.low_, b.low_);
  int hi = std::max(a.high_order(), b.high_order());
  std::vector<Mat2> c(static_cast<size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k)
    c[static_cast<size_t>(k - lo)] = a.coeff(k) + b.coeff(k);
  LoopMatrix r(lo, std::move(c));
  r.tail_ = a.tail_ + b.tail_;
  return r;
}

LoopMatrix lm_sub(const LoopMatrix& a, const LoopMatrix& b) {
  return lm_add(a, lm_scale(b, -1.0));
}

LoopMatrix lm_scale(const LoopMatrix& a, cplx s) {
  LoopMatrix r = a;
  for (auto& m : r.c_) m *= s;
  r.tail_ = a.tail_ * std::abs(s);
  return r;
}

LoopMatrix lm_shift(const LoopMatrix& a, int k) {
  LoopMatrix r = a;
  r.low_ += k;
  return r;
}

LoopMatrix lm_mul(const LoopMatrix& a, const LoopMatrix& b) {
  int N = global_trunc_order();
  int lo = a.low_ + b.low_;
  int full_hi = a.high_order() + b.high_order();
  int hi = std::min(full_hi, N);
  if (hi < lo) hi = lo;
  std::vector<Mat2> c(static_cast<size_t>(hi - lo + 1), Mat2::Zero());
  double dropped = 0.0;
  for (int i = a.low_; i <= a.high_order(); ++i) {
    const Mat2& ai = a.coeff(i);
    if (ai.isZero(0.0)) continue;
    for (int j = b.low_; j <= b.high_order(); ++j) {
      int k = i + j;
      Mat2 p = ai * b.coeff(j);
      if (k > hi)
        dropped += p.norm();
      else
        c[static_cast<size_t>(k - lo)] += p;
    }
  }
  LoopMatrix r(lo, std::move(c));
  r.tail_ = a.tail_ + b.tail_ + dropped;
  return r;
}

LoopMatrix lm_scale_series(const LoopMatrix& a, const LaurentScalar& s) {
  int N = global_trunc_order();
  int lo = a.low_ + s.low;
  int hi = std::min(a.high_order() + s.high(), N);
  if (hi < lo) hi = lo;
  std::vector<Mat2> c(static_cast<size_t>(hi - lo + 1), Mat2::Zero());
  double dropped = 0.0;
  for (int i = a.low_; i <= a.high_order(); ++i) {
    const Mat2& ai = a.coeff(i);
    if (ai.isZero(0.0)) continue;
    for (int j = s.low; j <= s.high(); ++j) {
      int k = i + j;
      Mat2 p = ai * s.coeff(j);
      if (k > hi)
        dropped += p.norm();
      else
        c[static_cast<size_t>(k - lo)] += p;
    }
  }
  LoopMatrix r(lo, std::move(c));
  r.tail_ = a.tail_ + dropped;
  return r;
}

LoopMatrix lm_inverse(const LoopMatrix& a) {
  if (a.low_order() != 0) {
    LoopMatrix t = a.trimmed();
    if (t.low_order() != 0)
      throw SingularAtZero("lm_inverse: low_order != 0");
    return lm_inverse(t);
  }
  Mat2 a0 = a.coeff(0);
  cplx d = a0(0, 0) * a0(1, 1) - a0(0, 1) * a0(1, 0);
  if (std::abs(d) < 1e-12) throw SingularAtZero("lm_inverse: det a(0) ~ 0");
  Mat2 a0inv;
  a0inv << a0(1, 1), -a0(0, 1), -a0(1, 0), a0(0, 0);
  a0inv /= d;
  int N = global_trunc_order();
  std::vector<Mat2> y(static_cast<size_t>(N + 1));
  y[0] = a0inv;
  for (int k = 1; k <= N; ++k) {
    Mat2 s = Mat2::Zero();
    for (int j = 1; j <= k; ++j) s += a.coeff(j) * y[static_cast<size_t>(k - j)];
    y[static_cast<size_t>(k)] = -a0inv * s;
  }
  return LoopMatrix(0, std::move(y));
}

LoopMatrix lm_inverse_general(const LoopMatrix& a) {
  // adj(a) / det(a) as series.
  LoopMatrix t = a.trimmed();
  int lo = t.low_order(), hi = t.high_order();
  std::vector<Mat2> adj(static_cast<size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k) {
    Mat2 m = t.coeff(k), v;
    v << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    adj[static_cast<size_t>(k - lo)] = v;
  }
  LaurentScalar det = lm_det(t).trimmed();
  // headroom so the truncated product is exact through mode N
  LaurentScalar dinv = ls_inverse(det, global_trunc_order() + (hi - lo) + 2);
  return lm_scale_series(LoopMatrix(lo, std::move(adj)), dinv);
}

Mat2 lm_eval(const LoopMatrix& a, cplx lambda) {
  Mat2 acc = Mat2::Zero();
  const auto& c = a.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * lambda + *it;
  return acc * std::pow(lambda, a.low_order());
}

LoopMatrix lm_star(const LoopMatrix& a) {
  int lo = -a.high_order(), hi = -a.low_order();
  std::vector<Mat2> c(static_cast<size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k)
    c[static_cast<size_t>(k - lo)] = a.coeff(-k).adjoint();
  return LoopMatrix(lo, std::move(c));
}

LaurentScalar lm_det(const LoopMatrix& a) {
  int lo = 2 * a.low_order();
  int hi = 2 * a.high_order();
  LaurentScalar r(lo, std::vector<cplx>(static_cast<size_t>(hi - lo + 1)));
  for (int i = a.low_order(); i <= a.high_order(); ++i)
    for (int j = a.low_order(); j <= a.high_order(); ++j) {
      Mat2 x = a.coeff(i), y = a.coeff(j);
      r.c[static_cast<size_t>(i + j - lo)] +=
          x(0, 0) * y(1, 1) - x(0, 1) * y(1, 0);
    }
  return r;
}

LaurentScalar lm_trace(const LoopMatrix& a) {
  LaurentScalar r(a.low_order(),
                  std::vector<cplx>(a.coeffs().size()));
  for (size_t k = 0; k < a.coeffs().size(); ++k)
    r.c[k] = a.coeffs()[k].trace();
  return r;
}

nlohmann::json lm_to_json(const LoopMatrix& a) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& m : a.coeffs()) {
    nlohmann::json entry = nlohmann::json::array();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        entry.push_back({m(r, c).real(), m(r, c).imag()});
    coeffs.push_back(std::move(entry));
  }
  return {{"low", a.low_order()}, {"coeffs", std::move(coeffs)}};
}

LoopMatrix lm_from_json(const nlohmann::json& j) {
  int low = j.at("low").get<int>();
  std::vector<Mat2> c;
  for (const auto& entry : j.at("coeffs")) {
    if (entry.size() != 4) throw BadInput("lm_from_json: bad coefficient");
    Mat2 m;
    for (int k = 0; k < 4; ++k)
      m(k / 2, k % 2) = cplx(entry[static_cast<size_t>(k)][0].get<double>(),
                             entry[static_cast<size_t>(k)][1].get<double>());
    c.push_back(m);
  }
  return LoopMatrix(low, std::move(c));
}

}  // namespace dpw
