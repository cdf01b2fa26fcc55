#include "dpw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dpw {

namespace {

constexpr double kStructTol = 1e-10;

// entrywise z-scaling of a residue picked up by diagonal half-power gauges:
// (1,2) entry times s12, (2,1) entry times s21, per λ-mode
LoopMatrix lm_entry_scale(const LoopMatrix& a, cplx s12, cplx s21) {
  std::vector<Mat2> c = a.coeffs();
  for (Mat2& m : c) {
    m(0, 1) *= s12;
    m(1, 0) *= s21;
  }
  return LoopMatrix(a.low_order(), std::move(c));
}

LoopMatrix sum_residues(const FuchsianPotential& xi, bool finite_only) {
  LoopMatrix s = LoopMatrix::zero();
  for (const Pole& p : xi.poles) {
    if (finite_only && p.at_infinity) continue;
    s = lm_add(s, p.residue);
  }
  return s;
}

// best rational approximation with bounded denominator (continued fraction)
std::pair<long, long> rationalize(double x, long max_den) {
  bool neg = x < 0;
  double v = std::abs(x);
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergents p/q
  double rem = v;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(rem);
    if (fl > 1e17) break;
    long a = static_cast<long>(fl);
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den || q2 <= 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double frac = rem - fl;
    if (frac < 1e-12) break;
    rem = 1.0 / frac;
  }
  if (q1 <= 0) return {0, 1};
  long g = std::gcd(p1, q1);
  if (g > 1) {
    p1 /= g;
    q1 /= g;
  }
  return {neg ? -p1 : p1, q1};
}

void set_ev_rational(Pole& p, long num, long den) {
  if (num < 0) num = -num;
  long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  p.ev_num = num;
  p.ev_den = den;
}

// infer the positive residue eigenvalue from det R = -ev² and store it
void measure_ev(Pole& p, long max_den = 400) {
  LaurentScalar d = lm_det(p.residue).trimmed();
  cplx d0 = d.eval(cplx(1.0, 0.0));
  double ev = std::sqrt(std::max(0.0, -d0.real()));
  auto [num, den] = rationalize(ev, max_den);
  set_ev_rational(p, num, den);
}

int spin_from_residue(const LoopMatrix& r) {
  return r.coeff(-1).norm() > 1e-9 ? -1 : 1;
}

// vertex integer from (ev, spin); 0 when the pair is not of vertex type
int vertex_from_ev(long num, long den, int spin) {
  if (2 * num == den) return 1;  // ev = 1/2, removable vertex
  if (spin == -1) {
    // ev = 1/(2n)
    if (num != 0 && den % (2 * num) == 0) return static_cast<int>(den / (2 * num));
    return 0;
  }
  // ev = (n-1)/(2n)  =>  n = den/(den-2num)
  long r = den - 2 * num;
  if (r > 0 && den % r == 0) return static_cast<int>(den / r);
  return 0;
}

void refresh_vertex_data(Pole& p) {
  p.spin = spin_from_residue(p.residue);
  p.n = vertex_from_ev(p.ev_num, p.ev_den, p.spin);
}

// larger column of the λ^{-1} coefficient; nilpotent, so its columns lie in
// its kernel
Eigen::Vector2cd nilpotent_kernel_vector(const LoopMatrix& r) {
  Mat2 m = r.coeff(-1);
  Eigen::Vector2cd c0 = m.col(0), c1 = m.col(1);
  return c0.norm() >= c1.norm() ? c0 : c1;
}

// column of a 2x2 loop matrix as a loop matrix with the other column zero
// is never needed; instead assemble h from two column series directly
struct ColumnSeries {
  int low = 0;
  std::vector<Eigen::Vector2cd> c;

  Eigen::Vector2cd coeff(int k) const {
    if (k < low || k > low + static_cast<int>(c.size()) - 1)
      return Eigen::Vector2cd::Zero();
    return c[static_cast<size_t>(k - low)];
  }
  double norm() const {
    double m = 0;
    for (const auto& v : c) m = std::max(m, v.norm());
    return m;
  }
};

ColumnSeries take_column(const LoopMatrix& a, int j) {
  ColumnSeries out;
  out.low = a.low_order();
  for (const Mat2& m : a.coeffs()) out.c.push_back(m.col(j));
  return out;
}

// shift so the lowest nonzero mode sits at exponent 0, then scale so the
// first usable entry of the λ^0 coefficient is 1
ColumnSeries normalize_column(ColumnSeries v) {
  size_t first = 0;
  while (first < v.c.size() && v.c[first].norm() < 1e-13) ++first;
  if (first == v.c.size()) throw EigenlineDegenerate("eigenline vanishes");
  v.c.erase(v.c.begin(), v.c.begin() + static_cast<long>(first));
  v.low = 0;
  cplx s = std::abs(v.c[0](0)) > 1e-12 ? v.c[0](0) : v.c[0](1);
  for (auto& e : v.c) e /= s;
  return v;
}

LoopMatrix columns_to_matrix(const ColumnSeries& a, const ColumnSeries& b) {
  int low = std::min(a.low, b.low);
  int high = std::max(a.low + static_cast<int>(a.c.size()) - 1,
                      b.low + static_cast<int>(b.c.size()) - 1);
  std::vector<Mat2> c;
  for (int k = low; k <= high; ++k) {
    Mat2 m;
    m.col(0) = a.coeff(k);
    m.col(1) = b.coeff(k);
    c.push_back(m);
  }
  return LoopMatrix(low, std::move(c));
}

const Mat2 kSigma = (Mat2() << cplx(0, 1), 0, 0, cplx(0, -1)).finished();

std::vector<cplx> reality_z_samples() {
  std::vector<cplx> zs;
  for (int j = 0; j < 8; ++j) {
    double th = 0.37 + 2.0 * M_PI * j / 8.0;
    zs.push_back(std::polar(0.6, th));
    zs.push_back(std::polar(1.6, th));
  }
  return zs;
}

std::vector<cplx> circle_lambdas(int count) {
  std::vector<cplx> ls;
  for (int j = 0; j < count; ++j)
    ls.push_back(std::polar(1.0, 0.23 + 2.0 * M_PI * j / count));
  return ls;
}

}  // namespace

const Pole* FuchsianPotential::pole_at_infinity() const {
  for (const Pole& p : poles)
    if (p.at_infinity) return &p;
  return nullptr;
}

std::vector<size_t> FuchsianPotential::finite_pole_indices() const {
  std::vector<size_t> out;
  for (size_t k = 0; k < poles.size(); ++k)
    if (!poles[k].at_infinity) out.push_back(k);
  return out;
}

LoopMatrix FuchsianPotential::eval_z(cplx z) const {
  LoopMatrix s = LoopMatrix::zero();
  for (const Pole& p : poles) {
    if (p.at_infinity) continue;
    s = lm_add(s, lm_scale(p.residue, cplx(1.0) / (z - p.z)));
  }
  return s;
}

Mat2 FuchsianPotential::eval(cplx z, cplx lambda) const {
  Mat2 s = Mat2::Zero();
  for (const Pole& p : poles) {
    if (p.at_infinity) continue;
    s += lm_eval(p.residue, lambda) / (z - p.z);
  }
  return s;
}

double FuchsianPotential::sum_residual() const {
  return sum_residues(*this, false).norm();
}

double FuchsianPotential::trace_residual() const {
  double m = 0;
  for (const Pole& p : poles) m = std::max(m, lm_trace(p.residue).norm());
  return m;
}

double FuchsianPotential::det_residual() const {
  double m = 0;
  for (const Pole& p : poles) {
    double e = p.ev();
    LaurentScalar d =
        ls_add(lm_det(p.residue), LaurentScalar::constant(e * e));
    m = std::max(m, d.norm());
  }
  return m;
}

MoebiusMap MoebiusMap::from_unnormalized(cplx a, cplx b, cplx c, cplx d) {
  cplx det = a * d - b * c;
  if (std::abs(det) < 1e-14) throw BadInput("degenerate moebius map");
  cplx s = std::sqrt(det);
  return {a / s, b / s, c / s, d / s};
}

MoebiusMap MoebiusMap::three_points(cplx p0, cplx p1, cplx p2) {
  // z -> ((z-p0)(p1-p2)) / ((z-p2)(p1-p0))
  cplx k = (p1 - p2) / (p1 - p0);
  return from_unnormalized(k, -k * p0, cplx(1.0), -p2);
}

cplx MoebiusMap::apply(cplx z) const { return (a * z + b) / (c * z + d); }

bool MoebiusMap::sends_to_infinity(cplx z) const {
  return std::abs(c * z + d) < 1e-12 * std::max(1.0, std::abs(z));
}

cplx MoebiusMap::apply_infinity() const { return a / c; }

MoebiusMap MoebiusMap::inverse() const { return {d, -b, -c, a}; }

double check_reality(const FuchsianPotential& xi) {
  for (const Pole& p : xi.poles) {
    if (p.at_infinity) {
      if (p.residue.norm() > kStructTol)
        throw PoleOffCircle("pole at infinity in reality check");
      continue;
    }
    if (std::abs(std::abs(p.z) - 1.0) > 1e-8)
      throw PoleOffCircle("pole off the unit circle");
  }
  double worst = 0;
  for (cplx z : reality_z_samples()) {
    for (cplx lambda : circle_lambdas(8)) {
      Mat2 a = xi.eval(cplx(1.0) / std::conj(z), std::conj(lambda));
      Mat2 lhs = -a.conjugate() / (z * z);
      Mat2 rhs = xi.eval(z, lambda);
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

FuchsianPotential apply_moebius(const FuchsianPotential& xi,
                                const MoebiusMap& m) {
  FuchsianPotential out = xi;
  for (Pole& p : out.poles) {
    if (p.at_infinity) {
      if (!m.infinity_to_infinity()) {
        p.at_infinity = false;
        p.z = m.apply_infinity();
      }
    } else if (m.sends_to_infinity(p.z)) {
      p.at_infinity = true;
      p.z = cplx{};
    } else {
      p.z = m.apply(p.z);
    }
  }
  for (size_t i = 0; i < out.poles.size(); ++i)
    for (size_t j = i + 1; j < out.poles.size(); ++j) {
      const Pole &a = out.poles[i], &b = out.poles[j];
      if (a.at_infinity && b.at_infinity)
        throw PoleCollision("two poles map to infinity");
      if (!a.at_infinity && !b.at_infinity && std::abs(a.z - b.z) < 1e-10)
        throw PoleCollision("pole images collide");
    }
  if (m.sends_to_infinity(xi.base_point))
    throw BadInput("base point maps to infinity");
  out.base_point = m.apply(xi.base_point);
  return out;
}

FuchsianPotential pullback_power(const FuchsianPotential& xi, int n) {
  if (n < 1) throw BadInput("pullback exponent must be positive");
  FuchsianPotential out;
  out.lambda1 = xi.lambda1;
  out.reflection_form = false;
  for (const Pole& p : xi.poles) {
    if (p.at_infinity || std::abs(p.z) < 1e-12) {
      Pole q = p;
      q.residue = lm_scale(p.residue, static_cast<double>(n));
      set_ev_rational(q, p.ev_num * n, p.ev_den);
      refresh_vertex_data(q);
      out.poles.push_back(q);
      continue;
    }
    double r = std::pow(std::abs(p.z), 1.0 / n);
    double th = std::arg(p.z) / n;
    for (int j = 0; j < n; ++j) {
      Pole q = p;
      q.z = std::polar(r, th + 2.0 * M_PI * j / n);
      out.poles.push_back(q);
    }
  }
  // base point: principal n-th root of the old one
  out.base_point = std::polar(std::pow(std::abs(xi.base_point), 1.0 / n),
                              std::arg(xi.base_point) / n);
  return out;
}

double pushdown_symmetry_residual(const FuchsianPotential& xi) {
  double worst = 0;
  for (cplx z : reality_z_samples()) {
    for (cplx lambda : circle_lambdas(5)) {
      Mat2 lhs = -xi.eval(-z, lambda);
      Mat2 x = xi.eval(z, lambda);
      Mat2 rhs = kSigma.inverse() * x * kSigma;
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

FuchsianPotential pushdown_z2(const FuchsianPotential& xi) {
  double sres = pushdown_symmetry_residual(xi);
  if (sres > 1e-8) throw SymmetryViolated("pushdown symmetry residual " +
                                          std::to_string(sres));

  const Mat2 half_diag = (Mat2() << 0.5, 0, 0, -0.5).finished();

  // residues after gauging by diag(z^{1/2}, z^{-1/2})
  std::vector<size_t> pair_poles;  // finite, nonzero
  const Pole* zero_pole = nullptr;
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    const Pole& p = xi.poles[k];
    if (p.at_infinity) continue;
    if (std::abs(p.z) < 1e-9)
      zero_pole = &p;
    else
      pair_poles.push_back(k);
  }

  auto gauged_residue_at = [&](const Pole& p) {
    return lm_entry_scale(p.residue, cplx(1.0) / p.z, p.z);
  };

  // at z = 0 the (1,2) entry must stay a simple pole
  LoopMatrix gauged_zero;
  {
    LoopMatrix reg12 = LoopMatrix::zero();  // regular part of ξ at 0
    for (size_t k : pair_poles) {
      const Pole& p = xi.poles[k];
      reg12 = lm_add(reg12, lm_scale(p.residue, cplx(-1.0) / p.z));
    }
    LoopMatrix nilp;
    {
      std::vector<Mat2> c;
      int low = reg12.low_order();
      for (const Mat2& m : reg12.coeffs()) {
        Mat2 e = Mat2::Zero();
        e(0, 1) = m(0, 1);
        c.push_back(e);
      }
      nilp = LoopMatrix(low, std::move(c));
    }
    gauged_zero = lm_add(LoopMatrix::constant(half_diag), nilp);
    if (zero_pole) {
      double offdiag = 0;
      for (const Mat2& m : zero_pole->residue.coeffs())
        offdiag = std::max(offdiag, std::abs(m(0, 1)));
      if (offdiag > 1e-9)
        throw SymmetryViolated("residue at 0 must be lower triangular");
      gauged_zero = lm_add(gauged_zero, zero_pole->residue);
    }
  }

  // group the remaining poles into ±pairs
  FuchsianPotential out;
  out.lambda1 = xi.lambda1;
  out.reflection_form = false;
  std::vector<bool> used(xi.poles.size(), false);
  LoopMatrix finite_sum = LoopMatrix::zero();
  for (size_t k : pair_poles) {
    if (used[k]) continue;
    const Pole& p = xi.poles[k];
    size_t partner = k;
    for (size_t j : pair_poles) {
      if (j == k || used[j]) continue;
      if (std::abs(xi.poles[j].z + p.z) < 1e-8 * std::max(1.0, std::abs(p.z))) {
        partner = j;
        break;
      }
    }
    if (partner == k) throw SymmetryViolated("pole set not symmetric under -z");
    used[k] = used[partner] = true;
    LoopMatrix ra = gauged_residue_at(p);
    LoopMatrix rb = gauged_residue_at(xi.poles[partner]);
    if (lm_sub(ra, rb).norm() > 1e-7)
      throw SymmetryViolated("paired residues disagree after gauge");
    Pole q = p;
    q.z = p.z * p.z;
    q.residue = lm_scale(lm_add(ra, rb), 0.5);
    refresh_vertex_data(q);
    out.poles.push_back(q);
    finite_sum = lm_add(finite_sum, q.residue);
  }

  // created (or transformed) pole at the branch point 0
  {
    Pole q;
    q.z = cplx{};
    q.residue = lm_scale(gauged_zero, 0.5);
    measure_ev(q);
    refresh_vertex_data(q);
    out.poles.push_back(q);
    finite_sum = lm_add(finite_sum, q.residue);
  }
  // and at infinity, via the residue theorem
  {
    Pole q;
    q.at_infinity = true;
    q.residue = lm_scale(finite_sum, -1.0);
    measure_ev(q);
    refresh_vertex_data(q);
    out.poles.push_back(q);
  }
  out.base_point = xi.base_point * xi.base_point;
  return out;
}

LoopMatrix normalize_gauge_sign(const LoopMatrix& g) {
  cplx e = g.coeff(0)(0, 0);
  if (std::abs(e.real()) < 1e-12) e = g.coeff(0)(1, 0);
  if (e.real() < 0) return lm_scale(g, -1.0);
  return g;
}

FuchsianPotential flip_gauge(const FuchsianPotential& xi, size_t k) {
  if (k >= xi.poles.size() || xi.poles[k].at_infinity)
    throw BadInput("flip gauge needs a finite pole index");
  const Pole* pinf = xi.pole_at_infinity();
  if (!pinf) throw BadInput("flip gauge needs a pole at infinity");
  const Pole& pp = xi.poles[k];
  cplx p = pp.z;

  double nuA = pp.ev();
  double nuB = pinf->ev();
  // positive-eigenvalue eigenlines: columns of R + ν·Id
  LoopMatrix ea = lm_add(pp.residue, lm_scale(LoopMatrix::identity(), nuA));
  LoopMatrix eb = lm_add(pinf->residue, lm_scale(LoopMatrix::identity(), nuB));
  ColumnSeries ca0 = take_column(ea, 0), ca1 = take_column(ea, 1);
  ColumnSeries cb0 = take_column(eb, 0), cb1 = take_column(eb, 1);
  ColumnSeries va = normalize_column(ca0.norm() >= ca1.norm() ? ca0 : ca1);
  ColumnSeries vb = normalize_column(cb0.norm() >= cb1.norm() ? cb0 : cb1);
  LoopMatrix h = normalize_gauge_sign(columns_to_matrix(va, vb).trimmed());
  LaurentScalar dh = lm_det(h).trimmed();
  if (std::abs(dh.coeff(0)) < 1e-10 && dh.low >= 0)
    throw EigenlineDegenerate("eigenlines coincide at lambda 0");
  LoopMatrix hinv = lm_inverse_general(h);

  // triangularity check: h must diagonalize the pole residue up to the
  // nilpotent upper part
  LoopMatrix t = lm_mul(hinv, lm_mul(pp.residue, h));
  double t21 = 0;
  for (const Mat2& m : t.coeffs()) t21 = std::max(t21, std::abs(m(1, 0)));
  if (t21 > 1e-7) throw EigenlineDegenerate("residue not triangularized");

  FuchsianPotential out;
  out.lambda1 = xi.lambda1;
  out.reflection_form = false;

  LoopMatrix reg = LoopMatrix::zero();  // regular part of ξ at p
  for (size_t j = 0; j < xi.poles.size(); ++j) {
    const Pole& q = xi.poles[j];
    if (j == k || q.at_infinity) continue;
    reg = lm_add(reg, lm_scale(q.residue, cplx(1.0) / (p - q.z)));
  }
  LoopMatrix y = lm_mul(hinv, lm_mul(reg, h));

  LoopMatrix finite_sum = LoopMatrix::zero();
  for (size_t j = 0; j < xi.poles.size(); ++j) {
    const Pole& q = xi.poles[j];
    if (j == k || q.at_infinity) continue;
    Pole nq = q;
    cplx u = q.z - p;
    nq.residue = lm_entry_scale(lm_mul(hinv, lm_mul(q.residue, h)), u,
                                cplx(1.0) / u);
    refresh_vertex_data(nq);
    out.poles.push_back(nq);
    finite_sum = lm_add(finite_sum, nq.residue);
  }

  // residue left at p after the flip
  {
    Mat2 d = Mat2::Zero();
    d(0, 0) = nuA - 0.5;
    d(1, 1) = 0.5 - nuA;
    std::vector<Mat2> c;
    for (const Mat2& m : y.coeffs()) {
      Mat2 e = Mat2::Zero();
      e(1, 0) = m(1, 0);
      c.push_back(e);
    }
    LoopMatrix rp =
        lm_add(LoopMatrix::constant(d), LoopMatrix(y.low_order(), std::move(c)))
            .trimmed();
    if (rp.norm() >= 1e-9) {
      Pole np = pp;
      np.residue = rp;
      set_ev_rational(np, std::abs(pp.ev_den - 2 * pp.ev_num), 2 * pp.ev_den);
      refresh_vertex_data(np);
      out.poles.push_back(np);
      finite_sum = lm_add(finite_sum, np.residue);
    }
  }

  {
    Pole q;
    q.at_infinity = true;
    q.residue = lm_scale(finite_sum, -1.0);
    measure_ev(q);
    refresh_vertex_data(q);
    out.poles.push_back(q);
  }
  out.base_point = xi.base_point;
  return out;
}

FuchsianPotential apply_constant_gauge(const FuchsianPotential& xi,
                                       const LoopMatrix& g) {
  LoopMatrix gi = lm_inverse_general(g);
  FuchsianPotential out = xi;
  for (Pole& p : out.poles) {
    p.residue = lm_mul(gi, lm_mul(p.residue, g));
    refresh_vertex_data(p);
  }
  return out;
}

int spin_of(const FuchsianPotential& xi, size_t k) {
  if (k >= xi.poles.size()) throw BadInput("pole index out of range");
  return spin_from_residue(xi.poles[k].residue);
}

FuchsianPotential symmetrizing_gauge(const FuchsianPotential& xi) {
  if (xi.poles.size() != 4)
    throw BadInput("symmetrizing gauge expects four poles");
  // pair poles swapped by τ(z) = -1/z
  auto tau_partner = [&](size_t i) -> size_t {
    const Pole& a = xi.poles[i];
    for (size_t j = 0; j < 4; ++j) {
      if (j == i) continue;
      const Pole& b = xi.poles[j];
      if (a.at_infinity) {
        if (!b.at_infinity && std::abs(b.z) < 1e-8) return j;
      } else if (std::abs(a.z) < 1e-8) {
        if (b.at_infinity) return j;
      } else if (!b.at_infinity &&
                 std::abs(b.z + cplx(1.0) / a.z) < 1e-8) {
        return j;
      }
    }
    throw BadInput("pole set not symmetric under -1/z");
  };
  size_t i0 = 0;
  size_t j0 = tau_partner(i0);
  size_t i1 = 5;
  for (size_t j = 1; j < 4; ++j)
    if (j != j0 && i1 == 5) i1 = j;
  size_t j1 = tau_partner(i1);

  // kernels of the λ^{-1} coefficients must be independent
  Eigen::Vector2cd ka = nilpotent_kernel_vector(xi.poles[i0].residue);
  Eigen::Vector2cd kb = nilpotent_kernel_vector(xi.poles[j0].residue);
  if (ka.norm() > 1e-12 && kb.norm() > 1e-12) {
    cplx det = ka(0) * kb(1) - ka(1) * kb(0);
    if (std::abs(det) < 1e-10 * ka.norm() * kb.norm())
      throw KernelsDependent("residue kernels coincide");
  }

  auto half_turn = [&](size_t a, size_t b, double sign) {
    LoopMatrix s = lm_add(xi.poles[a].residue, xi.poles[b].residue);
    LaurentScalar d = lm_det(s).trimmed();
    // extra scalar modes so the truncated product is exact through mode N
    int extra = s.high_order() - s.low_order() + 2;
    LaurentScalar r = ls_sqrt(d, d.low / 2 + global_trunc_order() + extra);
    LaurentScalar ri = ls_inverse(r, global_trunc_order() + extra);
    return lm_scale(lm_scale_series(s, ri), sign).trimmed();
  };

  LoopMatrix h;
  bool found = false;
  for (int attempt = 0; attempt < 2 && !found; ++attempt) {
    size_t a0 = attempt == 0 ? i0 : i1;
    size_t b0 = attempt == 0 ? j0 : j1;
    size_t a1 = attempt == 0 ? i1 : i0;
    size_t b1 = attempt == 0 ? j1 : j0;
    LoopMatrix h1 = half_turn(a0, b0, 1.0);
    LoopMatrix h2 = half_turn(a1, b1, -1.0);
    double agree = std::min(lm_sub(h1, h2).norm(), lm_add(h1, h2).norm());
    if (agree < 1e-6) {
      h = h1;
      found = true;
    }
  }
  if (!found) throw SymmetryViolated("half-turn candidates disagree");

  // h is a trace-free square root of -Id; its ±i eigenline columns give g
  LoopMatrix hp = lm_add(h, lm_scale(LoopMatrix::identity(), cplx(0, 1)));
  LoopMatrix hm = lm_add(h, lm_scale(LoopMatrix::identity(), cplx(0, -1)));
  ColumnSeries p0 = take_column(hp, 0), p1 = take_column(hp, 1);
  ColumnSeries m0 = take_column(hm, 0), m1 = take_column(hm, 1);
  ColumnSeries vp = normalize_column(p0.norm() >= p1.norm() ? p0 : p1);
  ColumnSeries vm = normalize_column(m0.norm() >= m1.norm() ? m0 : m1);
  LoopMatrix g = columns_to_matrix(vp, vm).trimmed();
  LaurentScalar dg = lm_det(g).trimmed();
  if (dg.low % 2 != 0) {
    g = lm_shift(g, 1);  // make det exponent even before the square root
    dg = lm_det(g).trimmed();
  }
  int extra = g.high_order() - g.low_order() + 2;
  LaurentScalar rg = ls_sqrt(dg, dg.low / 2 + global_trunc_order() + extra);
  g = normalize_gauge_sign(
      lm_scale_series(g, ls_inverse(rg, global_trunc_order() + extra))
          .trimmed());
  return apply_constant_gauge(xi, g);
}

nlohmann::json potential_to_json(const FuchsianPotential& xi) {
  nlohmann::json j;
  j["poles"] = nlohmann::json::array();
  j["residues"] = nlohmann::json::array();
  j["nu"] = nlohmann::json::array();
  j["n"] = nlohmann::json::array();
  j["spin"] = nlohmann::json::array();
  for (const Pole& p : xi.poles) {
    if (p.at_infinity)
      j["poles"].push_back("inf");
    else
      j["poles"].push_back({p.z.real(), p.z.imag()});
    j["residues"].push_back(lm_to_json(p.residue));
    j["nu"].push_back({p.ev_num, p.ev_den});
    j["n"].push_back(p.n);
    j["spin"].push_back(p.spin);
  }
  j["eval_points"] = {{xi.lambda1.real(), xi.lambda1.imag()},
                      {-xi.lambda1.real(), -xi.lambda1.imag()}};
  j["base_point"] = {xi.base_point.real(), xi.base_point.imag()};
  return j;
}

FuchsianPotential potential_from_json(const nlohmann::json& j) {
  FuchsianPotential xi;
  size_t count = j.at("poles").size();
  for (size_t k = 0; k < count; ++k) {
    Pole p;
    const auto& pz = j.at("poles").at(k);
    if (pz.is_string()) {
      if (pz.get<std::string>() != "inf") throw BadInput("bad pole entry");
      p.at_infinity = true;
    } else {
      p.z = cplx(pz.at(0).get<double>(), pz.at(1).get<double>());
    }
    p.residue = lm_from_json(j.at("residues").at(k));
    p.ev_num = j.at("nu").at(k).at(0).get<long>();
    p.ev_den = j.at("nu").at(k).at(1).get<long>();
    p.n = j.at("n").at(k).get<int>();
    p.spin = j.at("spin").at(k).get<int>();
    xi.poles.push_back(std::move(p));
  }
  const auto& ev = j.at("eval_points").at(0);
  xi.lambda1 = cplx(ev.at(0).get<double>(), ev.at(1).get<double>());
  const auto& bp = j.at("base_point");
  xi.base_point = cplx(bp.at(0).get<double>(), bp.at(1).get<double>());
  return xi;
}

std::vector<double> residues_to_reals(const FuchsianPotential& xi) {
  int N = global_trunc_order();
  std::vector<double> x;
  for (const Pole& p : xi.poles)
    for (int m = -1; m <= N; ++m) {
      Mat2 c = p.residue.coeff(m);
      x.push_back(c(0, 0).real());
      x.push_back(c(0, 1).real());
      x.push_back(c(1, 0).real());
    }
  return x;
}

void reals_to_residues(FuchsianPotential& xi, const std::vector<double>& x) {
  int N = global_trunc_order();
  size_t per_pole = 3 * static_cast<size_t>(N + 2);
  if (x.size() != per_pole * xi.poles.size())
    throw BadInput("residue vector has wrong length");
  size_t idx = 0;
  for (Pole& p : xi.poles) {
    std::vector<Mat2> c;
    for (int m = -1; m <= N; ++m) {
      Mat2 e = Mat2::Zero();
      e(0, 0) = x[idx];
      e(0, 1) = x[idx + 1];
      e(1, 0) = x[idx + 2];
      e(1, 1) = -x[idx];
      idx += 3;
      c.push_back(e);
    }
    p.residue = LoopMatrix(-1, std::move(c)).trimmed();
  }
}

}  // namespace dpw
