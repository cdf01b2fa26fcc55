#include "dpw/seed_potentials.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "dpw/monodromy.hpp"
#include "dpw/surface_builder.hpp"

namespace dpw {

namespace {

Mat2 inverse2(const Mat2& m) {
  cplx d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a / d;
}

// conjugation by sigma = diag(i, -i): off-diagonal sign flip per λ-mode
LoopMatrix sigma_conj(const LoopMatrix& a) {
  std::vector<Mat2> c = a.coeffs();
  for (Mat2& m : c) {
    m(0, 1) = -m(0, 1);
    m(1, 0) = -m(1, 0);
  }
  return LoopMatrix(a.low_order(), std::move(c));
}

// coefficientwise conjugation (the reality involution for poles on S¹)
LoopMatrix rho(const LoopMatrix& a) {
  std::vector<Mat2> c = a.coeffs();
  for (Mat2& m : c) m = m.conjugate();
  return LoopMatrix(a.low_order(), std::move(c));
}

FuchsianPotential four_pole_template(int n) {
  FuchsianPotential xi;
  for (int k = 0; k < 4; ++k) {
    Pole p;
    p.z = std::polar(1.0, 0.5 * M_PI * k);
    p.ev_num = 1;
    p.ev_den = 2 * n;
    p.n = n;
    p.spin = -1;
    xi.poles.push_back(p);
  }
  xi.base_point = std::polar(1.0, -0.25 * M_PI);
  xi.lambda1 = cplx(0.0, 1.0);
  return xi;
}

// unknowns: real residue coefficients of the poles at 1 and i; the poles at
// -1 and -i follow from the τ(z) = -z symmetry
struct SymVars {
  FuchsianPotential tpl;
  int hi = 1;  // active λ-modes -1..hi

  long dim() const { return 2 * 3 * (hi + 2); }

  Eigen::VectorXd encode(const FuchsianPotential& xi) const {
    Eigen::VectorXd x(dim());
    long idx = 0;
    for (int k = 0; k < 2; ++k)
      for (int m = -1; m <= hi; ++m) {
        Mat2 c = xi.poles[static_cast<size_t>(k)].residue.coeff(m);
        x[idx++] = c(0, 0).real();
        x[idx++] = c(0, 1).real();
        x[idx++] = c(1, 0).real();
      }
    return x;
  }

  FuchsianPotential decode(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw BadInput("seed vector has wrong length");
    FuchsianPotential xi = tpl;
    long idx = 0;
    for (int k = 0; k < 2; ++k) {
      std::vector<Mat2> c;
      for (int m = -1; m <= hi; ++m) {
        Mat2 e = Mat2::Zero();
        e(0, 0) = x[idx];
        e(0, 1) = x[idx + 1];
        e(1, 0) = x[idx + 2];
        e(1, 1) = -x[idx];
        idx += 3;
        c.push_back(e);
      }
      xi.poles[static_cast<size_t>(k)].residue =
          LoopMatrix(-1, std::move(c)).trimmed();
    }
    xi.poles[2].residue = sigma_conj(xi.poles[0].residue);
    xi.poles[3].residue = sigma_conj(xi.poles[1].residue);
    return xi;
  }
};

// start near the residue normal form: R = ν·C [[a, 1/λ],[(1-a²)λ, -a]] C⁻¹
// with a random rotation C and a random a per pole
Eigen::VectorXd seed_init(const SymVars& v, std::mt19937& rng, double nu) {
  std::uniform_real_distribution<double> ua(0.05, 0.45);
  std::uniform_real_distribution<double> uphi(0.0, M_PI);
  FuchsianPotential xi = v.tpl;
  for (int k = 0; k < 2; ++k) {
    double a = ua(rng), phi = uphi(rng);
    Mat2 rot;
    rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Mat2 rt = rot.transpose();
    Mat2 mm = Mat2::Zero(), m0 = Mat2::Zero(), mp = Mat2::Zero();
    mm(0, 1) = 1.0;
    m0(0, 0) = a;
    m0(1, 1) = -a;
    mp(1, 0) = 1.0 - a * a;
    std::vector<Mat2> c = {nu * rot * mm * rt, nu * rot * m0 * rt,
                           nu * rot * mp * rt};
    xi.poles[static_cast<size_t>(k)].residue = LoopMatrix(-1, std::move(c));
  }
  return v.encode(xi);
}

VecFn seed_objective(const SymVars& vars, const ClosingTargets& t,
                     const ConstraintOptions& copt) {
  return [vars, t, copt](const Eigen::VectorXd& x) {
    return assemble_constraints(vars.decode(x), t, copt);
  };
}

double min_lower_part(const FuchsianPotential& xi, const ClosingTargets& t) {
  ConstraintBreakdown bd;
  assemble_constraints(xi, t, {}, &bd);
  return bd.min_xi_m1;
}

}  // namespace

ClosingTargets four_pole_targets(double nu, int lambda_count) {
  ClosingTargets t;
  t.nu.assign(4, nu);
  double theta = 4.0 * M_PI * nu;
  for (cplx l : {cplx(0.0, 1.0), cplx(0.0, -1.0)}) {
    t.extrinsic.push_back({0, 2, l, 1, theta});
    t.extrinsic.push_back({1, 3, l, 1, theta});
  }
  t.lambda_count = lambda_count;
  return t;
}

FuchsianPotential four_pole_seed(int n, const SeedOptions& opt) {
  if (n < 2) throw BadInput("seed needs n >= 2");
  SymVars vars{four_pole_template(n), 1};
  ConstraintOptions copt;
  GaussNewtonOptions gno{40, opt.tol, 1e-6, opt.log};
  ClosingTargets coarse = four_pole_targets(0.25, opt.coarse_lambda);
  std::mt19937 rng(opt.rng_seed);

  Eigen::VectorXd x;
  bool found = false;
  for (int r = 0; r < opt.max_restarts && !found; ++r) {
    vars.hi = std::min(1 + r / 20, 3);
    x = seed_init(vars, rng, 0.25);
    GaussNewtonReport rep =
        gauss_newton(seed_objective(vars, coarse, copt), x, gno);
    if (opt.log)
      *opt.log << "seed restart " << r << " f_inf " << rep.f_inf << "\n";
    if (!rep.converged) continue;
    // reject the branch with vanishing λ^{-1} part inside the disk
    if (min_lower_part(vars.decode(x), coarse) < 1e-3) continue;
    found = true;
  }
  if (!found)
    throw SeedNewtonDivergence("no closed 4-pole potential from restarts");

  // continuation in the eigenvalue from 1/4 down to 1/(2n)
  double nu = 0.25, target = 0.5 / n, step = 0.025;
  while (nu > target + 1e-14) {
    double trynu = std::max(target, nu - step);
    ClosingTargets t = four_pole_targets(trynu, opt.coarse_lambda);
    Eigen::VectorXd xt = x;
    GaussNewtonReport rep = gauss_newton(seed_objective(vars, t, copt), xt, gno);
    if (opt.log)
      *opt.log << "seed nu " << trynu << " f_inf " << rep.f_inf << "\n";
    if (rep.converged) {
      x = xt;
      nu = trynu;
      step = std::min(0.025, 1.6 * step);
    } else {
      step *= 0.5;
      if (step < 1e-4)
        throw SeedNewtonDivergence("eigenvalue continuation stalled");
    }
  }

  // polish and verify at the full λ-sample count
  ClosingTargets fine = four_pole_targets(target, opt.final_lambda);
  GaussNewtonReport rep = gauss_newton(seed_objective(vars, fine, copt), x, gno);
  if (!rep.converged)
    throw SeedNewtonDivergence("full-sample polish did not converge");
  FuchsianPotential xi = vars.decode(x);
  if (min_lower_part(xi, fine) < 1e-3)
    throw SeedNewtonDivergence("converged to a degenerate branch");
  return xi;
}

FuchsianPotential reality_gauge(const FuchsianPotential& xi) {
  int N = global_trunc_order();
  int M = N;  // gauge λ-modes -M..M
  size_t nm = static_cast<size_t>(2 * M + 1);
  long cols = static_cast<long>(4 * nm);

  // linear system R_k w - w ρ(R_k) = 0 over the loop w
  std::vector<const LoopMatrix*> rs;
  std::vector<LoopMatrix> rhos;
  for (const Pole& p : xi.poles) {
    if (p.at_infinity) {
      if (p.residue.norm() > 1e-10)
        throw BadInput("reality gauge needs all poles finite");
      continue;
    }
    rs.push_back(&p.residue);
    rhos.push_back(rho(p.residue));
  }
  auto uidx = [&](int m, int r, int c) {
    return static_cast<long>((m + M) * 4 + 2 * r + c);
  };
  long rows = 0;
  for (const LoopMatrix* r : rs)
    rows += 4 * (r->high_order() - r->low_order() + 2 * M + 1);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, cols);
  long row = 0;
  for (size_t k = 0; k < rs.size(); ++k) {
    const LoopMatrix& R = *rs[k];
    const LoopMatrix& Q = rhos[k];
    for (int t = R.low_order() - M; t <= R.high_order() + M; ++t) {
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          for (int m = -M; m <= M; ++m) {
            Mat2 rc = R.coeff(t - m), qc = Q.coeff(t - m);
            for (int s = 0; s < 2; ++s) {
              A(row, uidx(m, s, c)) += rc(r, s);
              A(row, uidx(m, r, s)) -= qc(s, c);
            }
          }
          ++row;
        }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) > 0 && sv(sv.size() - 1) > 1e-6 * sv(0))
    throw SymmetryViolated("no real form of the potential found");
  Eigen::VectorXcd wv = svd.matrixV().col(cols - 1);
  std::vector<Mat2> wc(nm);
  for (int m = -M; m <= M; ++m) {
    Mat2 e;
    e << wv(uidx(m, 0, 0)), wv(uidx(m, 0, 1)), wv(uidx(m, 1, 0)),
        wv(uidx(m, 1, 1));
    wc[static_cast<size_t>(m + M)] = e;
  }
  LoopMatrix w(-M, std::move(wc));

  // w·ρ(w) is scalar with real coefficients; normalize it to the identity
  auto scalar_of = [](const LoopMatrix& g) {
    LaurentScalar s;
    s.low = g.low_order();
    for (const Mat2& m : g.coeffs())
      s.c.push_back(0.5 * (m(0, 0) + m(1, 1)));
    return s.trimmed();
  };
  LaurentScalar gam = scalar_of(lm_mul(w, rho(w)));
  // threshold-trim against SVD noise
  {
    double mx = gam.norm();
    int lo = gam.low, hi = gam.high();
    while (lo < hi && std::abs(gam.coeff(lo)) < 1e-8 * mx) ++lo;
    while (hi > lo && std::abs(gam.coeff(hi)) < 1e-8 * mx) --hi;
    std::vector<cplx> c;
    for (int k = lo; k <= hi; ++k)
      c.push_back(cplx(gam.coeff(k).real(), 0.0));
    gam = LaurentScalar(lo, std::move(c));
  }
  if (gam.low % 2 != 0)
    throw SymmetryViolated("real-form pairing has odd leading exponent");
  if (gam.coeff(gam.low).real() < 0)
    throw SymmetryViolated("real-form pairing is quaternionic");
  int extra = gam.high() - gam.low + 4;
  LaurentScalar root = ls_sqrt(gam, gam.low / 2 + N + extra);
  w = lm_scale_series(w, ls_inverse(root, N + extra)).trimmed();
  double pair_err =
      lm_sub(lm_mul(w, rho(w)), LoopMatrix::identity()).norm();
  if (pair_err > 1e-6)
    throw SymmetryViolated("real-form pairing failed to normalize");

  // g = (±w + Id)/sqrt(tr(±w) + 2); sign with the larger constant term
  LaurentScalar tw = scalar_of(w);  // ½tr; use full trace below
  tw = ls_scale(tw, 2.0);
  double t0p = std::abs((ls_add(tw, LaurentScalar::constant(2.0))).coeff(0));
  double t0m =
      std::abs((ls_add(ls_scale(tw, -1.0), LaurentScalar::constant(2.0)))
                   .coeff(0));
  double sgn = t0p >= t0m ? 1.0 : -1.0;
  LaurentScalar den =
      ls_add(ls_scale(tw, sgn), LaurentScalar::constant(2.0)).trimmed();
  {
    double mx = den.norm();
    int lo = den.low;
    while (lo < den.high() && std::abs(den.coeff(lo)) < 1e-8 * mx) ++lo;
    std::vector<cplx> c;
    for (int k = lo; k <= den.high(); ++k) c.push_back(den.coeff(k));
    den = LaurentScalar(lo, std::move(c));
  }
  if (den.low % 2 != 0 || std::abs(den.coeff(den.low)) < 1e-10)
    throw SymmetryViolated("degenerate square root in the real form gauge");
  int ex2 = den.high() - den.low + 4;
  LaurentScalar dr = ls_sqrt(den, den.low / 2 + N + ex2);
  LoopMatrix g = lm_scale_series(
      lm_add(lm_scale(w, sgn), LoopMatrix::identity()),
      ls_inverse(dr, N + ex2));
  return apply_constant_gauge(xi, g.trimmed());
}

FuchsianPotential unitarize_basepoint(const FuchsianPotential& xi,
                                      int lambda_count) {
  int N = global_trunc_order();
  int K = lambda_count > 0 ? lambda_count : 4 * N + 1;
  std::vector<cplx> ls = lambda_samples(K);
  std::vector<Mat2> pins;
  pins.reserve(ls.size());
  for (cplx l : ls) {
    MonodromyResult mr = local_monodromies(xi, l);
    std::vector<Mat2> gen = mr.local, inv;
    for (const Mat2& m : gen) inv.push_back(inverse2(m));
    // invariant positive form by (lazy) fixed-point averaging
    Mat2 P = Mat2::Identity();
    for (int it = 0; it < 4000; ++it) {
      Mat2 Q = Mat2::Zero();
      for (size_t r = 0; r < gen.size(); ++r)
        Q += gen[r] * P * gen[r].adjoint() + inv[r] * P * inv[r].adjoint();
      Q /= static_cast<double>(2 * gen.size());
      Q = (0.5 * (Q + P)).eval();
      Q = (0.5 * (Q + Q.adjoint())).eval();
      cplx dq = Q(0, 0) * Q(1, 1) - Q(0, 1) * Q(1, 0);
      if (dq.real() <= 0) throw NotUnitarizable("form lost positivity");
      Q /= std::sqrt(dq.real());
      double diff = (Q - P).norm();
      P = Q;
      if (diff < 1e-14) break;
    }
    double invres = 0.0;
    for (const Mat2& m : gen)
      invres = std::max(invres, (m * P * m.adjoint() - P).norm());
    if (invres > 1e-6)
      throw NotUnitarizable("no invariant positive form at a sample");
    pins.push_back(P);
  }
  // Fourier modes of the invariant form, hermitian-symmetrized
  std::vector<Mat2> modes(static_cast<size_t>(2 * N + 1), Mat2::Zero());
  for (int k = -N; k <= N; ++k) {
    Mat2 acc = Mat2::Zero();
    for (size_t s = 0; s < ls.size(); ++s)
      acc += pins[s] * std::pow(ls[s], -k);
    modes[static_cast<size_t>(k + N)] = acc / static_cast<double>(ls.size());
  }
  for (int k = 1; k <= N; ++k) {
    Mat2 h = 0.5 * (modes[static_cast<size_t>(N + k)] +
                    modes[static_cast<size_t>(N - k)].adjoint());
    modes[static_cast<size_t>(N + k)] = h;
    modes[static_cast<size_t>(N - k)] = h.adjoint();
  }
  modes[static_cast<size_t>(N)] =
      (0.5 * (modes[static_cast<size_t>(N)] +
              modes[static_cast<size_t>(N)].adjoint()))
          .eval();
  LoopMatrix P(-N, std::move(modes));
  LoopMatrix H = spectral_factor(P);
  FuchsianPotential out = apply_constant_gauge(xi, H);
  double worst = 0.0;
  for (cplx l : lambda_samples(2 * N + 1))
    worst = std::max(worst, local_monodromies(out, l).unitarity_err);
  if (worst > 1e-7)
    throw NotUnitarizable("gauged monodromy not unitary: " +
                          std::to_string(worst));
  return out;
}

void PipelineManifest::record(const std::string& name,
                              const FuchsianPotential& xi) {
  nlohmann::json e;
  e["step"] = name;
  e["poles"] = nlohmann::json::array();
  e["n"] = nlohmann::json::array();
  e["spin"] = nlohmann::json::array();
  e["nu"] = nlohmann::json::array();
  for (const Pole& p : xi.poles) {
    if (p.at_infinity)
      e["poles"].push_back("inf");
    else
      e["poles"].push_back({p.z.real(), p.z.imag()});
    e["n"].push_back(p.n);
    e["spin"].push_back(p.spin);
    e["nu"].push_back({p.ev_num, p.ev_den});
  }
  e["sum_residual"] = xi.sum_residual();
  e["trace_residual"] = xi.trace_residual();
  e["det_residual"] = xi.det_residual();
  steps.push_back(e);
}

void PipelineManifest::save(const std::string& path) const {
  std::ofstream os(path);
  os << nlohmann::json{{"steps", steps}}.dump(1) << "\n";
}

namespace {

size_t removable_pole_index(const FuchsianPotential& xi) {
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    const Pole& p = xi.poles[k];
    if (!p.at_infinity && 2 * p.ev_num == p.ev_den) return k;
  }
  throw BadInput("no removable pole found for the flip");
}

const MoebiusMap kCayley = MoebiusMap::from_unnormalized(1.0, cplx(0.0, -1.0),
                                                         1.0, cplx(0.0, 1.0));

}  // namespace

FuchsianPotential lawson_three_plane_from(const FuchsianPotential& seed,
                                          int n, PipelineManifest* man) {
  auto rec = [&](const char* nm, const FuchsianPotential& x) {
    if (man) man->record(nm, x);
  };
  rec("input", seed);
  FuchsianPotential s = pushdown_z2(seed);
  rec("pushdown", s);
  s = apply_moebius(s, MoebiusMap::three_points(-1.0, 0.0, 1.0));
  rec("rearrange", s);
  s = symmetrizing_gauge(s);
  rec("symmetrize", s);
  s = pullback_power(s, n);
  rec("pullback", s);
  // circle to line: the arc midpoints e^{±iπ/(2n)} to 0 and ∞; the branch
  // poles go to ±i
  cplx a = std::polar(1.0, 0.5 * M_PI / n);
  s = apply_moebius(
      s, MoebiusMap::from_unnormalized(cplx(0.0, 1.0), cplx(0.0, 1.0) * -a,
                                       1.0, a));
  rec("to-line", s);
  s = pushdown_z2(s);
  rec("pushdown2", s);
  s = flip_gauge(s, removable_pole_index(s));
  rec("flip", s);
  s = apply_moebius(s, kCayley);
  rec("to-circle", s);
  s = reality_gauge(s);
  rec("reality", s);
  s = unitarize_basepoint(s);
  rec("unitarize", s);
  return s;
}

FuchsianPotential lawson_three_plane_potential(int n, const SeedOptions& opt,
                                               PipelineManifest* man) {
  return lawson_three_plane_from(four_pole_seed(n, opt), n, man);
}

FuchsianPotential lawson_four_plane_from(const FuchsianPotential& seed, int n,
                                         PipelineManifest* man) {
  if (n < 2 || n % 2 != 0) throw BadInput("four-plane pipeline needs even n");
  auto rec = [&](const char* nm, const FuchsianPotential& x) {
    if (man) man->record(nm, x);
  };
  rec("input", seed);
  FuchsianPotential s = pushdown_z2(seed);
  rec("pushdown", s);
  s = apply_moebius(s, MoebiusMap::three_points(-1.0, 0.0, 1.0));
  rec("rearrange", s);
  s = symmetrizing_gauge(s);
  rec("symmetrize", s);
  s = pullback_power(s, n / 2);
  rec("pullback", s);
  // circle to line conjugating the inherited involution to z ↦ -z; its
  // fixed points depend on the parity of n/2
  cplx q = (n / 2) % 2 == 0 ? cplx(0.0, 1.0) * std::polar(1.0, M_PI / n)
                            : cplx(0.0, 1.0) * std::polar(1.0, 2.0 * M_PI / n);
  s = apply_moebius(
      s, MoebiusMap::from_unnormalized(cplx(0.0, 1.0), cplx(0.0, 1.0) * -q,
                                       1.0, q));
  rec("to-line", s);
  s = pushdown_z2(s);
  rec("pushdown2", s);
  s = apply_moebius(s, kCayley);
  rec("to-circle", s);
  s = reality_gauge(s);
  rec("reality", s);
  s = unitarize_basepoint(s);
  rec("unitarize", s);
  return s;
}

FuchsianPotential lawson_four_plane_potential(int n, const SeedOptions& opt,
                                              PipelineManifest* man) {
  return lawson_four_plane_from(four_pole_seed(n, opt), n, man);
}

}  // namespace dpw
