#include "dpw/closing_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace dpw {

namespace {

// polarization of det: det(X+Y) = det X + det Y + B(X,Y)
cplx det_polar(const Mat2& x, const Mat2& y) {
  return x(0, 0) * y(1, 1) + y(0, 0) * x(1, 1) - x(0, 1) * y(1, 0) -
         y(0, 1) * x(1, 0);
}

struct BlockWriter {
  std::vector<double> v;
  double push_block_start() { return 0.0; }
  void put(double x, double& blk) {
    v.push_back(x);
    blk = std::max(blk, std::abs(x));
  }
  void put(cplx x, double& blk) {
    put(x.real(), blk);
    put(x.imag(), blk);
  }
};

}  // namespace

Eigen::VectorXd assemble_constraints(const FuchsianPotential& xi,
                                     const ClosingTargets& t,
                                     const ConstraintOptions& opt,
                                     ConstraintBreakdown* out) {
  size_t p = xi.poles.size();
  if (p == 0) throw BadInput("potential has no poles");
  if (xi.pole_at_infinity())
    throw BadInput("flow constraints need all poles finite");
  if (t.nu.size() != p) throw BadInput("one eigenvalue target per pole");
  int N = global_trunc_order();
  ConstraintBreakdown bd;
  BlockWriter w;

  // residue sum
  {
    LoopMatrix s = LoopMatrix::zero();
    for (const Pole& q : xi.poles) s = lm_add(s, q.residue);
    for (int k = -1; k <= N; ++k) {
      Mat2 c = s.coeff(k);
      w.put(c(0, 0), bd.sum);
      w.put(c(0, 1), bd.sum);
      w.put(c(1, 0), bd.sum);
    }
  }

  // eigenvalue condition: det R_k(λ) = -ν_k² identically
  for (size_t k = 0; k < p; ++k) {
    LaurentScalar d = lm_det(xi.poles[k].residue);
    double nu2 = t.nu[k] * t.nu[k];
    for (int m = -2; m <= N; ++m)
      w.put(d.coeff(m) + (m == 0 ? cplx(nu2) : cplx(0.0)), bd.eigenvalue);
  }

  // determinant condition: det ξ^(-1)(z) vanishes identically.  With the
  // per-pole nilpotency above, det ξ^(-1) = Σ_k c_k/(z - z_k) and the
  // conditions are the residues c_k.
  std::vector<Mat2> nil(p);
  for (size_t k = 0; k < p; ++k) nil[k] = xi.poles[k].residue.coeff(-1);
  for (size_t k = 0; k < p; ++k) {
    cplx ck = 0;
    for (size_t l = 0; l < p; ++l)
      if (l != k) ck += det_polar(nil[k], nil[l]) / (xi.poles[k].z - xi.poles[l].z);
    w.put(ck, bd.determinant);
  }

  // monodromy sweeps, shared between the intrinsic and extrinsic blocks
  int nl = t.lambda_count > 0 ? t.lambda_count : 2 * N + 1;
  std::vector<cplx> lams = lambda_samples(nl);
  for (const TraceTarget& tt : t.extrinsic) lams.push_back(tt.lambda);
  std::map<std::pair<double, double>, MonodromyResult> sweeps;
  for (cplx l : lams) {
    auto key = std::make_pair(l.real(), l.imag());
    if (!sweeps.count(key))
      sweeps.emplace(key, local_monodromies(xi, l, opt.mono));
  }
  auto sweep_at = [&](cplx l) -> const MonodromyResult& {
    return sweeps.at(std::make_pair(l.real(), l.imag()));
  };

  // intrinsic closing: the trace algebra of the monodromy representation is
  // real on S¹ (unitarizability); generators, pairs, consecutive triples
  double wgt = 1.0 / std::sqrt(static_cast<double>(nl));
  for (int s = 0; s < nl; ++s) {
    const MonodromyResult& mr = sweep_at(lams[static_cast<size_t>(s)]);
    size_t g = mr.local.size();
    auto tr = [](const Mat2& m) { return m(0, 0) + m(1, 1); };
    for (size_t k = 0; k < g; ++k)
      w.put(wgt * tr(mr.local[k]).imag(), bd.intrinsic);
    for (size_t k = 0; k < g; ++k)
      for (size_t l = k + 1; l < g; ++l)
        w.put(wgt * tr(mr.local[l] * mr.local[k]).imag(), bd.intrinsic);
    for (size_t k = 0; k + 2 < g; ++k)
      w.put(wgt * tr(mr.local[k + 2] * mr.local[k + 1] * mr.local[k]).imag(),
            bd.intrinsic);
  }

  // extrinsic closing: ½tr targets at the evaluation points
  for (const TraceTarget& tt : t.extrinsic) {
    cplx ht = half_trace(sweep_at(tt.lambda), tt.i, tt.j);
    w.put(ht - cplx(tt.value()), bd.extrinsic);
  }

  // nowhere-vanishing monitor for ξ^(-1)
  {
    double mn = 1e300;
    auto probe = [&](cplx z) {
      Mat2 m = Mat2::Zero();
      for (size_t k = 0; k < p; ++k) m += nil[k] / (z - xi.poles[k].z);
      mn = std::min(mn, m.norm());
    };
    for (int j = 0; j < 64; ++j)
      probe(std::polar(1.0, 2.0 * M_PI * (j + 0.5) / 64.0));
    probe(cplx{});  // the abelian branch degenerates at the origin
    for (int j = 0; j < 15; ++j)
      probe(std::polar(0.35, 2.0 * M_PI * j / 15.0));
    for (int j = 0; j < 16; ++j)
      probe(std::polar(0.7, 2.0 * M_PI * j / 16.0));
    bd.min_xi_m1 = mn;
  }

  if (out) *out = bd;
  return Eigen::Map<Eigen::VectorXd>(w.v.data(),
                                     static_cast<long>(w.v.size()));
}

Eigen::MatrixXd fd_jacobian(const VecFn& F, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& r0, double step) {
  Eigen::MatrixXd J(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (long k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + step;
    Eigen::VectorXd rp = F(xp);
    xp[k] = x[k] - step;
    J.col(k) = (rp - F(xp)) / (2.0 * step);
    xp[k] = x[k];
  }
  return J;
}

GaussNewtonReport gauss_newton(const VecFn& F, Eigen::VectorXd& x,
                               const GaussNewtonOptions& opt) {
  GaussNewtonReport rep;
  Eigen::VectorXd r = F(x);
  rep.f_inf = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opt.max_iter; ++it) {
    if (rep.f_inf <= opt.tol) {
      rep.converged = true;
      return rep;
    }
    Eigen::MatrixXd J = fd_jacobian(F, x, r, opt.fd_step);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    cod.setThreshold(1e-8);
    Eigen::VectorXd d = -cod.solve(r);
    double scale = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 10; ++ls) {
      Eigen::VectorXd xt = x + scale * d;
      Eigen::VectorXd rt;
      try {
        rt = F(xt);
      } catch (const Error&) {
        scale *= 0.5;
        continue;
      }
      double ft = rt.lpNorm<Eigen::Infinity>();
      if (ft < rep.f_inf) {
        x = xt;
        r = rt;
        rep.f_inf = ft;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    rep.iterations = it + 1;
    if (opt.log)
      *opt.log << "gn iter " << rep.iterations << " f_inf " << rep.f_inf
               << " step " << scale << "\n";
    if (!improved) return rep;
  }
  rep.converged = rep.f_inf <= opt.tol;
  return rep;
}

std::vector<size_t> FlowVariables::free_poles() const {
  std::vector<size_t> out;
  for (size_t k = 0; k < tpl.poles.size(); ++k)
    if (std::find(pinned.begin(), pinned.end(), k) == pinned.end())
      out.push_back(k);
  return out;
}

Eigen::VectorXd FlowVariables::encode(const FuchsianPotential& xi) const {
  std::vector<double> v;
  for (size_t k : free_poles()) v.push_back(std::arg(xi.poles[k].z));
  std::vector<double> res = residues_to_reals(xi);
  v.insert(v.end(), res.begin(), res.end());
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

FuchsianPotential FlowVariables::decode(const Eigen::VectorXd& x) const {
  FuchsianPotential xi = tpl;
  std::vector<size_t> fp = free_poles();
  if (x.size() < static_cast<long>(fp.size()))
    throw BadInput("flow vector too short");
  for (size_t k = 0; k < fp.size(); ++k)
    xi.poles[fp[k]].z = std::polar(1.0, x[static_cast<long>(k)]);
  std::vector<double> res(x.data() + fp.size(), x.data() + x.size());
  reals_to_residues(xi, res);
  return xi;
}

ClosingTargets FlowSchedule::at(double t) const {
  if (start.nu.size() != target.nu.size() ||
      start.extrinsic.size() != target.extrinsic.size())
    throw BadInput("flow schedule endpoints differ in shape");
  ClosingTargets out = target;
  for (size_t k = 0; k < out.nu.size(); ++k)
    out.nu[k] = (1.0 - t) * start.nu[k] + t * target.nu[k];
  for (size_t k = 0; k < out.extrinsic.size(); ++k) {
    const TraceTarget& a = start.extrinsic[k];
    const TraceTarget& b = target.extrinsic[k];
    if (a.i != b.i || a.j != b.j || a.sign != b.sign ||
        std::abs(a.lambda - b.lambda) > 1e-14)
      throw BadInput("flow schedule targets must differ only in angle");
    out.extrinsic[k].theta = (1.0 - t) * a.theta + t * b.theta;
  }
  return out;
}

namespace {

void guard_pole_gaps(const FuchsianPotential& xi, double floor) {
  for (size_t a = 0; a < xi.poles.size(); ++a)
    for (size_t b = a + 1; b < xi.poles.size(); ++b)
      if (std::abs(xi.poles[a].z - xi.poles[b].z) < floor)
        throw PoleCollision("poles closer than the flow guard distance");
}

}  // namespace

FlowResult run_flow(const FuchsianPotential& seed, const FlowSchedule& sched,
                    const FlowVariables& vars, const FlowOptions& opt) {
  auto F_at = [&](double t) {
    return [&, t](const Eigen::VectorXd& x) {
      FuchsianPotential xi = vars.decode(x);
      guard_pole_gaps(xi, opt.pole_gap_floor);
      return assemble_constraints(xi, sched.at(t), opt.cons);
    };
  };

  Eigen::VectorXd x = vars.encode(seed);
  {
    Eigen::VectorXd r0 = F_at(0.0)(x);
    if (r0.lpNorm<Eigen::Infinity>() > 1e-8)
      throw BadInput("flow seed does not satisfy the t=0 constraints");
  }

  FlowResult out;
  double t = 0.0, dt = opt.dt_init;
  int easy = 0;
  while (t < 1.0 - 1e-12) {
    double dtc = std::min(dt, 1.0 - t);
    VecFn Fc = F_at(t);
    Eigen::VectorXd r = Fc(x);
    // predictor: dF/dt + J dx/dt = 0 in least squares
    double ht = 1e-6;
    Eigen::VectorXd dFdt =
        (F_at(std::min(t + ht, 1.0))(x) - r) / std::min(ht, 1.0 - t);
    Eigen::MatrixXd J = fd_jacobian(Fc, x, r, opt.corrector.fd_step);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    cod.setThreshold(1e-8);
    Eigen::VectorXd xp = x - dtc * cod.solve(dFdt);

    GaussNewtonReport rep;
    bool failed = false;
    try {
      rep = gauss_newton(F_at(t + dtc), xp, opt.corrector);
    } catch (const Error&) {
      failed = true;
    }
    if (failed || !rep.converged) {
      dt *= 0.5;
      easy = 0;
      if (dt < opt.dt_min)
        throw StepUnderflow("flow step size underflow before t=1");
      continue;
    }
    x = xp;
    t += dtc;
    ++out.steps;
    out.final_f_inf = rep.f_inf;
    if (opt.log) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "{\"t\":%.12g,\"dt\":%.12g,\"f_inf\":%.3e,\"newton\":%d}\n",
                    t, dtc, rep.f_inf, rep.iterations);
      *opt.log << buf;
    }
    if (!opt.checkpoint_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "/step_%04d.json", out.steps);
      std::ofstream os(opt.checkpoint_dir + name);
      os << potential_to_json(vars.decode(x)).dump(1) << "\n";
    }
    if (rep.iterations <= 3) {
      if (++easy >= 3) {
        dt = std::min(2.0 * dt, opt.dt_max);
        easy = 0;
      }
    } else {
      easy = 0;
    }
  }
  out.xi = vars.decode(x);
  return out;
}

}  // namespace dpw
