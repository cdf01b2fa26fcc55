#include "dpw/monodromy.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dpw {

namespace {

struct OdeCtx {
  const FuchsianPotential* xi;
  cplx lambda;
  cplx za, zb;  // current straight segment
};

int ode_func(double t, const double y[], double f[], void* params) {
  const OdeCtx* ctx = static_cast<const OdeCtx*>(params);
  cplx z = ctx->za + t * (ctx->zb - ctx->za);
  cplx dz = ctx->zb - ctx->za;
  Mat2 a = -(ctx->xi->eval(z, ctx->lambda)) * dz;
  Mat2 psi;
  psi << cplx(y[0], y[1]), cplx(y[2], y[3]), cplx(y[4], y[5]), cplx(y[6], y[7]);
  Mat2 d = a * psi;
  f[0] = d(0, 0).real();
  f[1] = d(0, 0).imag();
  f[2] = d(0, 1).real();
  f[3] = d(0, 1).imag();
  f[4] = d(1, 0).real();
  f[5] = d(1, 0).imag();
  f[6] = d(1, 1).real();
  f[7] = d(1, 1).imag();
  return GSL_SUCCESS;
}

Mat2 det_project(const Mat2& m) {
  cplx d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  cplx s = std::sqrt(d);
  if (std::abs(s) < 1e-12) throw NonUnimodular("transport lost its determinant");
  return m / s;
}

Mat2 inv2(const Mat2& m) {
  cplx d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a / d;
}

double norm_angle(double a) {
  while (a <= 0) a += 2.0 * M_PI;
  while (a > 2.0 * M_PI) a -= 2.0 * M_PI;
  return a;
}

}  // namespace

Mat2 transport_polyline(const FuchsianPotential& xi,
                        const std::vector<cplx>& pts, cplx lambda,
                        double eps) {
  if (pts.size() < 2) return Mat2::Identity();
  OdeCtx ctx{&xi, lambda, {}, {}};
  gsl_odeiv2_system sys{ode_func, nullptr, 8, &ctx};
  gsl_odeiv2_driver* drv = gsl_odeiv2_driver_alloc_y_new(
      &sys, gsl_odeiv2_step_rk8pd, 1e-3, eps, eps);
  double y[8] = {1, 0, 0, 0, 0, 0, 1, 0};
  for (size_t s = 0; s + 1 < pts.size(); ++s) {
    if (std::abs(pts[s + 1] - pts[s]) < 1e-15) continue;
    ctx.za = pts[s];
    ctx.zb = pts[s + 1];
    double t = 0.0;
    gsl_odeiv2_driver_reset(drv);
    int status = gsl_odeiv2_driver_apply(drv, &t, 1.0, y);
    if (status != GSL_SUCCESS) {
      gsl_odeiv2_driver_free(drv);
      throw NearPole("ode step failed along transport path");
    }
  }
  gsl_odeiv2_driver_free(drv);
  Mat2 m;
  m << cplx(y[0], y[1]), cplx(y[2], y[3]), cplx(y[4], y[5]), cplx(y[6], y[7]);
  return det_project(m);
}

namespace {

std::vector<cplx> circle_arc(double a0, double a1, int min_pts) {
  // arc of the unit circle from angle a0 to a1 (ccw, a1 >= a0)
  int n = std::max(min_pts, static_cast<int>(std::ceil((a1 - a0) / 0.05)) + 1);
  std::vector<cplx> pts;
  for (int j = 0; j <= n; ++j)
    pts.push_back(std::polar(1.0, a0 + (a1 - a0) * j / n));
  return pts;
}

std::vector<cplx> pole_arc(cplx center, double rho, double phi0, double dphi,
                           int n) {
  std::vector<cplx> pts;
  for (int j = 0; j <= n; ++j)
    pts.push_back(center + std::polar(rho, phi0 + dphi * j / n));
  return pts;
}

}  // namespace

MonodromyResult local_monodromies(const FuchsianPotential& xi, cplx lambda,
                                  const MonodromyOptions& opt) {
  struct Entry {
    size_t idx;
    double theta;   // absolute angle of the pole
    double delta;   // half-width of the detour on the circle
    double rho;     // detour radius
  };
  std::vector<Entry> ps;
  for (size_t k = 0; k < xi.poles.size(); ++k) {
    const Pole& p = xi.poles[k];
    if (p.at_infinity) continue;
    if (std::abs(std::abs(p.z) - 1.0) > 1e-6)
      throw PoleOffCircle("canonical loops need poles on the unit circle");
    ps.push_back({k, std::arg(p.z), 0.0, 0.0});
  }
  if (ps.empty()) {
    MonodromyResult r;
    r.total = Mat2::Identity();
    return r;
  }
  std::sort(ps.begin(), ps.end(),
            [](const Entry& a, const Entry& b) { return a.theta < b.theta; });
  size_t n = ps.size();
  double min_gap = 2.0 * M_PI;
  for (size_t k = 0; k < n; ++k) {
    double prev = norm_angle(ps[k].theta - ps[(k + n - 1) % n].theta);
    double next = norm_angle(ps[(k + 1) % n].theta - ps[k].theta);
    double gap = std::min(n > 1 ? prev : 2.0 * M_PI,
                          n > 1 ? next : 2.0 * M_PI);
    min_gap = std::min(min_gap, gap);
    // chord length to the nearest neighbour bounds the detour radius
    double chord = 2.0 * std::sin(std::min(gap, M_PI) / 2.0);
    ps[k].rho = opt.detour_factor * chord;
    ps[k].delta = 2.0 * std::asin(std::min(0.99, ps[k].rho / 2.0));
  }

  // start angle: middle of the pole gap containing the base point direction
  cplx b = xi.base_point;
  double tb = std::abs(b) < 1e-12 ? 0.0 : std::arg(b);
  double alpha0;
  {
    size_t after = 0;
    while (after < n && ps[after].theta <= tb) ++after;
    double lo = after == 0 ? ps[n - 1].theta - 2.0 * M_PI : ps[after - 1].theta;
    double hi = after == n ? ps[0].theta + 2.0 * M_PI : ps[after].theta;
    alpha0 = 0.5 * (lo + hi);
  }
  cplx start = std::polar(1.0, alpha0);
  for (const Entry& e : ps)
    if (std::abs(b - xi.poles[e.idx].z) < opt.clearance_factor * min_gap)
      throw NearPole("base point too close to a pole");

  // sweep the poles in ccw order starting just after alpha0
  std::vector<size_t> order(n);
  for (size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t c) {
    return norm_angle(ps[a].theta - alpha0) < norm_angle(ps[c].theta - alpha0);
  });

  MonodromyResult out;
  out.total = Mat2::Identity();
  Mat2 approach;  // transport from b to the current entry point
  {
    std::vector<cplx> seg = {b, start};
    approach = transport_polyline(xi, seg, lambda, opt.eps);
  }
  double cursor = alpha0;  // current absolute angle on the circle
  for (size_t s = 0; s < n; ++s) {
    const Entry& e = ps[order[s]];
    double th = cursor + norm_angle(e.theta - cursor);
    double a_entry = th - e.delta;
    double a_exit = th + e.delta;
    // along the circle to the entry point
    approach = transport_polyline(xi, circle_arc(cursor, a_entry, 2), lambda,
                                  opt.eps) *
               approach;
    cplx zp = xi.poles[e.idx].z;
    cplx A = std::polar(1.0, a_entry);
    cplx B = std::polar(1.0, a_exit);
    double rho = std::abs(A - zp);
    double phiA = std::arg(A - zp);
    double phiB = std::arg(B - zp);
    // full ccw circle around the pole, based at the entry point
    Mat2 around = transport_polyline(
        xi, pole_arc(zp, rho, phiA, 2.0 * M_PI, 2 * opt.arc_points), lambda,
        opt.eps);
    Mat2 loc = inv2(approach) * around * approach;
    out.local.push_back(det_project(loc));
    out.pole_index.push_back(e.idx);
    // inward semicircular detour to the exit point
    double dphi = phiB - phiA;
    while (dphi <= -M_PI) dphi += 2.0 * M_PI;
    while (dphi > M_PI) dphi -= 2.0 * M_PI;
    double alt = dphi > 0 ? dphi - 2.0 * M_PI : dphi + 2.0 * M_PI;
    cplx mid1 = zp + std::polar(rho, phiA + dphi / 2.0);
    double use = std::abs(mid1) < 1.0 ? dphi : alt;
    approach = transport_polyline(xi, pole_arc(zp, rho, phiA, use,
                                               opt.arc_points),
                                  lambda, opt.eps) *
               approach;
    cursor = a_exit;
  }
  for (size_t s = 0; s < n; ++s) out.total = out.local[s] * out.total;
  out.total = det_project(out.total);
  double werr = 0.0;
  for (const Mat2& m : out.local)
    werr = std::max(werr, (m * m.adjoint() - Mat2::Identity()).norm());
  out.unitarity_err = werr;
  return out;
}

Mat2 global_monodromy(const MonodromyResult& mr, size_t i, size_t j) {
  if (i > j || j > mr.local.size()) throw BadInput("bad monodromy range");
  Mat2 m = Mat2::Identity();
  for (size_t k = i; k < j; ++k) m = mr.local[k] * m;
  return m;
}

cplx half_trace(const MonodromyResult& mr, size_t i, size_t j) {
  Mat2 m = global_monodromy(mr, i, j);
  return 0.5 * (m(0, 0) + m(1, 1));
}

void dump_monodromy_csv(std::ostream& os, const FuchsianPotential& xi,
                        const std::vector<cplx>& lambdas,
                        const MonodromyOptions& opt) {
  os << "lambda_re,lambda_im,loop_id,trace_re,trace_im,unitarity_err\n";
  for (cplx l : lambdas) {
    MonodromyResult mr = local_monodromies(xi, l, opt);
    for (size_t k = 0; k < mr.local.size(); ++k) {
      const Mat2& m = mr.local[k];
      cplx tr = m(0, 0) + m(1, 1);
      double ue = (m * m.adjoint() - Mat2::Identity()).norm();
      char buf[256];
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu,%.12g,%.12g,%.12g\n",
                    l.real(), l.imag(), k, tr.real(), tr.imag(), ue);
      os << buf;
    }
  }
}

std::vector<cplx> lambda_samples(int count) {
  std::vector<cplx> out;
  for (int j = 0; j < count; ++j)
    out.push_back(std::polar(1.0, M_PI / 2.0 + 2.0 * M_PI * j / count));
  return out;
}

}  // namespace dpw
