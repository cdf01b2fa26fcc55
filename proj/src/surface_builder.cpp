#include "dpw/surface_builder.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "dpw/monodromy.hpp"

namespace dpw {

namespace {

Mat2 inv2(const Mat2& m) {
  cplx d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (std::abs(d) < 1e-14) throw FactorizationStall("singular factor");
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a / d;
}

// strict-plus part with the hermitian half of mode zero; used by the Newton
// refinement of the spectral factor
LoopMatrix plus_half(const LoopMatrix& g) {
  int N = global_trunc_order();
  std::vector<Mat2> c;
  for (int k = 0; k <= N; ++k)
    c.push_back(k == 0 ? Mat2(0.5 * g.coeff(0)) : g.coeff(k));
  return LoopMatrix(0, std::move(c));
}

}  // namespace

LoopMatrix spectral_factor(const LoopMatrix& P) {
  int N = global_trunc_order();
  int K = std::max(-P.low_order(), P.high_order());
  K = std::min(K, N);

  // Bauer: Cholesky of the block Toeplitz matrix of P; the last block row
  // approximates the holomorphic factor's coefficients.
  int m = std::max(4 * K + 8, 32);
  int dim = 2 * (m + 1);
  Eigen::MatrixXcd T(dim, dim);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      T.block<2, 2>(2 * i, 2 * j) = P.coeff(i - j);
  Eigen::LLT<Eigen::MatrixXcd> llt(T);
  if (llt.info() != Eigen::Success)
    throw FactorizationStall("block Toeplitz matrix is not positive definite");
  Eigen::MatrixXcd L = llt.matrixL();
  std::vector<Mat2> h(static_cast<size_t>(N) + 1, Mat2::Zero());
  for (int j = 0; j <= std::min(N, m); ++j)
    h[static_cast<size_t>(j)] = L.block<2, 2>(2 * m, 2 * (m - j));
  LoopMatrix H(0, std::move(h));

  // Newton (Wilson) refinement: H ← H(I + E), E + E* = H⁻¹ P H⁻* − I
  for (int it = 0; it < 30; ++it) {
    LoopMatrix Hi = lm_inverse(H);
    LoopMatrix G = lm_sub(lm_mul(lm_mul(Hi, P), lm_star(Hi)),
                          LoopMatrix::identity());
    double g = G.norm();
    H = lm_mul(H, lm_add(LoopMatrix::identity(), plus_half(G)));
    if (g < 1e-13) break;
  }

  // normalize H(0) upper triangular with positive diagonal via RQ
  Mat2 h0 = H.coeff(0);
  // RQ from the QR of the reversed-transposed matrix
  Eigen::Matrix2cd rev;
  rev << 0, 1, 1, 0;
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr((rev * h0).transpose());
  Eigen::Matrix2cd Q = qr.householderQ();
  Eigen::Matrix2cd Rq = rev * qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose() * rev;
  Eigen::Matrix2cd Qf = rev * Q.transpose();
  // h0 = Rq * Qf with Rq upper triangular, Qf unitary
  Mat2 ph = Mat2::Zero();
  for (int k = 0; k < 2; ++k) {
    cplx d = Rq(k, k);
    ph(k, k) = std::abs(d) > 1e-300 ? std::abs(d) / d : cplx(1.0);
  }
  Mat2 fix = Qf.adjoint() * ph.adjoint();  // H·fix has H(0) = Rq·ph⁻¹...
  H = lm_mul(H, LoopMatrix::constant(fix));
  return H;
}

IwasawaFactors iwasawa(const LoopMatrix& psi, int sample_count) {
  int N = global_trunc_order();
  if (sample_count <= 0) sample_count = 2 * N + 1;
  LoopMatrix P = lm_mul(psi, lm_star(psi));
  // hermitian symmetrization against truncation noise
  {
    std::vector<Mat2> c;
    int lo = std::min(P.low_order(), -P.high_order());
    int hi = -lo;
    for (int k = lo; k <= hi; ++k)
      c.push_back(0.5 * (P.coeff(k) + P.coeff(-k).adjoint()));
    P = LoopMatrix(lo, std::move(c));
  }
  IwasawaFactors out;
  out.B = spectral_factor(P);
  out.lambdas = lambda_samples(sample_count);
  for (cplx l : out.lambdas) {
    Mat2 b = lm_eval(out.B, l);
    Mat2 f = inv2(b) * lm_eval(psi, l);
    out.F_at.push_back(f);
    out.residual = std::max(out.residual, (b * f - lm_eval(psi, l)).norm());
    out.unitarity =
        std::max(out.unitarity, (f * f.adjoint() - Mat2::Identity()).norm());
  }
  return out;
}

Eigen::Vector4d ImmersionSample::quat() const {
  return {q(0, 0).real(), q(0, 0).imag(), q(0, 1).real(), q(0, 1).imag()};
}

namespace {

std::vector<cplx> path_to(const FuchsianPotential& xi, cplx z) {
  cplx b = xi.base_point;
  std::vector<cplx> p = {b, 0.5 * b};
  double r = std::abs(z);
  if (r > 0.55) p.push_back(0.5 * z / r);
  if (std::abs(p.back() - z) > 1e-14) p.push_back(z);
  return p;
}

}  // namespace

ImmersionSample immersion_point(const FuchsianPotential& xi, cplx z) {
  for (const Pole& p : xi.poles)
    if (!p.at_infinity && std::abs(z - p.z) < 1e-3)
      throw NearPole("immersion sample too close to a pole");
  int N = global_trunc_order();
  int S = 2 * N + 1;
  std::vector<cplx> pts = path_to(xi, z);
  std::vector<cplx> ls = lambda_samples(S);
  // assemble the frame loop from per-λ transports
  std::vector<Mat2> psi_s;
  psi_s.reserve(static_cast<size_t>(S));
  for (cplx l : ls) psi_s.push_back(transport_polyline(xi, pts, l));
  std::vector<Mat2> modes(static_cast<size_t>(2 * N + 1), Mat2::Zero());
  for (int k = -N; k <= N; ++k) {
    Mat2 acc = Mat2::Zero();
    for (int s = 0; s < S; ++s)
      acc += psi_s[static_cast<size_t>(s)] *
             std::pow(ls[static_cast<size_t>(s)], -k);
    modes[static_cast<size_t>(k + N)] = acc / static_cast<double>(S);
  }
  LoopMatrix psi(-N, std::move(modes));
  IwasawaFactors iw = iwasawa(psi, 5);
  cplx l1 = -xi.lambda1, l2 = xi.lambda1;
  Mat2 f1 = inv2(lm_eval(iw.B, l1)) * transport_polyline(xi, pts, l1);
  Mat2 f2 = inv2(lm_eval(iw.B, l2)) * transport_polyline(xi, pts, l2);
  Mat2 f = inv2(f1) * f2;
  cplx d = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
  f /= std::sqrt(d);
  // project to SU(2)
  Mat2 su;
  cplx a = 0.5 * (f(0, 0) + std::conj(f(1, 1)));
  cplx b = 0.5 * (f(0, 1) - std::conj(f(1, 0)));
  double nn = std::sqrt(std::norm(a) + std::norm(b));
  a /= nn;
  b /= nn;
  su << a, b, -std::conj(b), std::conj(a);
  ImmersionSample out;
  out.z = z;
  out.q = su;
  return out;
}

std::vector<ImmersionSample> sample_fundamental_domain(
    const FuchsianPotential& xi, const DomainGrid& grid) {
  std::vector<ImmersionSample> out;
  for (int i = 0; i <= grid.radial; ++i) {
    double r = grid.max_radius * i / grid.radial;
    for (int j = 0; j < grid.angular; ++j) {
      cplx z = std::polar(std::max(r, 1e-4), 2.0 * M_PI * j / grid.angular);
      out.push_back(immersion_point(xi, z));
    }
  }
  return out;
}

double boundary_arc_planarity(const FuchsianPotential& xi, size_t arc,
                              int samples) {
  std::vector<double> angs;
  for (const Pole& p : xi.poles)
    if (!p.at_infinity) angs.push_back(std::arg(p.z));
  std::sort(angs.begin(), angs.end());
  if (angs.empty()) throw BadInput("no boundary arcs without poles");
  size_t p = angs.size();
  if (arc >= p) throw BadInput("arc index out of range");
  double a0 = angs[arc];
  double a1 = arc + 1 < p ? angs[arc + 1] : angs[0] + 2.0 * M_PI;
  Eigen::MatrixXd A(samples, 4);
  for (int s = 0; s < samples; ++s) {
    double t = a0 + (a1 - a0) * (s + 1.0) / (samples + 1.0);
    ImmersionSample im = immersion_point(xi, std::polar(1.0, t));
    A.row(s) = im.quat().transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::Vector4d v = svd.matrixV().col(3);
  return (A * v).lpNorm<Eigen::Infinity>();
}

namespace {

using Mat4 = Eigen::Matrix4d;

Mat4 reflection_matrix(const Eigen::Vector4d& v) {
  return Mat4::Identity() - 2.0 * v * v.transpose();
}

}  // namespace

SurfaceMesh reflect_orbit(const FuchsianPotential& xi, const DomainGrid& grid,
                          long max_group_order) {
  std::vector<ImmersionSample> fund = sample_fundamental_domain(xi, grid);

  // fit one reflection sphere (hyperplane through 0) per boundary arc
  std::vector<double> angs;
  for (const Pole& p : xi.poles)
    if (!p.at_infinity) angs.push_back(std::arg(p.z));
  std::sort(angs.begin(), angs.end());
  size_t p = angs.size();
  std::vector<Mat4> gens;
  for (size_t arc = 0; arc < p; ++arc) {
    double a0 = angs[arc];
    double a1 = arc + 1 < p ? angs[arc + 1] : angs[0] + 2.0 * M_PI;
    int ns = 7;
    Eigen::MatrixXd A(ns, 4);
    for (int s = 0; s < ns; ++s) {
      double t = a0 + (a1 - a0) * (s + 1.0) / (ns + 1.0);
      A.row(s) = immersion_point(xi, std::polar(1.0, t)).quat().transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    gens.push_back(reflection_matrix(svd.matrixV().col(3)));
  }

  // close the group generated by the fitted reflections
  std::vector<Mat4> group = {Mat4::Identity()};
  std::vector<int> parity = {0};
  bool grew = true;
  while (grew) {
    grew = false;
    for (size_t e = 0; e < group.size(); ++e) {
      for (size_t g = 0; g < gens.size(); ++g) {
        Mat4 cand = gens[g] * group[e];
        bool known = false;
        for (const Mat4& h : group)
          if ((h - cand).norm() < 1e-5) {
            known = true;
            break;
          }
        if (!known) {
          group.push_back(cand);
          parity.push_back(1 - parity[e]);
          grew = true;
          if (static_cast<long>(group.size()) > max_group_order)
            throw NonClosingOrbit(
                "reflection group did not close within the order bound");
        }
      }
    }
  }

  SurfaceMesh mesh;
  int rows = grid.radial + 1, cols = grid.angular;
  // weld by rounded coordinates
  std::map<std::array<long, 4>, int> weld;
  auto add_vertex = [&](const Eigen::Vector4d& q, int ge, cplx z) {
    std::array<long, 4> key;
    for (int k = 0; k < 4; ++k) key[static_cast<size_t>(k)] = std::lround(q[k] * 2e5);
    auto it = weld.find(key);
    if (it != weld.end()) return it->second;
    int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({q, ge, z});
    weld.emplace(key, idx);
    return idx;
  };
  for (size_t e = 0; e < group.size(); ++e) {
    std::vector<int> idx(fund.size());
    for (size_t s = 0; s < fund.size(); ++s)
      idx[s] = add_vertex(group[e] * fund[s].quat(), static_cast<int>(e),
                          fund[s].z);
    for (int i = 0; i + 1 < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        int jn = (j + 1) % cols;
        std::array<int, 4> f = {idx[static_cast<size_t>(i * cols + j)],
                                idx[static_cast<size_t>((i + 1) * cols + j)],
                                idx[static_cast<size_t>((i + 1) * cols + jn)],
                                idx[static_cast<size_t>(i * cols + jn)]};
        if (parity[e]) std::swap(f[1], f[3]);
        mesh.faces.push_back(f);
      }
  }
  return mesh;
}

int SurfaceMesh::euler_characteristic() const {
  std::map<std::pair<int, int>, int> edges;
  int degenerate_faces = 0;
  for (const auto& f : faces) {
    std::vector<int> vs;
    for (int k = 0; k < 4; ++k)
      if (f[static_cast<size_t>(k)] != f[static_cast<size_t>((k + 1) % 4)])
        vs.push_back(f[static_cast<size_t>(k)]);
    if (vs.size() < 3) {
      ++degenerate_faces;
      continue;
    }
    for (size_t k = 0; k < vs.size(); ++k) {
      int a = vs[k], b = vs[(k + 1) % vs.size()];
      edges[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  int F = static_cast<int>(faces.size()) - degenerate_faces;
  int E = static_cast<int>(edges.size());
  int V = static_cast<int>(vertices.size());
  return V - E + F;
}

Eigen::Vector3d stereographic_project(const Eigen::Vector4d& q,
                                      const Eigen::Vector4d& pole) {
  Eigen::Vector4d p = pole.normalized();
  double denom = 1.0 - q.dot(p);
  if (std::abs(denom) < 1e-9)
    throw NearPole("sample at the stereographic projection pole");
  // orthonormal frame perpendicular to p
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity() - p * p.transpose();
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(M, Eigen::ComputeFullU);
  Eigen::Vector3d out;
  for (int k = 0; k < 3; ++k) out[k] = q.dot(svd.matrixU().col(k)) / denom;
  return out;
}

Eigen::Vector4d automatic_projection_pole(const SurfaceMesh& mesh) {
  std::vector<Eigen::Vector4d> cands;
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector4d e = Eigen::Vector4d::Zero();
    e[k] = 1.0;
    cands.push_back(e);
    cands.push_back(-e);
  }
  std::mt19937 rng(12345);
  std::normal_distribution<double> g;
  for (int k = 0; k < 60; ++k) {
    Eigen::Vector4d v{g(rng), g(rng), g(rng), g(rng)};
    cands.push_back(v.normalized());
  }
  double best = -1.0;
  Eigen::Vector4d pick = cands[0];
  for (const auto& c : cands) {
    double mind = 2.0;
    for (const auto& v : mesh.vertices)
      mind = std::min(mind, (v.p - c).norm());
    if (mind > best) {
      best = mind;
      pick = c;
    }
  }
  return pick;
}

void export_mesh_obj(const SurfaceMesh& mesh, const std::string& path) {
  Eigen::Vector4d pole = automatic_projection_pole(mesh);
  std::ofstream os(path);
  char buf[160];
  for (const auto& v : mesh.vertices) {
    Eigen::Vector3d x = stereographic_project(v.p, pole);
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", x[0], x[1], x[2]);
    os << buf;
  }
  for (const auto& f : mesh.faces)
    os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << " "
       << f[3] + 1 << "\n";
}

void export_mesh_ply(const SurfaceMesh& mesh, const std::string& path) {
  Eigen::Vector4d pole = automatic_projection_pole(mesh);
  std::ofstream os(path);
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << mesh.vertices.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  os << "element face " << mesh.faces.size() << "\n";
  os << "property list uchar int vertex_indices\nend_header\n";
  char buf[160];
  for (const auto& v : mesh.vertices) {
    Eigen::Vector3d x = stereographic_project(v.p, pole);
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", x[0], x[1], x[2]);
    os << buf;
  }
  for (const auto& f : mesh.faces)
    os << "4 " << f[0] << " " << f[1] << " " << f[2] << " " << f[3] << "\n";
}

}  // namespace dpw
