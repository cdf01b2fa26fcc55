#pragma once

#include <string>
#include <vector>

#include "dpw/potential.hpp"

namespace dpw {

// Loop-group Iwasawa splitting Ψ = B·F: B holomorphic on the disk with B(0)
// upper triangular positive diagonal, F unitary on the sampled circle.
struct IwasawaFactors {
  LoopMatrix B;
  std::vector<cplx> lambdas;
  std::vector<Mat2> F_at;
  double residual = 0.0;   // max ‖B(λ)F(λ) − Ψ(λ)‖ over samples
  double unitarity = 0.0;  // max ‖F F† − I‖ over samples
};

// Spectral factorization P = H·H* of a positive hermitian loop into a
// holomorphic factor, by block-Toeplitz Cholesky plus Newton refinement.
// H(0) is upper triangular with positive diagonal.
LoopMatrix spectral_factor(const LoopMatrix& P);

IwasawaFactors iwasawa(const LoopMatrix& psi, int sample_count = 0);

struct ImmersionSample {
  cplx z;
  Mat2 q;               // point of S³ as an SU(2) matrix
  Eigen::Vector4d quat() const;  // (1, i, j, k) coordinates
};

// Frame integration from the base point, Iwasawa splitting, and the sym
// point evaluation f = F(λ1)⁻¹ F(λ2) with λ2 = −λ1.
ImmersionSample immersion_point(const FuchsianPotential& xi, cplx z);

struct DomainGrid {
  int radial = 12;
  int angular = 24;
  double max_radius = 0.92;  // keep clear of the boundary poles
};

std::vector<ImmersionSample> sample_fundamental_domain(
    const FuchsianPotential& xi, const DomainGrid& grid);

struct SurfaceMesh {
  struct Vertex {
    Eigen::Vector4d p;  // point on S³
    int group_elem = 0;
    cplx z{};
  };
  std::vector<Vertex> vertices;
  std::vector<std::array<int, 4>> faces;  // quad indices
  int euler_characteristic() const;
};

// Orbit of the sampled fundamental piece under the group generated by the
// boundary reflection spheres, with duplicate vertices welded.
SurfaceMesh reflect_orbit(const FuchsianPotential& xi, const DomainGrid& grid,
                          long max_group_order = 64);

// Great-2-sphere fit residual of the boundary arc between consecutive poles;
// index is the arc number in angular order.
double boundary_arc_planarity(const FuchsianPotential& xi, size_t arc,
                              int samples = 9);

Eigen::Vector3d stereographic_project(const Eigen::Vector4d& q,
                                      const Eigen::Vector4d& pole);

// Pole chosen to maximize distance from the mesh samples.
Eigen::Vector4d automatic_projection_pole(const SurfaceMesh& mesh);

void export_mesh_obj(const SurfaceMesh& mesh, const std::string& path);
void export_mesh_ply(const SurfaceMesh& mesh, const std::string& path);

}  // namespace dpw
