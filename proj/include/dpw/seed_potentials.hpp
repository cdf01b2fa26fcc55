#pragma once

#include <iosfwd>
#include <string>

#include "dpw/closing_flow.hpp"

namespace dpw {

struct SeedOptions {
  int coarse_lambda = 9;   // unitarity samples while searching
  int final_lambda = 0;    // polish/verification samples; 0 means 2N+1
  int max_restarts = 60;
  unsigned rng_seed = 1;
  double tol = 1e-9;
  std::ostream* log = nullptr;
};

// Closing targets of the 4-pole quadrilateral with equal eigenvalues nu:
// per-pole eigenvalue nu, and the two adjacent-pair global traces
// ½tr = cos(4πν) at λ = ±i.
ClosingTargets four_pole_targets(double nu, int lambda_count = 0);

// 4-pole potential with poles (1, i, -1, -i), eigenvalues 1/(2n), spin -1,
// the τ(z) = -z symmetry built into the unknowns, closed to the tolerance.
// Found by damped Newton from a structured random ansatz, continuing in the
// eigenvalue from n = 2 when n > 2.
FuchsianPotential four_pole_seed(int n, const SeedOptions& opt = {});

// Constant loop gauge to coefficientwise-real residues (the reality
// condition for poles on S¹).  Throws SymmetryViolated when no real form
// exists.
FuchsianPotential reality_gauge(const FuchsianPotential& xi);

// Constant loop gauge making the local monodromies at the base point
// unitary on sampled S¹: invariant positive form by fixed-point averaging,
// then its spectral factorization.
FuchsianPotential unitarize_basepoint(const FuchsianPotential& xi,
                                      int lambda_count = 0);

struct PipelineManifest {
  nlohmann::json steps = nlohmann::json::array();

  void record(const std::string& name, const FuchsianPotential& xi);
  void save(const std::string& path) const;
};

// Gauge/cover pipeline from the 4-pole potential to an (n+2)-pole potential
// on S¹ with all residue eigenvalues ±1/4, three boundary planes.
FuchsianPotential lawson_three_plane_from(const FuchsianPotential& seed,
                                          int n,
                                          PipelineManifest* man = nullptr);
FuchsianPotential lawson_three_plane_potential(int n,
                                               const SeedOptions& opt = {},
                                               PipelineManifest* man = nullptr);

// Same surface with four boundary planes: n even, n/2+3 poles.
FuchsianPotential lawson_four_plane_from(const FuchsianPotential& seed, int n,
                                         PipelineManifest* man = nullptr);
FuchsianPotential lawson_four_plane_potential(int n,
                                              const SeedOptions& opt = {},
                                              PipelineManifest* man = nullptr);

}  // namespace dpw
