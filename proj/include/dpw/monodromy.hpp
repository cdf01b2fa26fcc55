#pragma once

#include <iosfwd>
#include <vector>

#include "dpw/potential.hpp"

namespace dpw {

struct MonodromyOptions {
  double eps = 1e-12;            // local error target for the integrator
  double detour_factor = 0.4;    // detour radius as a fraction of the local gap
  double clearance_factor = 0.05;  // min distance to poles when placing paths
  int arc_points = 32;           // polyline resolution for semicircles
};

// Parallel transport of dΨ + ξΨ dz = 0 along a polyline, Ψ = Id at the
// start; returns the solution at the end, re-projected to det 1.
Mat2 transport_polyline(const FuchsianPotential& xi,
                        const std::vector<cplx>& pts, cplx lambda,
                        double eps = 1e-12);

// Local monodromies around every finite pole, all based at the potential's
// base point, computed in one sweep along a detoured circle.
struct MonodromyResult {
  std::vector<Mat2> local;      // one per finite pole, in stored pole order
  std::vector<size_t> pole_index;  // map into xi.poles
  Mat2 total;                   // product over all local loops
  double unitarity_err = 0.0;   // max ‖MM† - Id‖ over local loops
};

MonodromyResult local_monodromies(const FuchsianPotential& xi, cplx lambda,
                                  const MonodromyOptions& opt = {});

// Product M_{j-1}···M_i over the half-open index range [i, j) of the sweep
// order (angular order starting from the base point).
Mat2 global_monodromy(const MonodromyResult& mr, size_t i, size_t j);

// ½ tr of the global monodromy over [i, j).
cplx half_trace(const MonodromyResult& mr, size_t i, size_t j);

// CSV diagnostics: one row per loop and λ-sample with the trace and the
// unitarity defect.  Columns: lambda_re,lambda_im,loop_id,trace_re,
// trace_im,unitarity_err.
void dump_monodromy_csv(std::ostream& os, const FuchsianPotential& xi,
                        const std::vector<cplx>& lambdas,
                        const MonodromyOptions& opt = {});

// λ samples on the unit circle: 2M+1 points including ±i when possible.
std::vector<cplx> lambda_samples(int count);

}  // namespace dpw
