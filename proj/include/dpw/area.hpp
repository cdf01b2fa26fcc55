#pragma once

#include "dpw/potential.hpp"

namespace dpw {

// Normal form of a residue at a vertex pole with spin -1 and eigenvalues
// ±1/(2n): conjugated by C = (v|w) with v spanning the kernel of the λ^{-1}
// coefficient, the residue becomes (1/(2n)) [[a, b/λ], [c λ, -a]] with
// -a² - bc = -1.
struct NormalForm {
  Mat2 C;
  LoopMatrix X;               // C^{-1} R C
  double alpha = 0.0;         // X11 at λ = 0, the conjugator-free invariant
  double unit_det_residual = 0.0;  // |(-a² - bc) + 1| with the 1/(2n) scaled out
};

NormalForm residue_normal_form(const LoopMatrix& R, int n);

// Area contribution multiplicity m_k = |G| / (2 n_k) of a vertex pole orbit.
double pole_area_weight(const Pole& p, long group_order);

// Total area 2π Σ (1 - 2 n_k α_k) m_k over the spin -1 poles; spin +1 poles
// contribute nothing.
double total_area(const FuchsianPotential& xi, long group_order);

}  // namespace dpw
