#pragma once

#include <Eigen/LU>
#include <json.hpp>
#include <optional>
#include <vector>

#include "dpw/loop_matrix.hpp"

namespace dpw {

// One simple pole of a Fuchsian potential with its residue and the local
// target data (positive residue eigenvalue as a rational, vertex integer,
// spin).
struct Pole {
  cplx z{};
  bool at_infinity = false;
  LoopMatrix residue;
  long ev_num = 1, ev_den = 4;  // positive eigenvalue target, ev in (0, 1/2]
  int n = 2;                    // vertex integer
  int spin = -1;

  double ev() const { return static_cast<double>(ev_num) / static_cast<double>(ev_den); }
};

// Fuchsian DPW potential ξ = Σ R_k dz/(z - z_k).  The pole at ∞, when
// present, is stored explicitly; its residue always equals minus the sum of
// the finite ones.  Evaluation only ever uses the finite poles.
struct FuchsianPotential {
  std::vector<Pole> poles;
  cplx lambda1{0.0, 1.0};  // evaluation points λ1, λ2 = -λ1
  cplx base_point{1.0, 0.0};
  bool reflection_form = false;

  const Pole* pole_at_infinity() const;
  std::vector<size_t> finite_pole_indices() const;

  // ξ(z, ·) as a λ-series / ξ(z, λ) as a matrix.  z must avoid the poles.
  LoopMatrix eval_z(cplx z) const;
  Mat2 eval(cplx z, cplx lambda) const;

  // Σ over all stored residues (should vanish) and max per-mode trace.
  double sum_residual() const;
  double trace_residual() const;
  // max_k, per λ-mode, |det R_k + ev_k²|
  double det_residual() const;
};

// Möbius map with ad - bc = 1.
struct MoebiusMap {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static MoebiusMap from_unnormalized(cplx a, cplx b, cplx c, cplx d);
  // The unique map sending three points (∞ allowed via at_inf flags) to
  // (0, 1, ∞) pre-composed appropriately; helper for pipeline steps.
  static MoebiusMap three_points(cplx p0, cplx p1, cplx p2);  // p0→0, p1→1, p2→∞

  cplx apply(cplx z) const;          // finite argument
  bool sends_to_infinity(cplx z) const;
  cplx apply_infinity() const;       // image of ∞ (may be ∞ when c = 0)
  bool infinity_to_infinity() const { return std::abs(c) < 1e-14; }
  MoebiusMap inverse() const;
};

// Max over sampled z and λ of the reality defect for poles on the unit
// circle; 0 means the potential is symmetric under z ↦ 1/z̄.
double check_reality(const FuchsianPotential& xi);

FuchsianPotential apply_moebius(const FuchsianPotential& xi, const MoebiusMap& m);

FuchsianPotential pullback_power(const FuchsianPotential& xi, int n);

// Requires the τ(z) = -z, σ = diag(i,-i) symmetry; returns η with
// (ξ gauged by diag(z^{1/2}, z^{-1/2})) = f*η, f(z) = z².
FuchsianPotential pushdown_z2(const FuchsianPotential& xi);

// Residual of the pushdown precondition τ*ξ = ξ.σ.
double pushdown_symmetry_residual(const FuchsianPotential& xi);

// Flip gauge at finite pole index k against the pole at ∞.
FuchsianPotential flip_gauge(const FuchsianPotential& xi, size_t k);

// z-independent symmetrizing gauge for a 4-pole potential with pole pairs
// swapped by τ(z) = -1/z (pairing (p, τp) and (q, τq) located from the pole
// set).  Output satisfies τ*η = η.σ.
FuchsianPotential symmetrizing_gauge(const FuchsianPotential& xi);

FuchsianPotential apply_constant_gauge(const FuchsianPotential& xi,
                                       const LoopMatrix& g);

int spin_of(const FuchsianPotential& xi, size_t k);

// Resolve the g vs -g ambiguity: positive real part of the (1,1) entry of
// the λ^0 coefficient, falling back to (2,1).
LoopMatrix normalize_gauge_sign(const LoopMatrix& g);

nlohmann::json potential_to_json(const FuchsianPotential& xi);
FuchsianPotential potential_from_json(const nlohmann::json& j);

// Real-coefficient parametrization used by the flow: per pole, per λ-mode
// -1..N, the (1,1), (1,2), (2,1) real entries; (2,2) = -(1,1).
std::vector<double> residues_to_reals(const FuchsianPotential& xi);
void reals_to_residues(FuchsianPotential& xi, const std::vector<double>& x);

}  // namespace dpw
