#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <json.hpp>
#include <vector>

#include "dpw/monodromy.hpp"

namespace dpw {

// One half-trace target at an evaluation point: the product of the
// sweep-order local monodromies over [i, j) must have ½tr = sign·cos(theta).
struct TraceTarget {
  size_t i = 0, j = 0;
  cplx lambda{0.0, 1.0};
  int sign = 1;
  double theta = 0.0;

  double value() const { return sign * std::cos(theta); }
};

struct ClosingTargets {
  std::vector<double> nu;  // positive residue eigenvalue per stored pole
  std::vector<TraceTarget> extrinsic;
  int lambda_count = 0;  // unitarity samples on S¹; 0 means 2N+1
};

struct ConstraintOptions {
  MonodromyOptions mono{};
  // guard: minimum allowed ‖ξ^(-1)(z)‖ on the monitoring grid
  double vanish_floor = 1e-4;
};

// Block norms of the last assembly, for logs and guards.
struct ConstraintBreakdown {
  double sum = 0, eigenvalue = 0, determinant = 0, intrinsic = 0,
         extrinsic = 0;
  double min_xi_m1 = 0;  // min ‖ξ^(-1)(z)‖ over the monitoring grid
};

// The constraint vector F: residue sum, eigenvalue condition per pole,
// identical vanishing of det ξ^(-1), reality of the monodromy trace algebra
// on S¹ (unitarizability), and the half-trace targets at the evaluation
// points.  Deterministic; intrinsic entries are scaled by 1/√(#λ-samples).
Eigen::VectorXd assemble_constraints(const FuchsianPotential& xi,
                                     const ClosingTargets& t,
                                     const ConstraintOptions& opt = {},
                                     ConstraintBreakdown* out = nullptr);

using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central-difference Jacobian; r0 = F(x) supplies the row count.
Eigen::MatrixXd fd_jacobian(const VecFn& F, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& r0, double step = 1e-6);

struct GaussNewtonOptions {
  int max_iter = 30;
  double tol = 1e-9;
  double fd_step = 1e-6;
  std::ostream* log = nullptr;
};

struct GaussNewtonReport {
  bool converged = false;
  double f_inf = 0.0;
  int iterations = 0;
};

// Damped Gauss-Newton on the least-squares problem F(x) = 0 with min-norm
// steps (the gauge freedom makes the Jacobian structurally rank-deficient).
GaussNewtonReport gauss_newton(const VecFn& F, Eigen::VectorXd& x,
                               const GaussNewtonOptions& opt = {});

// Bijection between flow unknowns and a potential: angles of the non-pinned
// poles followed by the real residue coefficients of all poles.
struct FlowVariables {
  FuchsianPotential tpl;        // supplies poles, targets, base point
  std::vector<size_t> pinned;   // pole indices kept fixed (three for flows)

  std::vector<size_t> free_poles() const;
  Eigen::VectorXd encode(const FuchsianPotential& xi) const;
  FuchsianPotential decode(const Eigen::VectorXd& x) const;
};

// Linear-in-t interpolation between two target sets with identical shape.
struct FlowSchedule {
  ClosingTargets start, target;

  ClosingTargets at(double t) const;
};

struct FlowOptions {
  double dt_init = 0.05;
  double dt_max = 0.05;
  double dt_min = 1e-6;
  double pole_gap_floor = 1e-3;
  GaussNewtonOptions corrector{12, 1e-9, 1e-6, nullptr};
  ConstraintOptions cons{};
  std::string checkpoint_dir;  // empty: no checkpoints
  std::ostream* log = nullptr;  // one JSON line per accepted step
};

struct FlowResult {
  FuchsianPotential xi;
  int steps = 0;
  double final_f_inf = 0.0;
};

// Predictor-corrector continuation of F(x, t) = 0 from t = 0 to t = 1.
FlowResult run_flow(const FuchsianPotential& seed, const FlowSchedule& sched,
                    const FlowVariables& vars, const FlowOptions& opt = {});

}  // namespace dpw
