#pragma once

#include "subell/core.hpp"
#include "subell/elliptic.hpp"
#include "subell/weights.hpp"

#include <utility>
#include <vector>

namespace subell {

/// Ordered pair bracketing a solution of -Lap u = m f(u).
struct BracketPair {
  Vector sub;
  Vector super;
};

struct BracketCheckOptions {
  Real tol = 1e-10;
  // nodes skipped by the subsolution sign check (glued fields are certified
  // at the interface by the flux comparison instead of the stencil residual)
  std::vector<Index> sub_exempt_nodes;
};

struct BracketCheck {
  bool ordered = true;
  bool sub_ok = true;
  bool super_ok = true;
  Real worst_sub = -kInfinity;   // max of -Lap sub - m f(sub), <= 0 wanted
  Real worst_super = -kInfinity; // max of m f(super) + Lap super, <= 0 wanted
  Index worst_sub_node = -1;
  Index worst_super_node = -1;
};

BracketCheck check_bracket(const DiscreteOperator& op, const WeightField& m,
                           const Nonlinearity& f, const BracketPair& bracket,
                           const Vector& boundary_data,
                           const BracketCheckOptions& opts = {});

struct IterationOptions {
  Real change_tol = 1e-10;   // relative sup-norm change, floor scale 1
  Real residual_tol = 1e-8;  // relative to the right-hand-side scale
  int max_sweeps = 500;
  Real lambda_cap = 1e8;
  Real bracket_tol = 1e-10;
  std::vector<Index> sub_exempt_nodes;
  bool run_super_side = false; // also iterate down from super when it verifies
};

struct IterationReport {
  Vector solution; // sub-started limit, full nodal field
  int sweeps = 0;
  Real final_residual = kInfinity;
  bool converged = false;
  bool lambda_capped = false;
  bool super_verified = false;
  Real max_monotonicity_violation = 0.0; // worst pre-damping backward step
  Real max_sandwich_violation = 0.0;
  std::vector<std::pair<Real, Real>> sweep_change; // per-sweep min/max change
  Vector super_limit; // empty unless the super side ran
  bool super_converged = false;
  Real worst_sub_residual = -kInfinity; // from the bracket precheck
};

/// Shifted monotone iteration (-Lap + Lambda) u_{k+1} = m f(u_k) + Lambda u_k
/// with the nodal shift Lambda = m^- * Lip(f on [sub, super]), capped at
/// lambda_cap with half-step damping on non-monotone nodes. The sub-started
/// nondecreasing sequence is returned; the super side runs on request when
/// super verifies as a discrete supersolution.
IterationReport monotone_iterate(const DiscreteOperator& op, const WeightField& m,
                                 const Nonlinearity& f,
                                 const BracketPair& bracket,
                                 const Vector& boundary_data,
                                 const IterationOptions& opts = {});

struct WProblemResult {
  Vector w; // full field: 0 outside omega1, M at the interface
  Real M = 0.0;
  Vector sub; // max(0, M theta - k2 M^p psi)
  Vector theta, psi;
  IterationReport report;
};

/// Solves -Lap w = -m^- f(w) on omega1 with w = 0 on the domain boundary and
/// w = M at the interface. pre: M >= 0, m_minus >= 0.
WProblemResult solve_w_problem(const WeightField& m_minus,
                               const Nonlinearity& f, Real M,
                               const SubdomainPartition& part,
                               const IterationOptions& opts = {});

/// max over the operator's unknowns of | -Lap_h u - m f(u) |.
Real residual_norm(const DiscreteOperator& op, const Vector& u,
                   const WeightField& m, const Nonlinearity& f);

struct PositivityReport {
  Real min_u = 0.0;
  Real min_ratio = 0.0; // min u / delta where delta > 0
  bool pass = false;
};

/// Strict positivity proxy: min u and min u/delta over the given nodes.
PositivityReport positivity_certificate(const Vector& u, const Vector& delta,
                                        const std::vector<Index>& nodes);

} // namespace subell
