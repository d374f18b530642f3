#pragma once

#include "subell/core.hpp"
#include "subell/geometry.hpp"
#include "subell/weights.hpp"

#include <memory>
#include <vector>

namespace subell {

/// Sparse -Laplace_h over a set of unknown interior nodes; every other node
/// is Dirichlet. Uniform 5-point stencil, with Shortley-Weller shortened arms
/// next to the disk boundary (those rows break symmetry, so the factorization
/// falls back from Cholesky to LU there). Factorizations are cached.
class DiscreteOperator {
public:
  DiscreteOperator(const Grid& grid, std::vector<Index> unknowns);

  const Grid& grid() const { return *grid_; }
  const std::vector<Index>& unknowns() const { return unknowns_; }
  Index n_unknowns() const { return static_cast<Index>(unknowns_.size()); }
  Index unknown_of(Index node) const { return node_to_unknown_[static_cast<std::size_t>(node)]; }
  bool symmetric() const { return symmetric_; }
  const SparseMatrix& matrix() const { return matrix_; }
  Real scale() const { return scale_; } // max diagonal entry

  /// Solves A x = b in unknown numbering (direct, one refinement sweep).
  Vector solve_reduced(const Vector& b) const;

  /// Row of A u at `node` evaluated on full nodal values: (-Lap_h u)(node).
  Real apply_row(const Vector& full_values, Index node) const;

  /// Dirichlet contribution to the right-hand side in unknown numbering.
  Vector dirichlet_rhs(const Vector& boundary_values) const;

private:
  const Grid* grid_;
  std::vector<Index> unknowns_;
  std::vector<Index> node_to_unknown_;
  SparseMatrix matrix_;
  bool symmetric_ = true;
  Real scale_ = 0.0;
  struct Coupling {
    Index row; // unknown index
    Index node;
    Real coeff;
  };
  std::vector<Coupling> boundary_couplings_;
  struct Solver;
  std::shared_ptr<Solver> solver_; // cached factorization of A
};

DiscreteOperator make_operator(const Grid& grid);
DiscreteOperator make_operator(const Grid& grid, std::vector<Index> unknowns);

/// Factorization of A + diag(shift), reused across monotone sweeps.
class ShiftedSolver {
public:
  ShiftedSolver(const DiscreteOperator& op, const Vector& shift_unknowns);
  Vector solve(const Vector& b) const;

private:
  SparseMatrix S_;
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// -Lap_h u = rhs at the unknowns, u = boundary_values elsewhere. Returns the
/// full nodal field; non-unknown nodes copy boundary_values.
Vector solve_dirichlet(const DiscreteOperator& op, const Vector& rhs_full,
                       const Vector& boundary_values);

/// Solve restricted to omega1 with the interface treated as Dirichlet.
Vector mixed_solve(const SubdomainPartition& part, const Vector& rhs_full,
                   Real outer_value, Real interface_value);

struct GreenNormResult {
  Real value = 0.0;
  bool subsampled = false; // when set, value is a lower bound
  Index columns_used = 0;  // 0 for the closed-form r = inf path
};

/// Operator norm of the solution map L^r -> L^inf. For r = inf this is the
/// torsion maximum; for finite r the Hoelder-dual column norm, exact unless
/// the grid exceeds `full_cap` unknowns and column subsampling engages.
GreenNormResult green_operator_norm(const DiscreteOperator& op, Real r,
                                    Index full_cap = 50000);
GreenNormResult green_operator_norm(const DiscreteOperator& op, Real r,
                                    const Vector& vol, Index full_cap);

struct MorelOswaldResult {
  Real c = 0.0;
  bool subsampled = false; // when set, c is an upper bound
  Index columns_used = 0;
};

/// Largest c with u >= c * delta * sum(h * delta * vol) for every h >= 0,
/// i.e. the minimum of (A^-1)_{xy} / (delta_x delta_y vol_y) over node pairs.
MorelOswaldResult morel_oswald_constant(const DiscreteOperator& op,
                                        Index full_cap = 50000);
MorelOswaldResult morel_oswald_constant(const DiscreteOperator& op,
                                        const Vector& delta, const Vector& vol,
                                        Index full_cap = 50000);

struct EigenOptions {
  Real lambda_cap = 1e8;
  int bisection_steps = 60;
  Real residual_tol = 1e-8; // times the operator scale
  int max_inner_iterations = 4000;
};

struct EigenPair {
  Real lambda = 0.0;
  Vector phi;          // full nodal field, positive inside, sup-norm 1
  Real residual = 0.0; // max | -Lap_h phi - lambda m phi | over unknowns
};

/// Positive principal eigenvalue of -Lap_h phi = lambda m phi, found by
/// bisection on the smallest eigenvalue mu1(lambda) of A - lambda diag(m)
/// (concave in lambda, mu1(0) > 0), inner eigenvalue by shifted inverse
/// power iteration. pre: m > 0 somewhere on the unknowns.
EigenPair principal_eigenpair(const DiscreteOperator& op, const WeightField& m,
                              const EigenOptions& opts = {});

enum class InterfaceSide { FromOmega0, FromOmega1 };

/// One-sided second-order normal derivatives at the interface nodes, taken
/// along the outward normal of omega0. Box corners get NaN.
Vector normal_derivative(const Vector& u, const SubdomainPartition& part,
                         InterfaceSide side);

} // namespace subell
