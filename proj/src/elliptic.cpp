#include "subell/elliptic.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace subell {

namespace {

// per-axis stencil coefficients from the two arm lengths
struct AxisCoeff {
  Real diag;
  Real plus, minus; // signed off-diagonal magnitudes
};

AxisCoeff axis_coeff(Real a_plus, Real a_minus) {
  AxisCoeff c;
  c.diag = 2.0 / (a_plus * a_minus);
  c.plus = 2.0 / (a_plus * (a_plus + a_minus));
  c.minus = 2.0 / (a_minus * (a_plus + a_minus));
  return c;
}

} // namespace

struct DiscreteOperator::Solver {
  bool use_ldlt = false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix> lu;

  void factorize(const SparseMatrix& A, bool symmetric) {
    use_ldlt = symmetric;
    if (use_ldlt) {
      ldlt.compute(A);
      if (ldlt.info() != Eigen::Success)
        throw std::logic_error("Cholesky factorization of -Lap_h failed");
    } else {
      lu.compute(A);
      if (lu.info() != Eigen::Success)
        throw std::logic_error("LU factorization of -Lap_h failed");
    }
  }

  Vector solve(const Vector& b) const {
    return use_ldlt ? ldlt.solve(b).eval() : lu.solve(b).eval();
  }
};

DiscreteOperator::DiscreteOperator(const Grid& grid, std::vector<Index> unknowns)
    : grid_(&grid), unknowns_(std::move(unknowns)) {
  if (unknowns_.empty())
    throw std::invalid_argument("operator needs at least one unknown node");
  node_to_unknown_.assign(static_cast<std::size_t>(grid.n_nodes()), -1);
  for (std::size_t k = 0; k < unknowns_.size(); ++k) {
    const Index node = unknowns_[k];
    if (grid.node_kind[static_cast<std::size_t>(node)] != NodeKind::Interior)
      throw std::invalid_argument("operator unknowns must be interior nodes");
    node_to_unknown_[static_cast<std::size_t>(node)] = static_cast<Index>(k);
  }

  const Index n = n_unknowns();
  std::vector<Eigen::Triplet<Real>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for (Index row = 0; row < n; ++row) {
    const Index node = unknowns_[static_cast<std::size_t>(row)];
    const auto& arms = grid.stencil[static_cast<std::size_t>(node)];
    Real diag = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const auto& ap = arms[2 * axis];
      const auto& am = arms[2 * axis + 1];
      if (ap.length != grid.h || am.length != grid.h)
        symmetric_ = false;
      const AxisCoeff c = axis_coeff(ap.length, am.length);
      diag += c.diag;
      const std::pair<const Grid::Arm*, Real> sides[2] = {{&ap, c.plus},
                                                          {&am, c.minus}};
      for (const auto& [arm, coeff] : sides) {
        const Index col = arm->neighbor >= 0 ? unknown_of(arm->neighbor) : -1;
        if (col >= 0)
          trip.emplace_back(static_cast<int>(row), static_cast<int>(col), -coeff);
        else
          boundary_couplings_.push_back({row, arm->neighbor, coeff});
      }
    }
    trip.emplace_back(static_cast<int>(row), static_cast<int>(row), diag);
    scale_ = std::max(scale_, diag);
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
  solver_ = std::make_shared<Solver>();
  solver_->factorize(matrix_, symmetric_);
}

Vector DiscreteOperator::solve_reduced(const Vector& b) const {
  Vector x = solver_->solve(b);
  // one refinement sweep keeps the relative residual near machine precision
  Vector r = b - matrix_ * x;
  x += solver_->solve(r);
  return x;
}

Real DiscreteOperator::apply_row(const Vector& full_values, Index node) const {
  const auto& arms = grid_->stencil[static_cast<std::size_t>(node)];
  Real acc = 0;
  for (int axis = 0; axis < grid_->dim(); ++axis) {
    const auto& ap = arms[2 * axis];
    const auto& am = arms[2 * axis + 1];
    const AxisCoeff c = axis_coeff(ap.length, am.length);
    acc += c.diag * full_values[node] - c.plus * full_values[ap.neighbor] -
           c.minus * full_values[am.neighbor];
  }
  return acc;
}

Vector DiscreteOperator::dirichlet_rhs(const Vector& boundary_values) const {
  Vector b = Vector::Zero(n_unknowns());
  for (const auto& cp : boundary_couplings_)
    b[cp.row] += cp.coeff * boundary_values[cp.node];
  return b;
}

DiscreteOperator make_operator(const Grid& grid) {
  return DiscreteOperator(grid, grid.interior);
}

DiscreteOperator make_operator(const Grid& grid, std::vector<Index> unknowns) {
  return DiscreteOperator(grid, std::move(unknowns));
}

struct ShiftedSolver::Impl {
  bool use_ldlt = false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix> lu;
};

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op,
                             const Vector& shift_unknowns) {
  S_ = op.matrix();
  for (Index j = 0; j < S_.rows(); ++j)
    S_.coeffRef(j, j) += shift_unknowns[j];
  S_.makeCompressed();
  impl_ = std::make_shared<Impl>();
  impl_->use_ldlt = op.symmetric();
  if (impl_->use_ldlt) {
    impl_->ldlt.compute(S_);
    if (impl_->ldlt.info() != Eigen::Success)
      throw std::logic_error("shifted factorization failed");
  } else {
    impl_->lu.compute(S_);
    if (impl_->lu.info() != Eigen::Success)
      throw std::logic_error("shifted factorization failed");
  }
}

Vector ShiftedSolver::solve(const Vector& b) const {
  Vector x = impl_->use_ldlt ? impl_->ldlt.solve(b).eval() : impl_->lu.solve(b).eval();
  Vector r = b - S_ * x;
  x += impl_->use_ldlt ? impl_->ldlt.solve(r).eval() : impl_->lu.solve(r).eval();
  return x;
}

Vector solve_dirichlet(const DiscreteOperator& op, const Vector& rhs_full,
                       const Vector& boundary_values) {
  if (!rhs_full.allFinite() || !boundary_values.allFinite())
    throw std::invalid_argument("solve inputs must be finite");
  Vector b = op.dirichlet_rhs(boundary_values);
  for (Index k = 0; k < op.n_unknowns(); ++k)
    b[k] += rhs_full[op.unknowns()[static_cast<std::size_t>(k)]];
  Vector x = op.solve_reduced(b);
  const Real resid = (b - op.matrix() * x).cwiseAbs().maxCoeff();
  const Real scale = std::max(b.cwiseAbs().maxCoeff(),
                              op.scale() * x.cwiseAbs().maxCoeff());
  if (resid > 1e-10 * std::max(scale, Real(1)))
    throw std::logic_error("direct solve missed the 1e-10 residual contract");
  Vector out = boundary_values;
  for (Index k = 0; k < op.n_unknowns(); ++k)
    out[op.unknowns()[static_cast<std::size_t>(k)]] = x[k];
  return out;
}

Vector mixed_solve(const SubdomainPartition& part, const Vector& rhs_full,
                   Real outer_value, Real interface_value) {
  const Grid& g = *part.grid;
  if (part.omega1_nodes.empty())
    throw std::invalid_argument("mixed solve needs a nonempty omega1");
  DiscreteOperator op(g, part.omega1_nodes);
  Vector data = Vector::Zero(g.n_nodes());
  for (Index b : g.boundary)
    data[b] = outer_value;
  for (const auto& f : part.interface_nodes)
    data[f.node] = interface_value;
  return solve_dirichlet(op, rhs_full, data);
}

GreenNormResult green_operator_norm(const DiscreteOperator& op, Real r,
                                    Index full_cap) {
  return green_operator_norm(op, r, op.grid().cell_volume, full_cap);
}

GreenNormResult green_operator_norm(const DiscreteOperator& op, Real r,
                                    const Vector& vol, Index full_cap) {
  if (!(r > op.grid().dim()))
    throw std::invalid_argument("integrability exponent must satisfy r > N");
  GreenNormResult res;
  if (std::isinf(r)) {
    // torsion function: single solve with unit load
    Vector u = op.solve_reduced(Vector::Ones(op.n_unknowns()));
    res.value = u.maxCoeff();
    return res;
  }

  const Real r_dual = r / (r - 1.0);
  const Index n = op.n_unknowns();
  const Index stride = n > full_cap ? (n + full_cap - 1) / full_cap : 1;
  res.subsampled = stride > 1;

  Vector dual_sum = Vector::Zero(n);
  Vector e = Vector::Zero(n);
  for (Index y = 0; y < n; y += stride) {
    const Real vy = vol[op.unknowns()[static_cast<std::size_t>(y)]];
    if (vy <= 0)
      continue;
    e[y] = 1.0;
    Vector col = op.solve_reduced(e); // (A^-1)_{x,y}
    e[y] = 0.0;
    ++res.columns_used;
    for (Index x = 0; x < n; ++x) {
      const Real green = std::max(col[x], Real(0)) / vy;
      dual_sum[x] += std::pow(green, r_dual) * vy;
    }
  }
  res.value = std::pow(dual_sum.maxCoeff(), 1.0 / r_dual);
  return res;
}

MorelOswaldResult morel_oswald_constant(const DiscreteOperator& op,
                                        Index full_cap) {
  return morel_oswald_constant(op, op.grid().delta, op.grid().cell_volume,
                               full_cap);
}

MorelOswaldResult morel_oswald_constant(const DiscreteOperator& op,
                                        const Vector& delta, const Vector& vol,
                                        Index full_cap) {
  MorelOswaldResult res;
  const Index n = op.n_unknowns();
  const Index stride = n > full_cap ? (n + full_cap - 1) / full_cap : 1;
  res.subsampled = stride > 1;

  Real c = kInfinity;
  Vector e = Vector::Zero(n);
  for (Index y = 0; y < n; y += stride) {
    const Index node_y = op.unknowns()[static_cast<std::size_t>(y)];
    const Real wy = delta[node_y] * vol[node_y];
    if (wy <= 0)
      continue; // loads with zero quadrature weight impose no constraint
    e[y] = 1.0;
    Vector col = op.solve_reduced(e);
    e[y] = 0.0;
    ++res.columns_used;
    for (Index x = 0; x < n; ++x) {
      const Index node_x = op.unknowns()[static_cast<std::size_t>(x)];
      if (delta[node_x] <= 0)
        continue;
      c = std::min(c, col[x] / (delta[node_x] * wy));
    }
  }
  if (!std::isfinite(c))
    throw std::logic_error("Morel-Oswald constant is undefined on this grid");
  res.c = c;
  return res;
}

namespace {

struct SmallestEig {
  Real mu;
  Vector v; // unknown numbering, unit max norm
};

// smallest eigenvalue of the symmetric matrix S by inverse power iteration
// with a shift strictly below the spectrum (Gershgorin bound)
SmallestEig smallest_eigenvalue(const SparseMatrix& S, bool symmetric, Real scale,
                                const Vector* warm, Real tol, int max_iter) {
  const Index n = S.rows();
  Real lower = kInfinity;
  for (Index j = 0; j < n; ++j) {
    Real diag = 0, offsum = 0;
    for (SparseMatrix::InnerIterator it(S, j); it; ++it) {
      if (it.row() == it.col())
        diag = it.value();
      else
        offsum += std::abs(it.value());
    }
    lower = std::min(lower, diag - offsum);
  }
  const Real sigma = lower - 0.01 * std::abs(lower) - 1e-8 * scale;

  SparseMatrix M = S;
  for (Index j = 0; j < n; ++j)
    M.coeffRef(j, j) -= sigma;
  M.makeCompressed();

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix> lu;
  if (symmetric) {
    ldlt.compute(M);
    if (ldlt.info() != Eigen::Success)
      throw std::logic_error("shifted eigensolver factorization failed");
  } else {
    lu.compute(M);
    if (lu.info() != Eigen::Success)
      throw std::logic_error("shifted eigensolver factorization failed");
  }
  auto solve = [&](const Vector& b) {
    return symmetric ? ldlt.solve(b).eval() : lu.solve(b).eval();
  };

  Vector v = warm && warm->size() == n ? *warm : Vector::Ones(n);
  v /= v.norm();
  Real mu = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = solve(v);
    w /= w.norm();
    mu = w.dot(S * w);
    Vector resid = S * w - mu * w;
    v = w;
    if (resid.cwiseAbs().maxCoeff() <= tol * scale)
      break;
  }
  SmallestEig out;
  out.mu = mu;
  out.v = v;
  return out;
}

SparseMatrix weighted_pencil(const DiscreteOperator& op, const Vector& m_unknowns,
                             Real lambda) {
  SparseMatrix S = op.matrix();
  for (Index j = 0; j < S.rows(); ++j)
    S.coeffRef(j, j) -= lambda * m_unknowns[j];
  S.makeCompressed();
  return S;
}

} // namespace

EigenPair principal_eigenpair(const DiscreteOperator& op, const WeightField& m,
                              const EigenOptions& opts) {
  const Index n = op.n_unknowns();
  Vector mu_weights(n);
  Real m_max = -kInfinity;
  for (Index k = 0; k < n; ++k) {
    mu_weights[k] = m.values[op.unknowns()[static_cast<std::size_t>(k)]];
    m_max = std::max(m_max, mu_weights[k]);
  }
  if (!(m_max > 0))
    throw std::invalid_argument(
        "principal eigenvalue needs m > 0 somewhere on the unknowns");

  const Real inner_tol = 1e-10;
  Vector warm;
  auto mu1 = [&](Real lambda) {
    const Real scale = op.scale() * (1.0 + lambda * std::abs(m_max) /
                                               std::max(op.scale(), Real(1)));
    SmallestEig e = smallest_eigenvalue(weighted_pencil(op, mu_weights, lambda),
                                        op.symmetric(), scale, &warm, inner_tol,
                                        opts.max_inner_iterations);
    warm = e.v;
    return e;
  };

  // mu1(0) > 0 since A is positive definite; expand until mu1 < 0
  Real lo = 0.0, hi = 1.0;
  SmallestEig at_hi = mu1(hi);
  while (at_hi.mu >= 0) {
    lo = hi;
    hi *= 2.0;
    if (hi > opts.lambda_cap)
      throw std::runtime_error(
          "no principal eigenvalue bracket below the cap lambda_max = " +
          std::to_string(opts.lambda_cap));
    at_hi = mu1(hi);
  }
  for (int step = 0; step < opts.bisection_steps; ++step) {
    const Real mid = 0.5 * (lo + hi);
    if (mu1(mid).mu >= 0)
      lo = mid;
    else
      hi = mid;
  }

  const Real lambda = 0.5 * (lo + hi);
  SmallestEig final_eig = mu1(lambda);

  EigenPair pair;
  pair.lambda = lambda;
  pair.phi = Vector::Zero(op.grid().n_nodes());
  Vector v = final_eig.v;
  Index arg_max = 0;
  v.cwiseAbs().maxCoeff(&arg_max);
  if (v[arg_max] < 0)
    v = -v;
  v /= v.maxCoeff();
  for (Index k = 0; k < n; ++k)
    pair.phi[op.unknowns()[static_cast<std::size_t>(k)]] = v[k];
  if (v.minCoeff() <= 0)
    throw std::runtime_error("principal eigenvector is not strictly positive");

  Real resid = 0;
  for (Index k = 0; k < n; ++k) {
    const Index node = op.unknowns()[static_cast<std::size_t>(k)];
    resid = std::max(resid, std::abs(op.apply_row(pair.phi, node) -
                                     lambda * mu_weights[k] * v[k]));
  }
  pair.residual = resid;
  return pair;
}

Vector normal_derivative(const Vector& u, const SubdomainPartition& part,
                         InterfaceSide side) {
  const Grid& g = *part.grid;
  Vector out(static_cast<Index>(part.interface_nodes.size()));
  for (std::size_t k = 0; k < part.interface_nodes.size(); ++k) {
    const auto& f = part.interface_nodes[k];
    if (f.corner) {
      out[static_cast<Index>(k)] = kNaN;
      continue;
    }
    Real dudnu = 0;
    for (int axis = 0; axis < g.dim(); ++axis) {
      const Real nu = f.normal[axis];
      if (nu == 0)
        continue;
      const int s = (side == InterfaceSide::FromOmega0 ? -1 : +1) *
                    (nu > 0 ? 1 : -1);
      const Index n1 = g.step(f.node, axis, s);
      const Index n2 = g.step(f.node, axis, 2 * s);
      if (n1 < 0 || n2 < 0)
        throw std::runtime_error("one-sided interface stencil exits the grid");
      const Real deriv =
          s * (-3.0 * u[f.node] + 4.0 * u[n1] - u[n2]) / (2.0 * g.h);
      dudnu += nu * deriv;
    }
    out[static_cast<Index>(k)] = dudnu;
  }
  return out;
}

} // namespace subell
