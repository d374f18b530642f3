#include "subell/sublinear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace subell {

namespace {

Real field_scale(const Vector& v) { return std::max(Real(1), v.cwiseAbs().maxCoeff()); }

} // namespace

BracketCheck check_bracket(const DiscreteOperator& op, const WeightField& m,
                           const Nonlinearity& f, const BracketPair& bracket,
                           const Vector& boundary_data,
                           const BracketCheckOptions& opts) {
  const Grid& g = op.grid();
  BracketCheck chk;
  const Real order_tol = opts.tol * std::max(field_scale(bracket.sub),
                                             field_scale(bracket.super));
  for (Index i = 0; i < g.n_nodes(); ++i) {
    if (bracket.sub[i] > bracket.super[i] + order_tol)
      chk.ordered = false;
  }
  // boundary compatibility at the Dirichlet closure
  for (Index i = 0; i < g.n_nodes(); ++i) {
    if (op.unknown_of(i) >= 0)
      continue;
    if (bracket.sub[i] > boundary_data[i] + order_tol)
      chk.sub_ok = false;
    if (bracket.super[i] < boundary_data[i] - order_tol)
      chk.super_ok = false;
  }

  std::unordered_set<Index> exempt(opts.sub_exempt_nodes.begin(),
                                   opts.sub_exempt_nodes.end());
  Real rhs_scale = 1.0;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    rhs_scale = std::max(rhs_scale, std::abs(m.values[i] * f.f(bracket.sub[i])));
    rhs_scale = std::max(rhs_scale, std::abs(m.values[i] * f.f(bracket.super[i])));
  }
  const Real resid_tol = opts.tol * rhs_scale * 100.0;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    const Real super_margin =
        m.values[i] * f.f(bracket.super[i]) - op.apply_row(bracket.super, i);
    if (super_margin > chk.worst_super) {
      chk.worst_super = super_margin;
      chk.worst_super_node = i;
    }
    if (super_margin > resid_tol)
      chk.super_ok = false;
    if (exempt.count(i))
      continue;
    const Real sub_margin =
        op.apply_row(bracket.sub, i) - m.values[i] * f.f(bracket.sub[i]);
    if (sub_margin > chk.worst_sub) {
      chk.worst_sub = sub_margin;
      chk.worst_sub_node = i;
    }
    if (sub_margin > resid_tol)
      chk.sub_ok = false;
  }
  return chk;
}

namespace {

struct SweepResult {
  int sweeps = 0;
  bool converged = false;
  Real final_residual = kInfinity;
  Real max_monotonicity_violation = 0.0;
  Real max_sandwich_violation = 0.0;
  std::vector<std::pair<Real, Real>> change_log;
};

// direction +1: nondecreasing from sub; -1: nonincreasing from super
SweepResult run_sweeps(const DiscreteOperator& op, const ShiftedSolver& solver,
                       const Vector& lambda, const WeightField& m,
                       const Nonlinearity& f, const Vector& data,
                       const BracketPair& bracket, int direction, Vector& u,
                       const IterationOptions& opts) {
  const Index n = op.n_unknowns();
  SweepResult out;
  const Vector bc = op.dirichlet_rhs(data);

  Real rhs_scale = 1.0;
  Vector b(n);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    rhs_scale = 1.0;
    for (Index k = 0; k < n; ++k) {
      const Index i = op.unknowns()[static_cast<std::size_t>(k)];
      const Real rhs = m.values[i] * f.f(std::max(u[i], Real(0)));
      b[k] = rhs + lambda[k] * u[i] + bc[k];
      rhs_scale = std::max(rhs_scale, std::abs(rhs));
    }
    Vector x = solver.solve(b);

    Real viol = 0.0;
    for (Index k = 0; k < n; ++k) {
      const Index i = op.unknowns()[static_cast<std::size_t>(k)];
      viol = std::max(viol, direction * (u[i] - x[k]));
    }
    out.max_monotonicity_violation =
        std::max(out.max_monotonicity_violation, viol);
    const Real noise = 1e-14 * field_scale(u);
    if (viol > noise) {
      // half-step damping on the nodes moving against the monotone direction
      for (Index k = 0; k < n; ++k) {
        const Index i = op.unknowns()[static_cast<std::size_t>(k)];
        if (direction * (u[i] - x[k]) > 0)
          x[k] = 0.5 * (x[k] + u[i]);
      }
    }

    Real change_min = 0, change_max = 0, sup_change = 0;
    for (Index k = 0; k < n; ++k) {
      const Index i = op.unknowns()[static_cast<std::size_t>(k)];
      const Real d = x[k] - u[i];
      change_min = std::min(change_min, d);
      change_max = std::max(change_max, d);
      sup_change = std::max(sup_change, std::abs(d));
      u[i] = x[k];
      out.max_sandwich_violation =
          std::max(out.max_sandwich_violation,
                   std::max(u[i] - bracket.super[i], bracket.sub[i] - u[i]));
    }
    out.change_log.emplace_back(change_min, change_max);
    out.sweeps = sweep;

    Real resid = 0;
    for (Index k = 0; k < n; ++k) {
      const Index i = op.unknowns()[static_cast<std::size_t>(k)];
      resid = std::max(resid, std::abs(op.apply_row(u, i) -
                                       m.values[i] * f.f(std::max(u[i], Real(0)))));
    }
    out.final_residual = resid;
    if (sup_change <= opts.change_tol * field_scale(u) &&
        resid <= opts.residual_tol * rhs_scale) {
      out.converged = true;
      break;
    }
  }
  return out;
}

} // namespace

IterationReport monotone_iterate(const DiscreteOperator& op, const WeightField& m,
                                 const Nonlinearity& f,
                                 const BracketPair& bracket,
                                 const Vector& boundary_data,
                                 const IterationOptions& opts) {
  const Grid& g = op.grid();
  if (bracket.sub.size() != g.n_nodes() || bracket.super.size() != g.n_nodes())
    throw std::invalid_argument("bracket fields do not match the grid");

  BracketCheckOptions chk_opts;
  chk_opts.tol = opts.bracket_tol;
  chk_opts.sub_exempt_nodes = opts.sub_exempt_nodes;
  BracketCheck chk = check_bracket(op, m, f, bracket, boundary_data, chk_opts);
  if (!chk.ordered)
    throw std::invalid_argument("bracket violation: sub exceeds super");
  if (!chk.sub_ok)
    throw std::invalid_argument(
        "bracket violation: sub is not a discrete subsolution (worst node " +
        std::to_string(chk.worst_sub_node) + ", margin " +
        std::to_string(chk.worst_sub) + ")");

  // nodal shift from the Lipschitz bound of f on [sub, super]
  const Index n = op.n_unknowns();
  Vector lambda(n);
  bool capped = false;
  for (Index k = 0; k < n; ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    const Real m_minus = std::max(-m.values[i], Real(0));
    Real L = m_minus > 0
                 ? f.lipschitz(std::max(bracket.sub[i], Real(0)),
                               std::max(bracket.super[i], Real(0)))
                 : 0.0;
    Real shift = m_minus * L;
    if (!std::isfinite(shift) || shift > opts.lambda_cap) {
      shift = opts.lambda_cap;
      capped = true;
    }
    lambda[k] = shift;
  }
  ShiftedSolver solver(op, lambda);

  IterationReport rep;
  rep.lambda_capped = capped;
  rep.super_verified = chk.super_ok;
  rep.worst_sub_residual = chk.worst_sub;

  Vector u = boundary_data;
  for (Index k = 0; k < n; ++k)
    u[op.unknowns()[static_cast<std::size_t>(k)]] =
        bracket.sub[op.unknowns()[static_cast<std::size_t>(k)]];
  SweepResult sub_run =
      run_sweeps(op, solver, lambda, m, f, boundary_data, bracket, +1, u, opts);
  rep.solution = u;
  rep.sweeps = sub_run.sweeps;
  rep.final_residual = sub_run.final_residual;
  rep.converged = sub_run.converged;
  rep.max_monotonicity_violation = sub_run.max_monotonicity_violation;
  rep.max_sandwich_violation = sub_run.max_sandwich_violation;
  rep.sweep_change = sub_run.change_log;

  if (opts.run_super_side && chk.super_ok) {
    Vector v = boundary_data;
    for (Index k = 0; k < n; ++k)
      v[op.unknowns()[static_cast<std::size_t>(k)]] =
          bracket.super[op.unknowns()[static_cast<std::size_t>(k)]];
    SweepResult super_run =
        run_sweeps(op, solver, lambda, m, f, boundary_data, bracket, -1, v, opts);
    rep.super_limit = v;
    rep.super_converged = super_run.converged;
  }
  return rep;
}

WProblemResult solve_w_problem(const WeightField& m_minus,
                               const Nonlinearity& f, Real M,
                               const SubdomainPartition& part,
                               const IterationOptions& opts) {
  if (M < 0)
    throw std::invalid_argument("interface value M must be nonnegative");
  if (m_minus.values.minCoeff() < 0)
    throw std::invalid_argument("m_minus must be nonnegative");
  const Grid& g = *part.grid;

  WProblemResult out;
  out.M = M;
  out.theta = mixed_solve(part, Vector::Zero(g.n_nodes()), 0.0, 1.0);
  out.psi = mixed_solve(part, m_minus.values, 0.0, 0.0);

  out.sub = (M * out.theta - f.k2 * std::pow(M, f.p) * out.psi).cwiseMax(0.0);
  BracketPair bracket;
  bracket.sub = out.sub;
  bracket.super = Vector::Constant(g.n_nodes(), M);

  Vector data = Vector::Zero(g.n_nodes());
  for (const auto& fn : part.interface_nodes)
    data[fn.node] = M;

  WeightField rhs_weight = m_minus;
  rhs_weight.values = -m_minus.values;
  rhs_weight.provenance = "-" + m_minus.provenance;

  DiscreteOperator op = make_operator(g, part.omega1_nodes);
  out.report = monotone_iterate(op, rhs_weight, f, bracket, data, opts);
  if (!out.report.converged)
    throw std::runtime_error("w-problem iteration did not converge within " +
                             std::to_string(opts.max_sweeps) + " sweeps");
  out.w = out.report.solution;

  const Real tol = 1e-9 * std::max(Real(1), M);
  for (Index i : part.omega1_nodes) {
    if (out.w[i] < -tol || out.w[i] > M + tol)
      throw std::runtime_error("w-problem solution left the bracket [0, M]");
  }
  return out;
}

Real residual_norm(const DiscreteOperator& op, const Vector& u,
                   const WeightField& m, const Nonlinearity& f) {
  Real resid = 0;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    resid = std::max(resid, std::abs(op.apply_row(u, i) -
                                     m.values[i] * f.f(std::max(u[i], Real(0)))));
  }
  return resid;
}

PositivityReport positivity_certificate(const Vector& u, const Vector& delta,
                                        const std::vector<Index>& nodes) {
  PositivityReport rep;
  if (nodes.empty())
    return rep;
  rep.min_u = kInfinity;
  rep.min_ratio = kInfinity;
  for (Index i : nodes) {
    rep.min_u = std::min(rep.min_u, u[i]);
    if (delta[i] > 0)
      rep.min_ratio = std::min(rep.min_ratio, u[i] / delta[i]);
  }
  rep.pass = rep.min_u > 0 && rep.min_ratio > 0;
  return rep;
}

} // namespace subell
