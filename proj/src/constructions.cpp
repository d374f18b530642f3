#include "subell/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subell {

Real cnp(int N, Real p) {
  if (N < 1)
    throw std::invalid_argument("dimension N must be at least 1");
  if (!(p > 0 && p < 1))
    throw std::invalid_argument("p must lie in (0,1)");
  const Real q = 1.0 - p;
  return q * q / (2.0 * (N * q + 2.0 * p));
}

namespace {

Real verification_scale(const DiscreteOperator& op, const WeightField& m,
                        const Nonlinearity& f, const Vector& field) {
  Real s = 1.0;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    s = std::max(s, std::abs(m.values[i] * f.f(std::max(field[i], Real(0)))));
  }
  return s;
}

void require_nonnegative_weight(const DiscreteOperator& op, const WeightField& m) {
  const Real tol = 1e-12 * std::max(Real(1), m.values.cwiseAbs().maxCoeff());
  Real m_max = -kInfinity;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    if (m.values[i] < -tol)
      throw std::invalid_argument("weight must satisfy m >= 0 on the region");
    m_max = std::max(m_max, m.values[i]);
  }
  if (!(m_max > 0))
    throw std::invalid_argument("weight must not vanish identically on the region");
}

} // namespace

EigenpairBracket eigenpair_bracket(const DiscreteOperator& op, const WeightField& m,
                               const Nonlinearity& f) {
  require_nonnegative_weight(op, m);
  const Grid& g = op.grid();

  EigenpairBracket out;
  out.eigenpair = principal_eigenpair(op, m);
  const Real phi_max = out.eigenpair.phi.maxCoeff(); // = 1 by normalization
  out.epsilon = std::pow(
      f.k1 / (out.eigenpair.lambda * std::pow(phi_max, 1.0 - f.p)),
      1.0 / (1.0 - f.p));

  out.phi_linear = solve_dirichlet(op, m.values, Vector::Zero(g.n_nodes()));
  out.phi_linear_max = out.phi_linear.maxCoeff();
  out.k = std::pow(f.k2 * std::pow(1.0 + out.phi_linear_max, f.p),
                   1.0 / (1.0 - f.p));

  out.bracket.sub = out.epsilon * out.eigenpair.phi;
  out.bracket.super = out.k * (out.phi_linear.array() + 1.0).matrix();

  const Real tol = 1e-8;
  const Real scale = verification_scale(op, m, f, out.bracket.super);
  Index worst_sub = -1, worst_super = -1;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    const Real sm =
        op.apply_row(out.bracket.sub, i) - m.values[i] * f.f(out.bracket.sub[i]);
    if (sm > out.sub_margin) {
      out.sub_margin = sm;
      worst_sub = i;
    }
    const Real pm = m.values[i] * f.f(out.bracket.super[i]) -
                    op.apply_row(out.bracket.super, i);
    if (pm > out.super_margin) {
      out.super_margin = pm;
      worst_super = i;
    }
  }
  if (out.sub_margin > tol * scale)
    throw std::runtime_error(
        "lemma22 subsolution verification failed at node " +
        std::to_string(worst_sub) + " (margin " + std::to_string(out.sub_margin) + ")");
  if (out.super_margin > tol * scale)
    throw std::runtime_error(
        "lemma22 supersolution verification failed at node " +
        std::to_string(worst_super) + " (margin " + std::to_string(out.super_margin) + ")");
  return out;
}

PositivePartSuper positive_part_supersolution(const DiscreteOperator& op,
                                     const WeightField& m,
                                     const Nonlinearity& f) {
  const Grid& g = op.grid();
  auto [m_plus, m_minus] = split_pm(m);
  Real plus_max = 0;
  for (Index k = 0; k < op.n_unknowns(); ++k)
    plus_max = std::max(plus_max,
                        m_plus.values[op.unknowns()[static_cast<std::size_t>(k)]]);
  if (!(plus_max > 0))
    throw std::invalid_argument("remark23 needs m^+ != 0");

  PositivePartSuper out;
  out.phi = solve_dirichlet(op, m_plus.values, Vector::Zero(g.n_nodes()));
  out.phi_max = out.phi.maxCoeff();
  out.k = std::pow(f.k2 * std::pow(1.0 + out.phi_max, f.p), 1.0 / (1.0 - f.p));
  out.super = out.k * (out.phi.array() + 1.0).matrix();

  const Real scale = verification_scale(op, m, f, out.super);
  Index worst = -1;
  for (Index k = 0; k < op.n_unknowns(); ++k) {
    const Index i = op.unknowns()[static_cast<std::size_t>(k)];
    const Real pm = m.values[i] * f.f(out.super[i]) - op.apply_row(out.super, i);
    if (pm > out.margin) {
      out.margin = pm;
      worst = i;
    }
  }
  if (out.margin > 1e-8 * scale)
    throw std::runtime_error("remark23 supersolution verification failed at node " +
                             std::to_string(worst));
  return out;
}

ExistenceCertificate certify_existence(const WeightField& m,
                                       const Nonlinearity& f,
                                       const SubdomainPartition& part,
                                       const ExistenceOptions& opts) {
  const Grid& g = *part.grid;
  ExistenceCertificate cert;
  cert.r = m.r;
  cert.margin = opts.margin;

  {
    // "0 != m >= 0 in omega0"
    const Real tol = 1e-12 * std::max(Real(1), m.values.cwiseAbs().maxCoeff());
    Real m_max = -kInfinity;
    for (Index i : part.omega0_nodes) {
      if (m.values[i] < -tol)
        throw std::invalid_argument("theorem31 needs m >= 0 on omega0");
      m_max = std::max(m_max, m.values[i]);
    }
    if (!(m_max > 0))
      throw std::invalid_argument("theorem31 needs m != 0 on omega0");
  }

  auto [m_plus, m_minus] = split_pm(m);

  // step 1: theta, psi and the per-instance constants c1, c2 on omega1
  cert.theta = mixed_solve(part, Vector::Zero(g.n_nodes()), 0.0, 1.0);
  cert.psi = mixed_solve(part, m_minus.values, 0.0, 0.0);
  cert.m_minus_norm_omega1 =
      lr_norm(g, m_minus.values, part.omega1_region, m.r);

  cert.c2 = kInfinity;
  for (Index i : part.omega1_nodes) {
    if (part.delta1[i] <= 0)
      continue;
    cert.c2 = std::min(cert.c2, cert.theta[i] / part.delta1[i]);
    if (cert.m_minus_norm_omega1 > 0)
      cert.c1 = std::max(cert.c1, std::abs(cert.psi[i]) /
                                      (part.delta1[i] * cert.m_minus_norm_omega1));
  }

  // step 2: M realizing "then w > 0 in omega1"
  const Real big_c = (cert.c1 / cert.c2) * (1.0 + opts.margin);
  cert.M = std::pow(big_c * f.k2 * cert.m_minus_norm_omega1, 1.0 / (1.0 - f.p));

  // step 3: the w problem and the measured flux bound of (deri)
  WProblemResult wres = solve_w_problem(m_minus, f, cert.M, part, opts.iteration);
  cert.w = wres.w;
  cert.w_min_ratio = kInfinity;
  for (Index i : part.omega1_nodes)
    if (part.delta1[i] > 0)
      cert.w_min_ratio = std::min(cert.w_min_ratio, cert.w[i] / part.delta1[i]);

  Vector dw_dnu = normal_derivative(cert.w, part, InterfaceSide::FromOmega1);
  for (Index k = 0; k < dw_dnu.size(); ++k)
    if (std::isfinite(dw_dnu[k]))
      cert.w_flux_max = std::max(cert.w_flux_max, std::abs(dw_dnu[k]));

  // step 4: v on omega0 via the lemma22 bracket, c5 and the lower bound
  DiscreteOperator op0 = make_operator(g, part.omega0_nodes);
  EigenpairBracket l22 = eigenpair_bracket(op0, m, f);
  IterationReport v_rep = monotone_iterate(op0, m, f, l22.bracket,
                                           Vector::Zero(g.n_nodes()), opts.iteration);
  if (!v_rep.converged)
    throw std::runtime_error("theorem31: v iteration did not converge");
  cert.v = v_rep.solution;

  Vector vol0 = Vector::Zero(g.n_nodes());
  for (std::size_t k = 0; k < part.omega0_region.nodes.size(); ++k)
    vol0[part.omega0_region.nodes[k]] =
        part.omega0_region.weights[static_cast<Index>(k)];
  MorelOswaldResult mo =
      morel_oswald_constant(op0, part.delta0, vol0, opts.green_cap);
  cert.c5 = mo.c;
  cert.morel_oswald_subsampled = mo.subsampled;
  cert.delta_integral = weighted_delta_integral(m.values, part.delta0, 1.0 + f.p,
                                                part.omega0_region);
  cert.v_bound_coeff =
      std::pow(cert.c5 * f.k1 * cert.delta_integral, 1.0 / (1.0 - f.p));
  cert.v_bound_worst = kInfinity;
  for (Index i : part.omega0_nodes)
    cert.v_bound_worst = std::min(
        cert.v_bound_worst, cert.v[i] - cert.v_bound_coeff * part.delta0[i]);

  // step 5: glue omega = (M + v on closure(omega0), w outside)
  cert.omega = cert.w;
  for (Index i : part.omega0_nodes)
    cert.omega[i] = cert.M + cert.v[i];
  for (const auto& fn : part.interface_nodes)
    cert.omega[fn.node] = cert.M;

  // step 6: flux comparison per interface node
  Vector du_dnu = normal_derivative(cert.omega, part, InterfaceSide::FromOmega0);
  const Real flux_tol = 1e-12 * std::max(Real(1), cert.w_flux_max);
  cert.flux_pass = true;
  for (std::size_t k = 0; k < part.interface_nodes.size(); ++k) {
    const auto& fn = part.interface_nodes[k];
    if (fn.corner)
      continue;
    FluxComparison fc;
    fc.node = fn.node;
    fc.du_dnu = du_dnu[static_cast<Index>(k)];
    fc.dw_dnu = dw_dnu[static_cast<Index>(k)];
    fc.pass = fc.du_dnu <= fc.dw_dnu + flux_tol;
    cert.flux_pass = cert.flux_pass && fc.pass;
    cert.flux.push_back(fc);
  }

  // headline sufficient inequality with per-instance constants: the (deri)
  // bound (c3, c4) is instantiated from the measured flux maximum
  cert.c4 = std::max(Real(1), big_c);
  const Real beta = 1.0 / (1.0 - f.p);
  const Real base = cert.c4 * f.k2 * cert.m_minus_norm_omega1;
  cert.c3 = base > 0 ? cert.w_flux_max / std::pow(base, beta) : 0.0;
  cert.sufficient_lhs = std::pow(cert.c3, 1.0 - f.p) * base;
  cert.sufficient_rhs = cert.c5 * f.k1 * cert.delta_integral;
  cert.sufficient_pass = cert.sufficient_lhs <= cert.sufficient_rhs;

  if (!cert.flux_pass)
    return cert; // no subsolution glue; certificate records the failure

  // step 7: full solve between the glued subsolution and the remark23 super
  DiscreteOperator op_full = make_operator(g);
  PositivePartSuper super = positive_part_supersolution(op_full, m, f);
  cert.super = super.super;
  int doublings = 0;
  while ((cert.omega - cert.super).maxCoeff() > 0) {
    if (++doublings > 60)
      throw std::runtime_error("theorem31: glued subsolution exceeds every "
                               "rescaled supersolution");
    super.k *= 2;
    cert.super = super.k * (super.phi.array() + 1.0).matrix();
  }

  IterationOptions final_opts = opts.iteration;
  final_opts.sub_exempt_nodes = part.interface_node_ids();
  BracketPair final_bracket{cert.omega, cert.super};
  cert.final_report = monotone_iterate(op_full, m, f, final_bracket,
                                       Vector::Zero(g.n_nodes()), final_opts);
  if (!cert.final_report.converged)
    throw std::runtime_error("theorem31: final iteration did not converge");
  cert.u = cert.final_report.solution;
  cert.positivity = positivity_certificate(cert.u, g.delta, g.interior);
  cert.certified = cert.flux_pass && cert.final_report.converged &&
                   cert.positivity.pass;
  return cert;
}

Vector barrier_field(const Grid& grid, const Vector2& x0, Real R, Real m_R,
                     const Nonlinearity& f) {
  if (!(m_R > 0) || !(R > 0))
    throw std::invalid_argument("barrier needs m_R > 0 and R > 0");
  const Real beta = 1.0 / (1.0 - f.p);
  const Real coeff = f.k1 * cnp(grid.dim(), f.p) * m_R;
  Vector w = Vector::Zero(grid.n_nodes());
  const Real tol = 1e-9 * grid.h;
  for (Index i = 0; i < grid.n_nodes(); ++i) {
    const Real rho2 = (grid.point(i) - x0).squaredNorm();
    if (rho2 <= (R + tol) * (R + tol))
      w[i] = std::pow(coeff * rho2, beta);
  }
  return w;
}

BarrierReport barrier_verify(const Grid& grid, const Vector& w,
                             const WeightField& m, const Nonlinearity& f,
                             const Ball& ball) {
  const Real tol = 1e-9 * grid.h;
  const Real m_scale = std::max(Real(1), m.values.cwiseAbs().maxCoeff());
  Real m_R = kInfinity;
  for (Index i = 0; i < grid.n_nodes(); ++i) {
    const Real rho = (grid.point(i) - ball.center).norm();
    if (rho > ball.radius + tol)
      continue;
    if (m.values[i] > 1e-12 * m_scale)
      throw std::invalid_argument("barrier_verify needs m <= 0 on the ball");
    m_R = std::min(m_R, std::max(-m.values[i], Real(0)));
  }

  const Real beta = 1.0 / (1.0 - f.p);
  const Real coeff = f.k1 * cnp(grid.dim(), f.p) * std::max(m_R, Real(1e-300));
  BarrierReport rep;
  for (Index i = 0; i < grid.n_nodes(); ++i) {
    if (grid.node_kind[static_cast<std::size_t>(i)] != NodeKind::Interior)
      continue;
    const Real rho = (grid.point(i) - ball.center).norm();
    if (rho > ball.radius - grid.h + tol)
      continue; // the full uniform stencil must stay inside the closed ball
    Real lap = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const Index np = grid.step(i, axis, +1);
      const Index nm = grid.step(i, axis, -1);
      if (np < 0 || nm < 0)
        throw std::logic_error("barrier stencil left the grid");
      lap += (w[np] + w[nm] - 2.0 * w[i]) / (grid.h * grid.h);
    }
    const Real m_minus = std::max(-m.values[i], Real(0));
    const Real rhs = f.k1 * m_minus * std::pow(w[i], f.p);
    const Real resid = lap - rhs;
    ++rep.nodes_checked;
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(resid));
    // pointwise consistency slack ~ h^2 * |4th derivative of rho^(2 beta)|
    const Real slack = 10.0 * std::pow(coeff, beta) * std::pow(2.0 * beta, 4) *
                       grid.h * grid.h *
                       std::pow(std::max(rho, grid.h), 2.0 * beta - 4.0);
    if (resid > slack && resid - slack > rep.worst_violation) {
      rep.worst_violation = resid - slack;
      rep.worst_node = i;
      rep.pass = false;
    }
  }
  return rep;
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::NoInformation: return "no information";
  case Verdict::Certified: return "nonexistence certified";
  case Verdict::TrivialObstruction:
    return "trivial obstruction (m^+ = 0, maximum principle)";
  }
  return "";
}

NonexistenceCertificate certify_nonexistence(const WeightField& m,
                                          const Nonlinearity& f,
                                          const Grid& grid,
                                          const NonexistenceOptions& opts) {
  NonexistenceCertificate cert;
  cert.r = m.r;
  cert.c_np = cnp(grid.dim(), f.p);

  auto [m_plus, m_minus] = split_pm(m);
  const Region full = whole_domain_region(grid);
  DiscreteOperator op = make_operator(grid);
  cert.op_norm = green_operator_norm(op, m.r, opts.green_cap);
  cert.m_plus_norm = lr_norm(grid, m_plus.values, full, m.r);
  cert.rhs = (f.k2 / f.k1) * cert.m_plus_norm;

  std::vector<ScoredBall> balls = enumerate_nonpositive_balls(grid, m.values);
  if (!balls.empty()) {
    cert.has_ball = true;
    cert.best = balls.front();
    cert.lhs = cert.c_np / cert.op_norm.value * cert.best.score;
    if (cert.best.weight_inf > 0) {
      cert.barrier = barrier_field(grid, cert.best.ball.center,
                                   cert.best.ball.radius, cert.best.weight_inf, f);
      cert.barrier_report = barrier_verify(grid, cert.barrier, m, f, cert.best.ball);
    }
  }

  Real plus_max = 0;
  for (Index i : grid.interior)
    plus_max = std::max(plus_max, m_plus.values[i]);
  if (!(plus_max > 0)) {
    cert.verdict = Verdict::TrivialObstruction;
    cert.note = "m^+ vanishes: no positive solution by the maximum principle; "
                "the ball criterion is not consulted";
    return cert;
  }

  cert.verdict = cert.has_ball && cert.lhs >= cert.rhs ? Verdict::Certified
                                                       : Verdict::NoInformation;
  cert.note = "ball scores are grid under-approximations of the continuum "
              "supremum: a certified verdict is conservative evidence against "
              "continuous solutions, a non-certified one is inconclusive";
  return cert;
}

ConvexCriterionReport certify_nonexistence_convex(const WeightField& m,
                                      const Nonlinearity& f,
                                      const RegionSpec& omega1,
                                      const Grid& grid,
                                      const NonexistenceOptions& opts) {
  ConvexityReport convexity = check_convex_nonpositive(m, omega1);
  if (!convexity.pass)
    throw std::invalid_argument("corollary33 needs m convex and <= 0 on omega1: " +
                                convexity.message);

  ConvexCriterionReport rep;
  rep.r = m.r;
  rep.c_np = cnp(grid.dim(), f.p);
  auto [m_plus, m_minus] = split_pm(m);

  Region region1 = make_region(grid, omega1, false, "omega1");
  Region complement = make_region(grid, omega1, true, "domain minus omega1");
  Vector delta1 = Vector::Zero(grid.n_nodes());
  for (Index i : region1.nodes)
    delta1[i] = std::max(omega1.boundary_distance(grid.point(i)), Real(0));

  rep.omega1_measure = omega1.measure();
  rep.delta_sq_integral =
      weighted_delta_integral(m_minus.values, delta1, 2.0, region1);

  DiscreteOperator op = make_operator(grid);
  rep.op_norm = green_operator_norm(op, m.r, opts.green_cap);
  rep.lhs = 4.0 * rep.c_np /
            (27.0 * rep.omega1_measure * rep.op_norm.value) *
            rep.delta_sq_integral;
  rep.rhs = (f.k2 / f.k1) * lr_norm(grid, m_plus.values, complement, m.r);
  rep.m_plus_norm_domain =
      lr_norm(grid, m_plus.values, whole_domain_region(grid), m.r);
  rep.norm_equality_gap = std::abs(rep.m_plus_norm_domain - rep.rhs * f.k1 / f.k2);
  rep.verdict = rep.lhs >= rep.rhs ? Verdict::Certified : Verdict::NoInformation;

  // sampled pointwise ingredient: inf over B_{(2/3)delta}(x1) of m^- >= m^-(x1)/3
  rep.pointwise_ok = true;
  std::vector<Index> inside;
  for (Index i : region1.nodes)
    if (delta1[i] > 0)
      inside.push_back(i);
  const std::size_t stride = std::max<std::size_t>(1, inside.size() / 50);
  const Real tol = 1e-12 * std::max(Real(1), m.values.cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < inside.size(); k += stride) {
    const Index x1 = inside[k];
    const Real r1 = (2.0 / 3.0) * delta1[x1];
    Real inf_minus = kInfinity;
    for (Index j : region1.nodes) {
      if ((grid.point(j) - grid.point(x1)).norm() <= r1 + 1e-12 * grid.h)
        inf_minus = std::min(inf_minus, m_minus.values[j]);
    }
    ++rep.pointwise_samples;
    const Real margin = inf_minus - m_minus.values[x1] / 3.0;
    rep.pointwise_worst = std::min(rep.pointwise_worst, margin);
    if (margin < -tol)
      rep.pointwise_ok = false;
  }
  return rep;
}

bool consistency_alarm(bool existence_certified, bool nonexistence_certified) {
  return existence_certified && nonexistence_certified;
}

} // namespace subell
