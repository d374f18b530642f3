#pragma once

#include "subell/core.hpp"
#include "subell/elliptic.hpp"
#include "subell/geometry.hpp"
#include "subell/sublinear.hpp"
#include "subell/weights.hpp"

#include <string>
#include <vector>

namespace subell {

/// C_{N,p} = (1-p)^2 / (2 (N (1-p) + 2 p)). pre: N >= 1, p in (0,1).
Real cnp(int N, Real p);

struct EigenpairBracket {
  BracketPair bracket;
  Real epsilon = 0.0;
  Real k = 0.0;
  EigenPair eigenpair;
  Vector phi_linear; // solves -Lap phi = m with zero data
  Real phi_linear_max = 0.0;
  Real sub_margin = 0.0, super_margin = 0.0; // verification residuals, <= 0 wanted
};

/// Bracket (eps * phi_eig, k * (phi_lin + 1)) for nonnegative m, with
/// eps = (k1 / (lambda1 |phi|_inf^(1-p)))^(1/(1-p)) and
/// k = (k2 (1 + |phi_lin|_inf)^p)^(1/(1-p)), both verified discretely.
/// pre: m >= 0 and m != 0 on the operator's unknowns.
EigenpairBracket eigenpair_bracket(const DiscreteOperator& op, const WeightField& m,
                               const Nonlinearity& f);

struct PositivePartSuper {
  Vector super;
  Real k = 0.0;
  Vector phi; // solves -Lap phi = m^+
  Real phi_max = 0.0;
  Real margin = 0.0; // supersolution residual against the full sign-changing m
};

/// Supersolution k (phi + 1) with phi driven by m^+ alone; valid for the
/// sign-changing weight since -m^- f <= 0. pre: m^+ != 0.
PositivePartSuper positive_part_supersolution(const DiscreteOperator& op,
                                     const WeightField& m,
                                     const Nonlinearity& f);

struct FluxComparison {
  Index node = -1;
  Real du_dnu = kNaN; // from omega0
  Real dw_dnu = kNaN; // from omega1
  bool pass = false;
};

struct ExistenceOptions {
  Real margin = 0.1; // strict-positivity margin in the definition of M
  IterationOptions iteration;
  Index green_cap = 50000;
};

struct ExistenceCertificate {
  std::string scenario;
  Real r = kInfinity;
  // per-instance constants of the proof chain
  Real c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
  Real margin = 0.1;
  Real M = 0;
  Real m_minus_norm_omega1 = 0;    // |m^-|_{L^r(omega1)}
  Real delta_integral = 0;         // integral of m delta0^{p+1} over omega0
  Real v_bound_coeff = 0;          // (c5 k1 integral)^{1/(1-p)}
  Real v_bound_worst = 0;          // min of v - coeff*delta0 over omega0
  Real w_min_ratio = 0;            // min of w / delta1 over omega1 ("w > 0")
  Real w_flux_max = 0;             // measured max |dw/dnu|, the (deri) quantity
  // fields
  Vector w, theta, psi, v, omega, super, u;
  std::vector<FluxComparison> flux;
  bool flux_pass = false;
  Real sufficient_lhs = 0, sufficient_rhs = 0;
  bool sufficient_pass = false; // reported for comparison; flux test decides
  bool morel_oswald_subsampled = false;
  IterationReport final_report;
  PositivityReport positivity;
  bool certified = false; // flux pass + converged final solve + positivity
};

/// Constructive run of the glued-subsolution existence argument.
/// pre: m >= 0 and m != 0 on the omega0 nodes.
ExistenceCertificate certify_existence(const WeightField& m,
                                       const Nonlinearity& f,
                                       const SubdomainPartition& part,
                                       const ExistenceOptions& opts = {});

/// Barrier (k1 C_{N,p} m_R |x - x0|^2)^{1/(1-p)} on the closed ball, zero
/// elsewhere. pre: m_R > 0, R > 0.
Vector barrier_field(const Grid& grid, const Vector2& x0, Real R, Real m_R,
                     const Nonlinearity& f);

struct BarrierReport {
  bool pass = true;
  Index worst_node = -1;
  Real worst_violation = 0.0;  // max of Lap_h w - k1 m^- w^p beyond the slack
  Real max_abs_residual = 0.0; // max |Lap_h w - k1 m^- w^p| over checked nodes
  Index nodes_checked = 0;
};

/// Checks Lap_h w <= k1 m^- w^p up to the O(h^2) consistency slack on the
/// ball nodes whose full stencil stays inside the ball.
BarrierReport barrier_verify(const Grid& grid, const Vector& w,
                             const WeightField& m, const Nonlinearity& f,
                             const Ball& ball);

enum class Verdict { NoInformation, Certified, TrivialObstruction };

std::string to_string(Verdict v);

struct NonexistenceOptions {
  Index green_cap = 50000;
};

struct NonexistenceCertificate {
  std::string scenario;
  Real r = kInfinity;
  bool has_ball = false;
  ScoredBall best;
  Real c_np = 0;
  GreenNormResult op_norm;
  Real m_plus_norm = 0; // |m^+|_{L^r(domain)}
  Real lhs = 0, rhs = 0;
  Verdict verdict = Verdict::NoInformation;
  Vector barrier;
  BarrierReport barrier_report;
  std::string note;
};

/// Necessary-condition test: nonexistence is certified when
/// C_{N,p}/|(-Lap)^-1| * sup m_R R^2 >= (k2/k1) |m^+|_{L^r}. Ball scores are
/// grid under-approximations of the continuum supremum, so a certified
/// verdict is conservative; a non-certified one is inconclusive.
NonexistenceCertificate certify_nonexistence(const WeightField& m,
                                          const Nonlinearity& f,
                                          const Grid& grid,
                                          const NonexistenceOptions& opts = {});

struct ConvexCriterionReport {
  std::string scenario;
  Real r = kInfinity;
  Real c_np = 0;
  GreenNormResult op_norm;
  Real omega1_measure = 0;     // analytic measure of the convex region
  Real delta_sq_integral = 0;  // integral of m^- delta1^2 over omega1
  Real lhs = 0, rhs = 0;
  Real m_plus_norm_domain = 0; // |m^+|_{L^r(domain)}, compared against rhs
  Real norm_equality_gap = 0;
  Verdict verdict = Verdict::NoInformation;
  bool pointwise_ok = false; // sampled inf over (2/3)delta-balls >= m^-(x1)/3
  Real pointwise_worst = 0;
  Index pointwise_samples = 0;
};

/// Integral criterion for convex nonpositive m on a convex omega1.
/// pre: check_convex_nonpositive passes on omega1.
ConvexCriterionReport certify_nonexistence_convex(const WeightField& m,
                                      const Nonlinearity& f,
                                      const RegionSpec& omega1,
                                      const Grid& grid,
                                      const NonexistenceOptions& opts = {});

/// A scenario must never hold both certificates at once.
bool consistency_alarm(bool existence_certified, bool nonexistence_certified);

} // namespace subell
