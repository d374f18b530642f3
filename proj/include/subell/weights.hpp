#pragma once

#include "subell/core.hpp"
#include "subell/expression.hpp"
#include "subell/geometry.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace subell {

enum class SamplingMode { Nodal, CellAverage };

struct WeightPiece {
  RegionSpec region;
  Expression expr;
};

/// Nodal weight m with its integrability exponent r (> N, or infinity).
struct WeightField {
  const Grid* grid = nullptr;
  Vector values;
  Real r = kInfinity;
  SamplingMode sampling = SamplingMode::Nodal;
  std::string provenance;
};

/// Piecewise-analytic weight. Every node must be claimed by some piece
/// (first declared piece wins on overlaps); cell-average mode integrates the
/// claiming piece's expression over the node cell with 3^dim Gauss points.
WeightField make_weight(const Grid& grid, const std::vector<WeightPiece>& pieces,
                        Real r, SamplingMode mode = SamplingMode::Nodal);
WeightField make_weight(const Grid& grid, Vector values, Real r,
                        std::string provenance = "nodal data");

/// m = m_plus - m_minus with both parts nonnegative and disjoint supports.
std::pair<WeightField, WeightField> split_pm(const WeightField& m);

/// (sum |v|^r vol)^(1/r) over the region, max over the region for r = inf.
/// pre: r in (N, inf]. An empty region yields 0 and sets *empty_warning.
Real lr_norm(const Grid& grid, const Vector& values, const Region& region, Real r,
             bool* empty_warning = nullptr);

/// sum of m * delta^q * vol over the region. pre: q >= 0.
Real weighted_delta_integral(const Vector& m_values, const Vector& delta, Real q,
                             const Region& region);

/// Nonlinearity of class H1: nondecreasing f with k1 xi^p <= f(xi) <= k2 xi^p.
/// lipschitz(lo, hi) bounds f' on [lo, hi] (may be infinite at lo = 0).
struct Nonlinearity {
  Real p = 0.5;
  Real k1 = 1.0;
  Real k2 = 1.0;
  std::function<Real(Real)> f;
  std::function<Real(Real, Real)> lipschitz;
  std::string name;
};

/// f(xi) = kappa * xi^p
Nonlinearity pure_power(Real kappa, Real p);
/// f(xi) = xi^p + min(xi, xi^p), envelope constants k1 = 1, k2 = 2
Nonlinearity power_plus_min(Real p);

struct NonlinearityValidation {
  bool pass = true;
  std::string message;   // empty when pass
  Real violation_xi = kNaN;
  int samples = 0;
  Real xi_min = 0, xi_max = 0; // sampled lattice bounds
};

/// Samples a log-spaced lattice on [1e-8, 1e8] plus xi = 0 and checks f(0) = 0,
/// monotonicity and the H1 envelope. pre: samples >= 100.
NonlinearityValidation validate_nonlinearity(const Nonlinearity& f, int samples);

struct ConvexityReport {
  bool pass = true;
  bool sign_ok = true;
  bool convex_ok = true;
  std::string message;
  Index worst_node = -1;
  Real worst_margin = 0.0;
};

/// Checks m <= 0 on the nodes of a convex region together with discrete
/// midpoint convexity on axis-aligned and sampled node pairs.
ConvexityReport check_convex_nonpositive(const WeightField& m,
                                         const RegionSpec& convex_region,
                                         int sample_pairs = 200,
                                         unsigned seed = 20240901u);

} // namespace subell
