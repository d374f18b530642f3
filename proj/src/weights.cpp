#include "subell/weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace subell {

namespace {

// 3-point Gauss-Legendre abscissae/weights on [-1/2, 1/2]
constexpr Real kGaussX[3] = {-0.3872983346207417, 0.0, 0.3872983346207417};
constexpr Real kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

Real cell_average(const Expression& e, const Grid& g, const Vector2& p) {
  const Real h = g.h;
  if (g.dim() == 1) {
    Real acc = 0;
    for (int i = 0; i < 3; ++i)
      acc += kGaussW[i] * e(p.x() + kGaussX[i] * h);
    return acc;
  }
  Real acc = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      acc += kGaussW[i] * kGaussW[j] *
             e(p.x() + kGaussX[i] * h, p.y() + kGaussX[j] * h);
  return acc;
}

void require_exponent(const Grid& g, Real r) {
  if (!(r > g.dim()))
    throw std::invalid_argument("integrability exponent must satisfy r > N");
}

} // namespace

WeightField make_weight(const Grid& grid, const std::vector<WeightPiece>& pieces,
                        Real r, SamplingMode mode) {
  require_exponent(grid, r);
  if (pieces.empty())
    throw std::invalid_argument("weight needs at least one piece");
  WeightField w;
  w.grid = &grid;
  w.r = r;
  w.sampling = mode;
  w.values.resize(grid.n_nodes());
  const Real tol = 1e-9 * grid.h;
  for (Index i = 0; i < grid.n_nodes(); ++i) {
    const Vector2 p = grid.point(i);
    const WeightPiece* claimed = nullptr;
    for (const auto& piece : pieces) {
      if (piece.region.contains(p, tol)) {
        claimed = &piece;
        break;
      }
    }
    if (!claimed)
      throw std::invalid_argument("weight pieces do not cover the node at (" +
                                  std::to_string(p.x()) + ", " +
                                  std::to_string(p.y()) + ")");
    w.values[i] = mode == SamplingMode::Nodal ? claimed->expr(p.x(), p.y())
                                              : cell_average(claimed->expr, grid, p);
    if (!std::isfinite(w.values[i]))
      throw std::invalid_argument("weight evaluates to a non-finite value at (" +
                                  std::to_string(p.x()) + ", " +
                                  std::to_string(p.y()) + ")");
  }
  w.provenance = "piecewise (" + std::to_string(pieces.size()) + " pieces, " +
                 (mode == SamplingMode::Nodal ? "nodal" : "cell-average") + ")";
  return w;
}

WeightField make_weight(const Grid& grid, Vector values, Real r,
                        std::string provenance) {
  require_exponent(grid, r);
  if (values.size() != grid.n_nodes())
    throw std::invalid_argument("weight values do not match the grid");
  if (!values.allFinite())
    throw std::invalid_argument("weight values must be finite");
  WeightField w;
  w.grid = &grid;
  w.values = std::move(values);
  w.r = r;
  w.provenance = std::move(provenance);
  return w;
}

std::pair<WeightField, WeightField> split_pm(const WeightField& m) {
  WeightField plus = m, minus = m;
  plus.values = m.values.cwiseMax(0.0);
  minus.values = (-m.values).cwiseMax(0.0);
  plus.provenance = m.provenance + " (positive part)";
  minus.provenance = m.provenance + " (negative part)";
  return {plus, minus};
}

Real lr_norm(const Grid& grid, const Vector& values, const Region& region, Real r,
             bool* empty_warning) {
  require_exponent(grid, r);
  if (empty_warning)
    *empty_warning = region.nodes.empty();
  if (region.nodes.empty())
    return 0.0;
  if (std::isinf(r)) {
    Real m = 0;
    for (Index i : region.nodes)
      m = std::max(m, std::abs(values[i]));
    return m;
  }
  Real acc = 0;
  for (std::size_t k = 0; k < region.nodes.size(); ++k)
    acc += std::pow(std::abs(values[region.nodes[k]]), r) *
           region.weights[static_cast<Index>(k)];
  return std::pow(acc, 1.0 / r);
}

Real weighted_delta_integral(const Vector& m_values, const Vector& delta, Real q,
                             const Region& region) {
  if (q < 0)
    throw std::invalid_argument("delta exponent q must be nonnegative");
  Real acc = 0;
  for (std::size_t k = 0; k < region.nodes.size(); ++k) {
    const Index i = region.nodes[k];
    acc += m_values[i] * std::pow(delta[i], q) *
           region.weights[static_cast<Index>(k)];
  }
  return acc;
}

Nonlinearity pure_power(Real kappa, Real p) {
  if (!(p > 0 && p < 1))
    throw std::invalid_argument("p must lie in (0,1)");
  if (!(kappa > 0))
    throw std::invalid_argument("kappa must be positive");
  Nonlinearity n;
  n.p = p;
  n.k1 = n.k2 = kappa;
  n.f = [kappa, p](Real xi) { return kappa * std::pow(xi, p); };
  n.lipschitz = [kappa, p](Real lo, Real /*hi*/) {
    return lo > 0 ? kappa * p * std::pow(lo, p - 1.0) : kInfinity;
  };
  n.name = "power";
  return n;
}

Nonlinearity power_plus_min(Real p) {
  if (!(p > 0 && p < 1))
    throw std::invalid_argument("p must lie in (0,1)");
  Nonlinearity n;
  n.p = p;
  n.k1 = 1.0;
  n.k2 = 2.0;
  n.f = [p](Real xi) {
    const Real xp = std::pow(xi, p);
    return xp + std::min(xi, xp);
  };
  // d/dxi of the min term never exceeds 1 for p < 1
  n.lipschitz = [p](Real lo, Real /*hi*/) {
    return lo > 0 ? p * std::pow(lo, p - 1.0) + 1.0 : kInfinity;
  };
  n.name = "power-plus-min";
  return n;
}

NonlinearityValidation validate_nonlinearity(const Nonlinearity& f, int samples) {
  if (samples < 100)
    throw std::invalid_argument("H1 validation needs at least 100 samples");
  NonlinearityValidation rep;
  rep.samples = samples;
  rep.xi_min = 1e-8;
  rep.xi_max = 1e8;

  const Real f0 = f.f(0.0);
  if (!(std::abs(f0) <= 1e-14)) {
    rep.pass = false;
    rep.violation_xi = 0.0;
    rep.message = "f(0) != 0";
    return rep;
  }

  Real prev_xi = 0.0, prev_f = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Real t = static_cast<Real>(s) / (samples - 1);
    const Real xi = rep.xi_min * std::pow(rep.xi_max / rep.xi_min, t);
    const Real v = f.f(xi);
    const Real env = std::pow(xi, f.p);
    const Real slack = 1e-12 * f.k2 * env + 1e-300;
    if (!std::isfinite(v)) {
      rep.pass = false;
      rep.violation_xi = xi;
      rep.message = "f is not finite";
      return rep;
    }
    if (v < prev_f - slack) {
      rep.pass = false;
      rep.violation_xi = xi;
      rep.message = "f is decreasing between xi = " + std::to_string(prev_xi) +
                    " and xi = " + std::to_string(xi);
      return rep;
    }
    if (v < f.k1 * env - slack) {
      rep.pass = false;
      rep.violation_xi = xi;
      rep.message = "f falls below k1 * xi^p at xi = " + std::to_string(xi);
      return rep;
    }
    if (v > f.k2 * env + slack) {
      rep.pass = false;
      rep.violation_xi = xi;
      rep.message = "f exceeds k2 * xi^p at xi = " + std::to_string(xi);
      return rep;
    }
    prev_xi = xi;
    prev_f = v;
  }
  return rep;
}

ConvexityReport check_convex_nonpositive(const WeightField& m,
                                         const RegionSpec& convex_region,
                                         int sample_pairs, unsigned seed) {
  const Grid& g = *m.grid;
  const Real tol = 1e-9 * g.h;
  std::vector<Index> nodes;
  for (Index i = 0; i < g.n_nodes(); ++i)
    if (convex_region.contains(g.point(i), tol))
      nodes.push_back(i);

  ConvexityReport rep;
  if (nodes.empty()) {
    rep.pass = rep.sign_ok = rep.convex_ok = false;
    rep.message = "region contains no nodes";
    return rep;
  }

  const Real scale = std::max(Real(1), m.values.cwiseAbs().maxCoeff());
  const Real sign_tol = 1e-12 * scale;
  for (Index i : nodes) {
    if (m.values[i] > sign_tol) {
      rep.sign_ok = false;
      if (m.values[i] > rep.worst_margin) {
        rep.worst_margin = m.values[i];
        rep.worst_node = i;
      }
    }
  }
  if (!rep.sign_ok)
    rep.message = "m > 0 inside the region";

  auto check_triple = [&](Index a, Index mid, Index b) {
    const Real lhs = m.values[mid];
    const Real rhs = 0.5 * (m.values[a] + m.values[b]);
    if (lhs > rhs + 1e-10 * scale) {
      rep.convex_ok = false;
      if (lhs - rhs > rep.worst_margin) {
        rep.worst_margin = lhs - rhs;
        rep.worst_node = mid;
      }
    }
  };

  auto in_region = [&](Index n) {
    return n >= 0 && convex_region.contains(g.point(n), tol);
  };

  // axis-aligned triples at stride 1 and 2
  for (Index i : nodes) {
    if (g.lattice_ix[static_cast<std::size_t>(i)][0] < 0)
      continue;
    for (int axis = 0; axis < g.dim(); ++axis) {
      for (int k : {1, 2}) {
        Index a = g.step(i, axis, -k);
        Index b = g.step(i, axis, +k);
        if (in_region(a) && in_region(b))
          check_triple(a, i, b);
      }
    }
  }

  // random lattice pairs with a lattice midpoint
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (int s = 0; s < sample_pairs; ++s) {
    Index a = nodes[pick(rng)];
    Index b = nodes[pick(rng)];
    const auto& la = g.lattice_ix[static_cast<std::size_t>(a)];
    const auto& lb = g.lattice_ix[static_cast<std::size_t>(b)];
    if (la[0] < 0 || lb[0] < 0)
      continue;
    if ((la[0] + lb[0]) % 2 != 0 || (la[1] + lb[1]) % 2 != 0)
      continue;
    Index mid = g.lattice_node((la[0] + lb[0]) / 2, (la[1] + lb[1]) / 2);
    if (mid >= 0 && in_region(mid))
      check_triple(a, mid, b);
  }

  if (!rep.convex_ok && rep.message.empty())
    rep.message = "discrete midpoint convexity fails";
  rep.pass = rep.sign_ok && rep.convex_ok;
  return rep;
}

} // namespace subell
