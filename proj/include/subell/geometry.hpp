#pragma once

#include "subell/core.hpp"

#include <array>
#include <string>
#include <vector>

namespace subell {

enum class DomainKind { Interval, Rectangle, Disk };

/// Computational domain: an interval, an axis-aligned rectangle or a disk.
struct Domain {
  DomainKind kind = DomainKind::Interval;
  int dim = 1;
  Vector2 lo = Vector2::Zero();     // interval / rectangle corners
  Vector2 hi = Vector2::Zero();
  Vector2 center = Vector2::Zero(); // disk
  Real radius = 0.0;

  static Domain interval(Real a, Real b);
  static Domain rectangle(Real ax, Real bx, Real ay, Real by);
  static Domain disk(Real cx, Real cy, Real r);

  Real measure() const;
  Real characteristic_length() const; // longest side, or disk diameter
  /// Exact distance to the boundary, positive inside, negative outside.
  Real boundary_distance(const Vector2& p) const;
  std::string describe() const;
};

/// Geometric region used for weight pieces, integration subdomains and
/// partition specifications. Membership is closed unless stated otherwise.
struct RegionSpec {
  enum class Kind { All, Interval, Rect, Disk };
  Kind kind = Kind::All;
  Vector2 lo = Vector2::Zero(), hi = Vector2::Zero();
  Vector2 center = Vector2::Zero();
  Real radius = 0.0;

  static RegionSpec all();
  static RegionSpec interval(Real a, Real b);
  static RegionSpec rect(Real ax, Real bx, Real ay, Real by);
  static RegionSpec disk(Real cx, Real cy, Real r);

  bool contains(const Vector2& p, Real tol) const;
  /// Distance to the region's own boundary, positive strictly inside.
  Real boundary_distance(const Vector2& p) const;
  /// Euclidean distance from an outside point to the closed region.
  Real exterior_distance(const Vector2& p) const;
  Real measure() const;
  std::string describe() const;
};

enum class NodeKind : unsigned char { Interior, Boundary };

/// Uniform grid over a domain. Interior nodes carry a 2*dim-arm stencil;
/// on the disk, arms cut by the circle are shortened to the exact crossing
/// point (Shortley-Weller) and end at a dedicated boundary node.
struct Grid {
  Domain domain;
  Real h = 0.0;
  int nx = 0, ny = 0; // lattice cells per axis of the bounding box

  Eigen::Matrix<Real, Eigen::Dynamic, 2> coords; // one row per node
  std::vector<NodeKind> node_kind;
  std::vector<Index> interior;
  std::vector<Index> boundary;
  Vector delta;       // exact distance to the domain boundary, 0 on boundary nodes
  Vector cell_volume; // nodal quadrature weight (cell-counting trapezoid)

  struct Arm {
    Index neighbor = -1;
    Real length = 0.0;
  };
  // E,W,N,S order; entries 2..3 unused in 1D
  std::vector<std::array<Arm, 4>> stencil;

  std::vector<Index> lattice;              // (nx+1)*(ny+1) -> node id or -1
  std::vector<std::array<int, 2>> lattice_ix; // per node; {-1,-1} for off-lattice

  int dim() const { return domain.dim; }
  Index n_nodes() const { return coords.rows(); }
  Vector2 point(Index i) const { return coords.row(i).transpose(); }
  Index lattice_node(int ix, int iy) const;
  /// Lattice node `steps` cells away along `axis`, or -1.
  Index step(Index node, int axis, int steps) const;
};

/// pre: resolution >= 4. Spacing is characteristic_length / resolution.
Grid build_grid(const Domain& domain, int resolution);

/// Nodal exact distances to the domain boundary.
Vector distance_field(const Grid& grid);

/// Node set with quadrature weights for integrals over a subregion.
/// Weights come from counting grid cells contained in the region, h^N / 2^N
/// per cell corner; exact for lattice-aligned boxes, O(h) on disks.
struct Region {
  std::string name;
  std::vector<Index> nodes; // nodes carrying positive weight
  Vector weights;           // aligned with nodes
  Real measure = 0.0;       // sum of weights
};

Region whole_domain_region(const Grid& grid);
Region make_region(const Grid& grid, const RegionSpec& spec, bool complement = false,
                   const std::string& name = "");

struct InterfaceNode {
  Index node = -1;
  Vector2 normal = Vector2::Zero(); // outward unit normal of omega0
  bool corner = false;              // box corner: no single-sided normal
};

/// Partition of the grid interior into omega0, omega1 = domain - closure(omega0)
/// and the interface layer carrying Dirichlet data for mixed problems.
struct SubdomainPartition {
  const Grid* grid = nullptr;
  RegionSpec omega0;           // snapped to the lattice
  RegionSpec requested_omega0; // as given by the caller
  std::vector<Index> omega0_nodes;
  std::vector<Index> omega1_nodes;
  std::vector<InterfaceNode> interface_nodes;
  Vector delta0; // distance to the omega0 boundary, 0 outside omega0
  Vector delta1; // distance to the omega1 boundary, 0 outside omega1
  Region omega0_region;
  Region omega1_region;

  std::vector<Index> interface_node_ids() const;
};

/// pre: omega0 lies inside the domain with clearance >= 2h and is a
/// sub-interval, an axis-aligned sub-rectangle or a concentric sub-disk.
/// Box-shaped omega0 is snapped to the nearest lattice coordinates; the disk
/// interface is the outermost lattice ring inside the requested circle.
SubdomainPartition make_partition(const Grid& grid, const RegionSpec& omega0_spec);

struct Ball {
  Vector2 center = Vector2::Zero();
  Real radius = 0.0;
};

struct ScoredBall {
  Ball ball;
  Index center_node = -1;
  Real weight_inf = 0.0; // inf of m^- over the ball nodes
  Real score = 0.0;      // weight_inf * radius^2
};

/// All balls with node centers and radii in {h, 2h, ...} contained in the
/// domain and with m <= 0 at every node they cover, sorted by score
/// descending. Empty when no such ball exists.
std::vector<ScoredBall> enumerate_nonpositive_balls(const Grid& grid,
                                                    const Vector& m_values);

} // namespace subell
