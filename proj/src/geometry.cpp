#include "subell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subell {

namespace {

constexpr Real kSnapTol = 1e-9;

std::string fmt(Real v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// Domain

Domain Domain::interval(Real a, Real b) {
  if (!(b > a))
    throw std::invalid_argument("interval needs a < b");
  Domain d;
  d.kind = DomainKind::Interval;
  d.dim = 1;
  d.lo << a, 0.0;
  d.hi << b, 0.0;
  return d;
}

Domain Domain::rectangle(Real ax, Real bx, Real ay, Real by) {
  if (!(bx > ax) || !(by > ay))
    throw std::invalid_argument("rectangle needs positive side lengths");
  Domain d;
  d.kind = DomainKind::Rectangle;
  d.dim = 2;
  d.lo << ax, ay;
  d.hi << bx, by;
  return d;
}

Domain Domain::disk(Real cx, Real cy, Real r) {
  if (!(r > 0))
    throw std::invalid_argument("disk needs radius > 0");
  Domain d;
  d.kind = DomainKind::Disk;
  d.dim = 2;
  d.center << cx, cy;
  d.radius = r;
  return d;
}

Real Domain::measure() const {
  switch (kind) {
  case DomainKind::Interval: return hi.x() - lo.x();
  case DomainKind::Rectangle: return (hi.x() - lo.x()) * (hi.y() - lo.y());
  case DomainKind::Disk: return M_PI * radius * radius;
  }
  return 0.0;
}

Real Domain::characteristic_length() const {
  switch (kind) {
  case DomainKind::Interval: return hi.x() - lo.x();
  case DomainKind::Rectangle: return std::max(hi.x() - lo.x(), hi.y() - lo.y());
  case DomainKind::Disk: return 2.0 * radius;
  }
  return 0.0;
}

Real Domain::boundary_distance(const Vector2& p) const {
  switch (kind) {
  case DomainKind::Interval:
    return std::min(p.x() - lo.x(), hi.x() - p.x());
  case DomainKind::Rectangle:
    return std::min(std::min(p.x() - lo.x(), hi.x() - p.x()),
                    std::min(p.y() - lo.y(), hi.y() - p.y()));
  case DomainKind::Disk:
    return radius - (p - center).norm();
  }
  return 0.0;
}

std::string Domain::describe() const {
  switch (kind) {
  case DomainKind::Interval:
    return "interval (" + fmt(lo.x()) + ", " + fmt(hi.x()) + ")";
  case DomainKind::Rectangle:
    return "rectangle (" + fmt(lo.x()) + ", " + fmt(hi.x()) + ") x (" +
           fmt(lo.y()) + ", " + fmt(hi.y()) + ")";
  case DomainKind::Disk:
    return "disk center (" + fmt(center.x()) + ", " + fmt(center.y()) +
           ") radius " + fmt(radius);
  }
  return "";
}

// ---------------------------------------------------------------------------
// RegionSpec

RegionSpec RegionSpec::all() { return RegionSpec{}; }

RegionSpec RegionSpec::interval(Real a, Real b) {
  if (!(b > a))
    throw std::invalid_argument("region interval needs a < b");
  RegionSpec r;
  r.kind = Kind::Interval;
  r.lo << a, 0.0;
  r.hi << b, 0.0;
  return r;
}

RegionSpec RegionSpec::rect(Real ax, Real bx, Real ay, Real by) {
  if (!(bx > ax) || !(by > ay))
    throw std::invalid_argument("region rect needs positive side lengths");
  RegionSpec r;
  r.kind = Kind::Rect;
  r.lo << ax, ay;
  r.hi << bx, by;
  return r;
}

RegionSpec RegionSpec::disk(Real cx, Real cy, Real rad) {
  if (!(rad > 0))
    throw std::invalid_argument("region disk needs radius > 0");
  RegionSpec r;
  r.kind = Kind::Disk;
  r.center << cx, cy;
  r.radius = rad;
  return r;
}

bool RegionSpec::contains(const Vector2& p, Real tol) const {
  switch (kind) {
  case Kind::All: return true;
  case Kind::Interval:
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol;
  case Kind::Rect:
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol &&
           p.y() >= lo.y() - tol && p.y() <= hi.y() + tol;
  case Kind::Disk:
    return (p - center).norm() <= radius + tol;
  }
  return false;
}

Real RegionSpec::boundary_distance(const Vector2& p) const {
  switch (kind) {
  case Kind::All:
    return kInfinity;
  case Kind::Interval:
    return std::min(p.x() - lo.x(), hi.x() - p.x());
  case Kind::Rect:
    return std::min(std::min(p.x() - lo.x(), hi.x() - p.x()),
                    std::min(p.y() - lo.y(), hi.y() - p.y()));
  case Kind::Disk:
    return radius - (p - center).norm();
  }
  return 0.0;
}

Real RegionSpec::exterior_distance(const Vector2& p) const {
  switch (kind) {
  case Kind::All:
    return 0.0;
  case Kind::Interval: {
    Real d = std::max(std::max(lo.x() - p.x(), p.x() - hi.x()), Real(0));
    return d;
  }
  case Kind::Rect: {
    Real dx = std::max(std::max(lo.x() - p.x(), p.x() - hi.x()), Real(0));
    Real dy = std::max(std::max(lo.y() - p.y(), p.y() - hi.y()), Real(0));
    return std::sqrt(dx * dx + dy * dy);
  }
  case Kind::Disk:
    return std::max((p - center).norm() - radius, Real(0));
  }
  return 0.0;
}

Real RegionSpec::measure() const {
  switch (kind) {
  case Kind::All: return kInfinity;
  case Kind::Interval: return hi.x() - lo.x();
  case Kind::Rect: return (hi.x() - lo.x()) * (hi.y() - lo.y());
  case Kind::Disk: return M_PI * radius * radius;
  }
  return 0.0;
}

std::string RegionSpec::describe() const {
  switch (kind) {
  case Kind::All: return "all";
  case Kind::Interval: return "interval " + fmt(lo.x()) + " " + fmt(hi.x());
  case Kind::Rect:
    return "rect " + fmt(lo.x()) + " " + fmt(hi.x()) + " " + fmt(lo.y()) + " " +
           fmt(hi.y());
  case Kind::Disk:
    return "disk " + fmt(center.x()) + " " + fmt(center.y()) + " " + fmt(radius);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Grid

Index Grid::lattice_node(int ix, int iy) const {
  if (ix < 0 || ix > nx || iy < 0 || iy > ny)
    return -1;
  return lattice[static_cast<std::size_t>(iy) * (nx + 1) + ix];
}

Index Grid::step(Index node, int axis, int steps) const {
  const auto& li = lattice_ix[static_cast<std::size_t>(node)];
  if (li[0] < 0)
    return -1;
  int ix = li[0] + (axis == 0 ? steps : 0);
  int iy = li[1] + (axis == 1 ? steps : 0);
  return lattice_node(ix, iy);
}

namespace {

void fill_cell_volumes(Grid& g) {
  Region full = whole_domain_region(g);
  g.cell_volume = Vector::Zero(g.n_nodes());
  for (std::size_t k = 0; k < full.nodes.size(); ++k)
    g.cell_volume[full.nodes[k]] = full.weights[static_cast<Index>(k)];
}

Grid build_box_grid(const Domain& domain, int resolution) {
  Grid g;
  g.domain = domain;
  const Real len = domain.characteristic_length();
  g.h = len / resolution;

  const Real lx = domain.hi.x() - domain.lo.x();
  const Real ly = domain.dim == 2 ? domain.hi.y() - domain.lo.y() : 0.0;
  g.nx = static_cast<int>(std::llround(lx / g.h));
  g.ny = domain.dim == 2 ? static_cast<int>(std::llround(ly / g.h)) : 0;
  if (std::abs(g.nx * g.h - lx) > kSnapTol * len ||
      (domain.dim == 2 && std::abs(g.ny * g.h - ly) > kSnapTol * len))
    throw std::invalid_argument(
        "rectangle sides must be commensurate with the grid spacing h = " +
        std::to_string(g.h));
  if (g.nx < 2 || (domain.dim == 2 && g.ny < 2))
    throw std::invalid_argument("grid leaves no interior nodes along an axis");

  const Index n = static_cast<Index>(g.nx + 1) * (g.ny + 1);
  g.coords.resize(n, 2);
  g.node_kind.resize(n);
  g.lattice.resize(n);
  g.lattice_ix.resize(n);
  g.delta = Vector::Zero(n);
  g.stencil.assign(n, {});

  Index id = 0;
  for (int iy = 0; iy <= g.ny; ++iy) {
    for (int ix = 0; ix <= g.nx; ++ix, ++id) {
      const Real x = domain.lo.x() + ix * g.h;
      const Real y = domain.dim == 2 ? domain.lo.y() + iy * g.h : 0.0;
      g.coords(id, 0) = x;
      g.coords(id, 1) = y;
      g.lattice[static_cast<std::size_t>(id)] = id;
      g.lattice_ix[static_cast<std::size_t>(id)] = {ix, iy};
      const bool on_edge = ix == 0 || ix == g.nx ||
                           (domain.dim == 2 && (iy == 0 || iy == g.ny));
      g.node_kind[static_cast<std::size_t>(id)] =
          on_edge ? NodeKind::Boundary : NodeKind::Interior;
      if (on_edge) {
        g.boundary.push_back(id);
      } else {
        g.interior.push_back(id);
        g.delta[id] = domain.boundary_distance(g.point(id));
      }
    }
  }

  for (Index i : g.interior) {
    auto& arms = g.stencil[static_cast<std::size_t>(i)];
    arms[0] = {g.step(i, 0, +1), g.h};
    arms[1] = {g.step(i, 0, -1), g.h};
    if (domain.dim == 2) {
      arms[2] = {g.step(i, 1, +1), g.h};
      arms[3] = {g.step(i, 1, -1), g.h};
    }
  }
  fill_cell_volumes(g);
  return g;
}

Grid build_disk_grid(const Domain& domain, int resolution) {
  Grid g;
  g.domain = domain;
  const Real R = domain.radius;
  g.h = 2.0 * R / resolution;
  g.nx = g.ny = resolution;

  const Index nlat = static_cast<Index>(g.nx + 1) * (g.ny + 1);
  g.lattice.assign(static_cast<std::size_t>(nlat), -1);

  std::vector<Vector2> pts;
  std::vector<std::array<int, 2>> pts_ix;
  const Real rin = R * (1.0 - 1e-12);
  for (int iy = 0; iy <= g.ny; ++iy) {
    for (int ix = 0; ix <= g.nx; ++ix) {
      Vector2 p(domain.center.x() - R + ix * g.h, domain.center.y() - R + iy * g.h);
      if ((p - domain.center).norm() < rin) {
        g.lattice[static_cast<std::size_t>(iy) * (g.nx + 1) + ix] =
            static_cast<Index>(pts.size());
        pts.push_back(p);
        pts_ix.push_back({ix, iy});
      }
    }
  }
  if (pts.empty())
    throw std::invalid_argument("disk grid has no interior nodes at this resolution");

  const Index n_int = static_cast<Index>(pts.size());
  // boundary crossing points are appended behind the interior nodes, deduped
  // on a quantized coordinate key
  std::map<std::pair<long long, long long>, Index> cut_ids;
  std::vector<Vector2> cuts;
  auto cut_node = [&](const Vector2& q) {
    const Real scale = 1. / (kSnapTol * g.h);
    std::pair<long long, long long> key(
        static_cast<long long>(std::llround(q.x() * scale)),
        static_cast<long long>(std::llround(q.y() * scale)));
    auto it = cut_ids.find(key);
    if (it != cut_ids.end())
      return it->second;
    Index id = n_int + static_cast<Index>(cuts.size());
    cut_ids.emplace(key, id);
    cuts.push_back(q);
    return id;
  };

  std::vector<std::array<Grid::Arm, 4>> stencil(static_cast<std::size_t>(n_int));
  const int dx[4] = {+1, -1, 0, 0};
  const int dy[4] = {0, 0, +1, -1};
  for (Index i = 0; i < n_int; ++i) {
    const Vector2 rel = pts[static_cast<std::size_t>(i)] - domain.center;
    for (int d = 0; d < 4; ++d) {
      int jx = pts_ix[static_cast<std::size_t>(i)][0] + dx[d];
      int jy = pts_ix[static_cast<std::size_t>(i)][1] + dy[d];
      Index nbr = (jx < 0 || jx > g.nx || jy < 0 || jy > g.ny)
                      ? -1
                      : g.lattice[static_cast<std::size_t>(jy) * (g.nx + 1) + jx];
      if (nbr >= 0) {
        stencil[static_cast<std::size_t>(i)][d] = {nbr, g.h};
        continue;
      }
      // arm cut by the circle: exact crossing along the axis
      Real a;
      Vector2 q = pts[static_cast<std::size_t>(i)];
      if (d < 2) {
        const Real reach = std::sqrt(std::max(R * R - rel.y() * rel.y(), Real(0)));
        a = (d == 0) ? reach - rel.x() : reach + rel.x();
        q.x() += (d == 0 ? a : -a);
      } else {
        const Real reach = std::sqrt(std::max(R * R - rel.x() * rel.x(), Real(0)));
        a = (d == 2) ? reach - rel.y() : reach + rel.y();
        q.y() += (d == 2 ? a : -a);
      }
      a = std::max(a, 1e-10 * g.h);
      stencil[static_cast<std::size_t>(i)][d] = {cut_node(q), a};
    }
  }

  const Index n = n_int + static_cast<Index>(cuts.size());
  g.coords.resize(n, 2);
  g.node_kind.resize(static_cast<std::size_t>(n));
  g.lattice_ix.resize(static_cast<std::size_t>(n), {-1, -1});
  g.delta = Vector::Zero(n);
  g.stencil.assign(static_cast<std::size_t>(n), {});
  for (Index i = 0; i < n_int; ++i) {
    g.coords.row(i) = pts[static_cast<std::size_t>(i)].transpose();
    g.node_kind[static_cast<std::size_t>(i)] = NodeKind::Interior;
    g.lattice_ix[static_cast<std::size_t>(i)] = pts_ix[static_cast<std::size_t>(i)];
    g.stencil[static_cast<std::size_t>(i)] = stencil[static_cast<std::size_t>(i)];
    g.interior.push_back(i);
    g.delta[i] = domain.boundary_distance(g.point(i));
  }
  for (Index k = 0; k < static_cast<Index>(cuts.size()); ++k) {
    const Index id = n_int + k;
    g.coords.row(id) = cuts[static_cast<std::size_t>(k)].transpose();
    g.node_kind[static_cast<std::size_t>(id)] = NodeKind::Boundary;
    g.boundary.push_back(id);
    g.delta[id] = 0.0;
  }
  fill_cell_volumes(g);
  return g;
}

} // namespace

Grid build_grid(const Domain& domain, int resolution) {
  if (resolution < 4)
    throw std::invalid_argument("resolution must be at least 4");
  if (domain.kind == DomainKind::Disk)
    return build_disk_grid(domain, resolution);
  return build_box_grid(domain, resolution);
}

Vector distance_field(const Grid& grid) { return grid.delta; }

// ---------------------------------------------------------------------------
// Regions

namespace {

Region accumulate_cells(const Grid& g, const std::string& name,
                        const std::function<bool(const Vector2&)>& corner_ok) {
  Region region;
  region.name = name;
  Vector w = Vector::Zero(g.n_nodes());
  const int dim = g.dim();
  const Real cell_share = std::pow(g.h, dim) / std::pow(2.0, dim);
  const int cy = dim == 2 ? g.ny : 1;
  for (int iy = 0; iy < cy; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      Index corner_ids[4];
      int ncorner = dim == 2 ? 4 : 2;
      corner_ids[0] = g.lattice_node(ix, dim == 2 ? iy : 0);
      corner_ids[1] = g.lattice_node(ix + 1, dim == 2 ? iy : 0);
      if (dim == 2) {
        corner_ids[2] = g.lattice_node(ix, iy + 1);
        corner_ids[3] = g.lattice_node(ix + 1, iy + 1);
      }
      bool ok = true;
      for (int c = 0; c < ncorner && ok; ++c)
        ok = corner_ids[c] >= 0 && corner_ok(g.point(corner_ids[c]));
      if (!ok)
        continue;
      for (int c = 0; c < ncorner; ++c)
        w[corner_ids[c]] += cell_share;
    }
  }
  for (Index i = 0; i < g.n_nodes(); ++i) {
    if (w[i] > 0) {
      region.nodes.push_back(i);
      region.measure += w[i];
    }
  }
  region.weights.resize(static_cast<Index>(region.nodes.size()));
  for (std::size_t k = 0; k < region.nodes.size(); ++k)
    region.weights[static_cast<Index>(k)] = w[region.nodes[k]];
  return region;
}

} // namespace

Region whole_domain_region(const Grid& g) {
  return accumulate_cells(g, "domain", [](const Vector2&) { return true; });
}

Region make_region(const Grid& g, const RegionSpec& spec, bool complement,
                   const std::string& name) {
  const Real tol = kSnapTol * g.h;
  auto corner_ok = [&](const Vector2& p) {
    return complement ? !spec.contains(p, -tol) : spec.contains(p, tol);
  };
  std::string label = name.empty()
                          ? (complement ? "complement of " : "") + spec.describe()
                          : name;
  return accumulate_cells(g, label, corner_ok);
}

// ---------------------------------------------------------------------------
// Partitions

std::vector<Index> SubdomainPartition::interface_node_ids() const {
  std::vector<Index> ids;
  ids.reserve(interface_nodes.size());
  for (const auto& f : interface_nodes)
    ids.push_back(f.node);
  return ids;
}

namespace {

Real snap_coordinate(const Grid& g, Real v, int axis) {
  const Real origin = g.domain.lo[axis];
  const Real k = std::llround((v - origin) / g.h);
  return origin + k * g.h;
}

SubdomainPartition make_box_partition(const Grid& g, const RegionSpec& spec) {
  SubdomainPartition part;
  part.grid = &g;
  part.requested_omega0 = spec;

  RegionSpec snapped = spec;
  const int dim = g.dim();
  for (int a = 0; a < dim; ++a) {
    snapped.lo[a] = snap_coordinate(g, spec.lo[a], a);
    snapped.hi[a] = snap_coordinate(g, spec.hi[a], a);
  }
  part.omega0 = snapped;

  const Real tol = kSnapTol * g.h;
  for (int a = 0; a < dim; ++a) {
    const Real clear_lo = snapped.lo[a] - g.domain.lo[a];
    const Real clear_hi = g.domain.hi[a] - snapped.hi[a];
    if (clear_lo <= tol || clear_hi <= tol)
      throw std::invalid_argument("omega0 touches or exits the domain boundary");
    if (clear_lo < 2 * g.h - tol || clear_hi < 2 * g.h - tol)
      throw std::invalid_argument("omega0 clearance to the boundary is below 2h");
    if (snapped.hi[a] - snapped.lo[a] < 2 * g.h - tol)
      throw std::invalid_argument("omega0 is too thin to contain interior nodes");
  }

  part.delta0 = Vector::Zero(g.n_nodes());
  part.delta1 = Vector::Zero(g.n_nodes());
  for (Index i : g.interior) {
    const Vector2 p = g.point(i);
    bool on_face = false, inside = true;
    for (int a = 0; a < dim; ++a) {
      if (std::abs(p[a] - snapped.lo[a]) <= tol ||
          std::abs(p[a] - snapped.hi[a]) <= tol)
        on_face = true;
      if (p[a] < snapped.lo[a] - tol || p[a] > snapped.hi[a] + tol)
        inside = false;
    }
    if (inside && on_face) {
      InterfaceNode f;
      f.node = i;
      Vector2 nrm = Vector2::Zero();
      int sides = 0;
      for (int a = 0; a < dim; ++a) {
        if (std::abs(p[a] - snapped.lo[a]) <= tol) {
          nrm[a] = -1;
          ++sides;
        } else if (std::abs(p[a] - snapped.hi[a]) <= tol) {
          nrm[a] = +1;
          ++sides;
        }
      }
      f.corner = sides > 1;
      f.normal = nrm.normalized();
      part.interface_nodes.push_back(f);
    } else if (inside) {
      part.omega0_nodes.push_back(i);
      part.delta0[i] = snapped.boundary_distance(p);
    } else {
      part.omega1_nodes.push_back(i);
      part.delta1[i] = std::min(g.delta[i], snapped.exterior_distance(p));
    }
  }
  if (part.omega0_nodes.empty())
    throw std::invalid_argument("omega0 contains no interior nodes");
  if (part.omega1_nodes.empty())
    throw std::invalid_argument("omega1 contains no interior nodes");

  part.omega0_region = make_region(g, snapped, false, "omega0");
  part.omega1_region = make_region(g, snapped, true, "omega1");
  return part;
}

SubdomainPartition make_disk_partition(const Grid& g, const RegionSpec& spec) {
  if (g.domain.kind != DomainKind::Disk)
    throw std::invalid_argument("sub-disk partitions require a disk domain");
  if ((spec.center - g.domain.center).norm() > kSnapTol * g.h)
    throw std::invalid_argument("sub-disk partitions must be concentric");
  const Real R0 = spec.radius;
  const Real tol = kSnapTol * g.h;
  if (g.domain.radius - R0 <= tol)
    throw std::invalid_argument("omega0 touches or exits the domain boundary");
  if (g.domain.radius - R0 < 2 * g.h - tol)
    throw std::invalid_argument("omega0 clearance to the boundary is below 2h");

  SubdomainPartition part;
  part.grid = &g;
  part.requested_omega0 = spec;
  part.omega0 = spec;

  part.delta0 = Vector::Zero(g.n_nodes());
  part.delta1 = Vector::Zero(g.n_nodes());
  // the interface is the outermost lattice ring of the closed sub-disk
  for (Index i : g.interior) {
    const Vector2 p = g.point(i);
    const Real rad = (p - g.domain.center).norm();
    if (rad > R0 + tol) {
      part.omega1_nodes.push_back(i);
      part.delta1[i] = std::min(g.delta[i], rad - R0);
      continue;
    }
    bool ring = false;
    for (int d = 0; d < 4; ++d) {
      const auto& arm = g.stencil[static_cast<std::size_t>(i)][d];
      if (arm.neighbor < 0)
        continue;
      const Vector2 q = g.point(arm.neighbor);
      if ((q - g.domain.center).norm() > R0 + tol)
        ring = true;
    }
    if (ring) {
      InterfaceNode f;
      f.node = i;
      f.normal = rad > tol ? ((p - g.domain.center) / rad).eval() : Vector2(1, 0);
      part.interface_nodes.push_back(f);
    } else {
      part.omega0_nodes.push_back(i);
      part.delta0[i] = R0 - rad;
    }
  }
  if (part.omega0_nodes.empty())
    throw std::invalid_argument("omega0 contains no interior nodes");
  if (part.omega1_nodes.empty())
    throw std::invalid_argument("omega1 contains no interior nodes");

  part.omega0_region = make_region(g, spec, false, "omega0");
  part.omega1_region = make_region(g, spec, true, "omega1");
  return part;
}

} // namespace

SubdomainPartition make_partition(const Grid& g, const RegionSpec& omega0_spec) {
  switch (omega0_spec.kind) {
  case RegionSpec::Kind::Interval:
    if (g.dim() != 1)
      throw std::invalid_argument("interval omega0 requires a 1D grid");
    return make_box_partition(g, omega0_spec);
  case RegionSpec::Kind::Rect:
    if (g.domain.kind != DomainKind::Rectangle)
      throw std::invalid_argument("rect omega0 requires a rectangle domain");
    return make_box_partition(g, omega0_spec);
  case RegionSpec::Kind::Disk:
    return make_disk_partition(g, omega0_spec);
  case RegionSpec::Kind::All:
    break;
  }
  throw std::invalid_argument("omega0 must be an interval, rect or disk region");
}

// ---------------------------------------------------------------------------
// Ball enumeration

std::vector<ScoredBall> enumerate_nonpositive_balls(const Grid& g,
                                                    const Vector& m_values) {
  if (m_values.size() != g.n_nodes())
    throw std::invalid_argument("weight values do not match the grid");
  const Real tol = 1e-12 * std::max(Real(1), m_values.cwiseAbs().maxCoeff());

  std::vector<ScoredBall> out;
  for (Index c : g.interior) {
    const Vector2 pc = g.point(c);
    const int r_max = static_cast<int>(std::floor(g.delta[c] / g.h + kSnapTol));
    if (r_max < 1)
      continue;
    // bucket all nodes within distance r_max*h by shell index ceil(dist/h)
    std::vector<Real> shell_max(static_cast<std::size_t>(r_max) + 1,
                                -kInfinity);
    auto deposit = [&](Index node) {
      const Real dist = (g.point(node) - pc).norm();
      if (dist > r_max * g.h + kSnapTol * g.h)
        return;
      int s = static_cast<int>(std::ceil(dist / g.h - kSnapTol));
      s = std::max(s, 0);
      if (s <= r_max)
        shell_max[static_cast<std::size_t>(s)] =
            std::max(shell_max[static_cast<std::size_t>(s)], m_values[node]);
    };
    if (g.domain.kind == DomainKind::Disk) {
      // lattice window around the center (cut boundary nodes never enter a
      // contained ball: dist to boundary > r_max*h there)
      for (int sy = -r_max; sy <= r_max; ++sy)
        for (int sx = -r_max; sx <= r_max; ++sx) {
          Index nbr = -1;
          const auto& li = g.lattice_ix[static_cast<std::size_t>(c)];
          int ix = li[0] + sx, iy = li[1] + sy;
          nbr = g.lattice_node(ix, iy);
          if (nbr >= 0)
            deposit(nbr);
        }
    } else {
      const auto& li = g.lattice_ix[static_cast<std::size_t>(c)];
      const int wy = g.dim() == 2 ? r_max : 0;
      for (int sy = -wy; sy <= wy; ++sy)
        for (int sx = -r_max; sx <= r_max; ++sx) {
          Index nbr = g.lattice_node(li[0] + sx, g.dim() == 2 ? li[1] + sy : 0);
          if (nbr >= 0)
            deposit(nbr);
        }
    }

    Real run_max = shell_max[0]; // the center node itself
    for (int s = 1; s <= r_max; ++s) {
      run_max = std::max(run_max, shell_max[static_cast<std::size_t>(s)]);
      if (run_max > tol)
        break; // larger balls contain this shell as well
      ScoredBall sb;
      sb.ball.center = pc;
      sb.ball.radius = s * g.h;
      sb.center_node = c;
      sb.weight_inf = std::max(-run_max, Real(0));
      sb.score = sb.weight_inf * sb.ball.radius * sb.ball.radius;
      out.push_back(sb);
    }
  }

  std::sort(out.begin(), out.end(), [](const ScoredBall& a, const ScoredBall& b) {
    if (a.score != b.score)
      return a.score > b.score;
    if (a.center_node != b.center_node)
      return a.center_node < b.center_node;
    return a.ball.radius < b.ball.radius;
  });
  return out;
}

} // namespace subell
