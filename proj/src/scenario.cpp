#include "subell/scenario.hpp"

#include "subell/constructions.hpp"
#include "subell/elliptic.hpp"
#include "subell/sublinear.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace subell {

std::string to_string(PipelineKind k) {
  switch (k) {
  case PipelineKind::Solve: return "solve";
  case PipelineKind::Poisson: return "poisson";
  case PipelineKind::CertifyExistence: return "certify-existence";
  case PipelineKind::CertifyNonexistence: return "certify-nonexistence";
  case PipelineKind::Corollary33: return "corollary33";
  case PipelineKind::Constants: return "constants";
  }
  return "";
}

// ---------------------------------------------------------------------------
// INI parsing

namespace {

struct IniFile {
  // section -> ordered key/value pairs; duplicate keys are rejected
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
      sections;

  std::vector<std::pair<std::string, std::string>>* find(const std::string& name) {
    for (auto& s : sections)
      if (s.first == name)
        return &s.second;
    return nullptr;
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

IniFile parse_ini(const std::string& text, std::vector<std::string>& problems) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!ini.find(section))
        ini.sections.push_back({section, {}});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": key outside a section");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto* sec = ini.find(section);
    for (const auto& kv : *sec)
      if (kv.first == key)
        problems.push_back("line " + std::to_string(lineno) + ": duplicate key '" +
                           key + "' in [" + section + "]");
    sec->push_back({key, value});
  }
  return ini;
}

class SectionReader {
public:
  SectionReader(IniFile& ini, const std::string& name,
                std::vector<std::string>& problems)
      : name_(name), problems_(&problems) {
    kvs_ = ini.find(name);
  }

  bool present() const { return kvs_ != nullptr; }

  const std::string* raw(const std::string& key) {
    used_.insert(key);
    if (!kvs_)
      return nullptr;
    for (const auto& kv : *kvs_)
      if (kv.first == key)
        return &kv.second;
    return nullptr;
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const std::string* v = raw(key);
    return v ? *v : fallback;
  }

  Real real(const std::string& key, Real fallback) {
    const std::string* v = raw(key);
    if (!v)
      return fallback;
    if (*v == "inf")
      return kInfinity;
    try {
      std::size_t pos = 0;
      Real r = std::stod(*v, &pos);
      if (pos != v->size())
        throw std::invalid_argument("");
      return r;
    } catch (...) {
      fail("key '" + key + "' is not a number: '" + *v + "'");
      return fallback;
    }
  }

  long long integer(const std::string& key, long long fallback) {
    const std::string* v = raw(key);
    if (!v)
      return fallback;
    try {
      std::size_t pos = 0;
      long long r = std::stoll(*v, &pos);
      if (pos != v->size())
        throw std::invalid_argument("");
      return r;
    } catch (...) {
      fail("key '" + key + "' is not an integer: '" + *v + "'");
      return fallback;
    }
  }

  void require(const std::string& key) {
    if (!raw(key))
      fail("missing key '" + key + "'");
  }

  void finish() {
    if (!kvs_)
      return;
    for (const auto& kv : *kvs_)
      if (!used_.count(kv.first))
        fail("unknown key '" + kv.first + "'");
  }

  void fail(const std::string& what) {
    problems_->push_back("[" + name_ + "]: " + what);
  }

private:
  std::string name_;
  std::vector<std::pair<std::string, std::string>>* kvs_ = nullptr;
  std::set<std::string> used_;
  std::vector<std::string>* problems_;
};

std::optional<RegionSpec> parse_region(const std::string& text,
                                       std::vector<std::string>& problems,
                                       const std::string& where) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  auto next = [&](Real& v) {
    if (!(in >> v)) {
      problems.push_back(where + ": region '" + text + "' is missing numbers");
      return false;
    }
    return true;
  };
  try {
    if (kind == "all")
      return RegionSpec::all();
    if (kind == "interval") {
      Real a, b;
      if (next(a) && next(b))
        return RegionSpec::interval(a, b);
      return std::nullopt;
    }
    if (kind == "rect") {
      Real ax, bx, ay, by;
      if (next(ax) && next(bx) && next(ay) && next(by))
        return RegionSpec::rect(ax, bx, ay, by);
      return std::nullopt;
    }
    if (kind == "disk") {
      Real cx, cy, r;
      if (next(cx) && next(cy) && next(r))
        return RegionSpec::disk(cx, cy, r);
      return std::nullopt;
    }
  } catch (const std::exception& e) {
    problems.push_back(where + ": " + e.what());
    return std::nullopt;
  }
  problems.push_back(where + ": unknown region kind '" + kind + "'");
  return std::nullopt;
}

std::optional<Expression> parse_expr(const std::string& text,
                                     std::vector<std::string>& problems,
                                     const std::string& where) {
  try {
    return Expression::parse(text);
  } catch (const std::exception& e) {
    problems.push_back(where + ": " + e.what());
    return std::nullopt;
  }
}

} // namespace

Scenario parse_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw ScenarioError("cannot open scenario file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario_text(buf.str(), std::filesystem::path(path).stem().string());
}

Scenario parse_scenario_text(const std::string& text, const std::string& name) {
  std::vector<std::string> problems;
  IniFile ini = parse_ini(text, problems);

  Scenario s;
  s.name = name;

  SectionReader scen(ini, "scenario", problems);
  s.name = scen.str("name", s.name);
  scen.finish();

  SectionReader dom(ini, "domain", problems);
  if (!dom.present()) {
    problems.push_back("missing [domain] section");
  } else {
    const std::string kind = dom.str("kind", "");
    try {
      if (kind == "interval") {
        s.domain = Domain::interval(dom.real("a", 0), dom.real("b", 1));
      } else if (kind == "rectangle") {
        s.domain = Domain::rectangle(dom.real("ax", 0), dom.real("bx", 1),
                                     dom.real("ay", 0), dom.real("by", 1));
      } else if (kind == "disk") {
        s.domain = Domain::disk(dom.real("cx", 0), dom.real("cy", 0),
                                dom.real("radius", 1));
      } else {
        dom.fail("kind must be interval, rectangle or disk");
      }
    } catch (const std::exception& e) {
      dom.fail(e.what());
    }
    dom.finish();
  }

  SectionReader grid(ini, "grid", problems);
  if (!grid.present()) {
    problems.push_back("missing [grid] section");
  } else {
    grid.require("resolution");
    s.resolution = static_cast<int>(grid.integer("resolution", 0));
    if (s.resolution < 4)
      grid.fail("resolution must be at least 4");
    grid.finish();
  }

  SectionReader weight(ini, "weight", problems);
  if (weight.present()) {
    s.weight_r = weight.real("r", kInfinity);
    const std::string sampling = weight.str("sampling", "nodal");
    if (sampling == "nodal")
      s.sampling = SamplingMode::Nodal;
    else if (sampling == "cell-average")
      s.sampling = SamplingMode::CellAverage;
    else
      weight.fail("sampling must be nodal or cell-average");
    weight.finish();
  }
  if (!(s.weight_r > s.domain.dim))
    problems.push_back("[weight]: integrability exponent must satisfy r > N");

  for (int k = 1;; ++k) {
    const std::string sec = "weight.piece." + std::to_string(k);
    SectionReader piece(ini, sec, problems);
    if (!piece.present())
      break;
    piece.require("region");
    piece.require("expr");
    auto region = parse_region(piece.str("region", "all"), problems, "[" + sec + "]");
    auto expr = parse_expr(piece.str("expr", "0"), problems, "[" + sec + "]");
    if (region && expr)
      s.pieces.push_back(WeightPiece{*region, *expr});
    piece.finish();
  }
  if (s.pieces.empty())
    problems.push_back("scenario needs at least one [weight.piece.k] section");

  SectionReader nl(ini, "nonlinearity", problems);
  if (!nl.present()) {
    problems.push_back("missing [nonlinearity] section");
  } else {
    s.family = nl.str("family", "power");
    if (s.family != "power" && s.family != "power-plus-min")
      nl.fail("family must be power or power-plus-min");
    s.p = nl.real("p", 0.5);
    if (!(s.p > 0 && s.p < 1))
      nl.fail("p must lie in (0,1)");
    s.kappa = nl.real("kappa", 1.0);
    if (s.family == "power" && !(s.kappa > 0))
      nl.fail("kappa must be positive");
    nl.finish();
  }

  SectionReader pipe(ini, "pipeline", problems);
  if (!pipe.present()) {
    problems.push_back("missing [pipeline] section");
  } else {
    const std::string kind = pipe.str("kind", "");
    bool found = false;
    for (PipelineKind p :
         {PipelineKind::Solve, PipelineKind::Poisson, PipelineKind::CertifyExistence,
          PipelineKind::CertifyNonexistence, PipelineKind::Corollary33,
          PipelineKind::Constants}) {
      if (kind == to_string(p)) {
        s.pipeline = p;
        found = true;
      }
    }
    if (!found)
      pipe.fail("unknown pipeline kind '" + kind + "'");
    pipe.finish();
  }

  SectionReader om0(ini, "omega0", problems);
  if (om0.present()) {
    om0.require("region");
    s.omega0 = parse_region(om0.str("region", ""), problems, "[omega0]");
    om0.finish();
  }
  SectionReader om1(ini, "omega1", problems);
  if (om1.present()) {
    om1.require("region");
    s.omega1 = parse_region(om1.str("region", ""), problems, "[omega1]");
    om1.finish();
  }
  SectionReader ref(ini, "reference", problems);
  if (ref.present()) {
    ref.require("expr");
    s.reference = parse_expr(ref.str("expr", "0"), problems, "[reference]");
    ref.finish();
  }
  SectionReader rhs(ini, "rhs", problems);
  if (rhs.present()) {
    rhs.require("expr");
    s.rhs = parse_expr(rhs.str("expr", "0"), problems, "[rhs]");
    rhs.finish();
  }

  SectionReader tols(ini, "tolerances", problems);
  if (tols.present()) {
    s.tol.linear_residual = tols.real("linear_residual", s.tol.linear_residual);
    s.tol.eigen_residual = tols.real("eigen_residual", s.tol.eigen_residual);
    s.tol.change_tol = tols.real("change_tol", s.tol.change_tol);
    s.tol.residual_tol = tols.real("residual_tol", s.tol.residual_tol);
    s.tol.max_sweeps = static_cast<int>(tols.integer("max_sweeps", s.tol.max_sweeps));
    s.tol.green_cap = tols.integer("green_cap", s.tol.green_cap);
    tols.finish();
  }

  // cross-field consistency
  if (s.pipeline == PipelineKind::CertifyExistence && !s.omega0)
    problems.push_back("certify-existence requires an [omega0] section");
  if (s.pipeline == PipelineKind::Corollary33 && !s.omega1)
    problems.push_back("corollary33 requires an [omega1] section");
  if (s.pipeline == PipelineKind::Poisson && !s.rhs)
    problems.push_back("poisson requires an [rhs] section");

  static const std::set<std::string> known = {
      "scenario", "domain", "grid",     "weight",    "nonlinearity",
      "pipeline", "omega0", "omega1",   "reference", "rhs",
      "tolerances"};
  for (const auto& sec : ini.sections) {
    if (known.count(sec.first))
      continue;
    if (sec.first.rfind("weight.piece.", 0) == 0)
      continue;
    problems.push_back("unknown section [" + sec.first + "]");
  }

  if (!problems.empty()) {
    std::string msg = "scenario validation failed:";
    for (const auto& p : problems)
      msg += "\n  - " + p;
    throw ScenarioError(msg);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

Nonlinearity make_nonlinearity(const Scenario& s) {
  return s.family == "power" ? pure_power(s.kappa, s.p) : power_plus_min(s.p);
}

IterationOptions iteration_options(const Scenario& s) {
  IterationOptions opts;
  opts.change_tol = s.tol.change_tol;
  opts.residual_tol = s.tol.residual_tol;
  opts.max_sweeps = s.tol.max_sweeps;
  return opts;
}

void echo_scenario(ReportWriter& rw, const Scenario& s) {
  rw.section("scenario");
  rw.put_str("version", kVersion);
  rw.put_str("name", s.name);
  rw.put_str("domain", s.domain.describe());
  rw.put_int("resolution", s.resolution);
  rw.put("weight_r", s.weight_r);
  rw.put_str("weight_sampling",
             s.sampling == SamplingMode::Nodal ? "nodal" : "cell-average");
  rw.put_int("weight_pieces", static_cast<long long>(s.pieces.size()));
  rw.put_str("nonlinearity", s.family);
  rw.put("p", s.p);
  if (s.family == "power")
    rw.put("kappa", s.kappa);
  rw.put_str("pipeline", to_string(s.pipeline));
  if (s.omega0)
    rw.put_str("omega0", s.omega0->describe());
  if (s.omega1)
    rw.put_str("omega1", s.omega1->describe());
  rw.put("weight_scale", s.weight_scale);
  rw.put("omega1_amplitude", s.omega1_amplitude);
}

void echo_geometry(ReportWriter& rw, const Grid& g) {
  rw.section("geometry");
  rw.put("h", g.h);
  rw.put_int("nodes", g.n_nodes());
  rw.put_int("interior_nodes", static_cast<long long>(g.interior.size()));
  rw.put_int("boundary_nodes", static_cast<long long>(g.boundary.size()));
  rw.put("domain_measure", g.domain.measure());
  rw.put("cell_volume_sum", g.cell_volume.sum());
}

void echo_iteration(ReportWriter& rw, const IterationReport& rep) {
  rw.put_int("sweeps", rep.sweeps);
  rw.put_bool("converged", rep.converged);
  rw.put("final_residual", rep.final_residual);
  rw.put_bool("lambda_capped", rep.lambda_capped);
  rw.put_bool("super_verified", rep.super_verified);
  rw.put("max_monotonicity_violation", rep.max_monotonicity_violation);
  rw.put("max_sandwich_violation", rep.max_sandwich_violation);
}

std::string sweep_log_csv(const IterationReport& rep) {
  std::string csv = "sweep,min_change,max_change\n";
  for (std::size_t k = 0; k < rep.sweep_change.size(); ++k) {
    csv += std::to_string(k + 1) + "," + format_real(rep.sweep_change[k].first) +
           "," + format_real(rep.sweep_change[k].second) + "\n";
  }
  return csv;
}

Real max_reference_error(const Grid& g, const Vector& u, const Expression& ref) {
  Real err = 0;
  for (Index i = 0; i < g.n_nodes(); ++i) {
    const Vector2 p = g.point(i);
    err = std::max(err, std::abs(u[i] - ref(p.x(), p.y())));
  }
  return err;
}

} // namespace

std::string RunReport::report_text() const {
  std::string out = "# " + kVersion + " run report\n\n";
  ReportWriter rw;
  for (const auto& e : entries) {
    rw.section(e[0]);
    rw.put_str(e[1], e[2]);
  }
  out += rw.str();
  if (!dump_paths.empty()) {
    out += "\n[dumps]\n";
    for (const auto& p : dump_paths)
      out += "field = " + p + "\n";
  }
  return out;
}

const std::string* RunReport::find(const std::string& section,
                                   const std::string& key) const {
  for (const auto& e : entries)
    if (e[0] == section && e[1] == key)
      return &e[2];
  return nullptr;
}

Real RunReport::find_real(const std::string& section, const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v)
    throw std::runtime_error("report key " + section + "." + key + " not found");
  if (*v == "inf")
    return kInfinity;
  if (*v == "true")
    return 1;
  if (*v == "false")
    return 0;
  return std::stod(*v);
}

RunReport execute_scenario(const Scenario& s) {
  RunReport out;
  out.name = s.name;

  auto grid = std::make_shared<Grid>(build_grid(s.domain, s.resolution));
  out.grid = grid;
  const Grid& g = *grid;

  WeightField m = make_weight(g, s.pieces, s.weight_r, s.sampling);
  if (s.weight_scale != 1.0)
    m.values *= s.weight_scale;
  if (s.omega1_amplitude != 1.0) {
    if (!s.omega0)
      throw std::runtime_error("omega1_amplitude needs an [omega0] region");
    const Real tol = 1e-9 * g.h;
    for (Index i = 0; i < g.n_nodes(); ++i)
      if (!s.omega0->contains(g.point(i), tol))
        m.values[i] *= s.omega1_amplitude;
  }
  Nonlinearity f = make_nonlinearity(s);

  ReportWriter rw;
  echo_scenario(rw, s);
  echo_geometry(rw, g);

  rw.section("weights");
  rw.put("m_min", m.values.minCoeff());
  rw.put("m_max", m.values.maxCoeff());
  auto [m_plus, m_minus] = split_pm(m);
  const Region full = whole_domain_region(g);
  rw.put("m_plus_norm", lr_norm(g, m_plus.values, full, m.r));
  rw.put("m_minus_norm", lr_norm(g, m_minus.values, full, m.r));
  rw.put_bool("envelope_pass", validate_nonlinearity(f, 200).pass);

  out.fields.push_back({"m", m.values});
  out.fields.push_back({"delta", g.delta});

  std::string verdict = "completed";
  std::string basis;

  switch (s.pipeline) {
  case PipelineKind::Constants: {
    DiscreteOperator op = make_operator(g);
    rw.section("elliptic");
    GreenNormResult inf_norm = green_operator_norm(op, kInfinity, s.tol.green_cap);
    rw.put("green_norm_inf", inf_norm.value);
    if (!std::isinf(m.r)) {
      GreenNormResult rn = green_operator_norm(op, m.r, s.tol.green_cap);
      rw.put("green_norm_r", rn.value);
      rw.put_bool("green_norm_r_subsampled", rn.subsampled);
    }
    MorelOswaldResult mo = morel_oswald_constant(op, s.tol.green_cap);
    rw.put("morel_oswald_c", mo.c);
    rw.put_bool("morel_oswald_subsampled", mo.subsampled);
    Real m_plus_max = 0;
    for (Index i : g.interior)
      m_plus_max = std::max(m_plus_max, m_plus.values[i]);
    if (m_plus_max > 0) {
      EigenOptions eo;
      eo.residual_tol = s.tol.eigen_residual;
      EigenPair pair = principal_eigenpair(op, m, eo);
      rw.put("lambda1", pair.lambda);
      rw.put("eigen_residual", pair.residual);
      rw.put("phi_min_interior", [&] {
        Real v = kInfinity;
        for (Index i : g.interior)
          v = std::min(v, pair.phi[i]);
        return v;
      }());
      out.fields.push_back({"phi", pair.phi});
    }
    Vector torsion =
        solve_dirichlet(op, Vector::Ones(g.n_nodes()), Vector::Zero(g.n_nodes()));
    out.fields.push_back({"torsion", torsion});
    rw.section("constructions");
    rw.put("c_np", cnp(g.dim(), s.p));
    basis = "elliptic.green_norm_inf, elliptic.morel_oswald_c";
    break;
  }

  case PipelineKind::Poisson: {
    DiscreteOperator op = make_operator(g);
    Vector rhs(g.n_nodes());
    for (Index i = 0; i < g.n_nodes(); ++i) {
      const Vector2 p = g.point(i);
      rhs[i] = (*s.rhs)(p.x(), p.y());
    }
    Vector u = solve_dirichlet(op, rhs, Vector::Zero(g.n_nodes()));
    out.fields.push_back({"u", u});
    rw.section("elliptic");
    rw.put("u_max", u.maxCoeff());
    if (s.reference) {
      const Real err = max_reference_error(g, u, *s.reference);
      rw.put("max_error", err);
      basis = "elliptic.max_error";
    }
    break;
  }

  case PipelineKind::Solve: {
    DiscreteOperator op = make_operator(g);
    EigenpairBracket l22 = eigenpair_bracket(op, m, f);
    rw.section("constructions");
    rw.put("lambda1", l22.eigenpair.lambda);
    rw.put("epsilon", l22.epsilon);
    rw.put("k", l22.k);
    rw.put("sub_margin", l22.sub_margin);
    rw.put("super_margin", l22.super_margin);

    IterationReport rep = monotone_iterate(op, m, f, l22.bracket,
                                           Vector::Zero(g.n_nodes()),
                                           iteration_options(s));
    rw.section("sublinear");
    echo_iteration(rw, rep);
    rw.put("u_max", rep.solution.maxCoeff());
    PositivityReport pos = positivity_certificate(rep.solution, g.delta, g.interior);
    rw.put("min_u", pos.min_u);
    rw.put("min_u_over_delta", pos.min_ratio);
    rw.put_bool("positivity_pass", pos.pass);
    if (s.reference)
      rw.put("max_error", max_reference_error(g, rep.solution, *s.reference));
    out.fields.push_back({"u", rep.solution});
    out.fields.push_back({"sub", l22.bracket.sub});
    out.fields.push_back({"super", l22.bracket.super});
    out.tables.push_back({"sweep_log", sweep_log_csv(rep)});
    verdict = rep.converged && pos.pass ? "solved, strictly positive"
                                        : "solve incomplete";
    basis = "sublinear.converged, sublinear.positivity_pass";
    break;
  }

  case PipelineKind::CertifyExistence: {
    SubdomainPartition part = make_partition(g, *s.omega0);
    rw.section("geometry.partition");
    rw.put_str("omega0_snapped", part.omega0.describe());
    rw.put_int("omega0_nodes", static_cast<long long>(part.omega0_nodes.size()));
    rw.put_int("omega1_nodes", static_cast<long long>(part.omega1_nodes.size()));
    rw.put_int("interface_nodes",
               static_cast<long long>(part.interface_nodes.size()));

    ExistenceOptions opts;
    opts.iteration = iteration_options(s);
    opts.green_cap = s.tol.green_cap;
    ExistenceCertificate cert = certify_existence(m, f, part, opts);
    cert.scenario = s.name;

    rw.section("constructions");
    rw.put("r", cert.r);
    rw.put("c1", cert.c1);
    rw.put("c2", cert.c2);
    rw.put("c3", cert.c3);
    rw.put("c4", cert.c4);
    rw.put("c5", cert.c5);
    rw.put("margin", cert.margin);
    rw.put("M", cert.M);
    rw.put("m_minus_norm_omega1", cert.m_minus_norm_omega1);
    rw.put("delta_integral", cert.delta_integral);
    rw.put("v_bound_coeff", cert.v_bound_coeff);
    rw.put("v_bound_worst", cert.v_bound_worst);
    rw.put("w_min_ratio", cert.w_min_ratio);
    rw.put("w_flux_max", cert.w_flux_max);
    rw.put_bool("morel_oswald_subsampled", cert.morel_oswald_subsampled);
    Real flux_worst = -kInfinity;
    for (const auto& fc : cert.flux)
      flux_worst = std::max(flux_worst, fc.du_dnu - fc.dw_dnu);
    rw.put("flux_worst_margin", flux_worst);
    rw.put_int("flux_nodes", static_cast<long long>(cert.flux.size()));
    rw.put_bool("flux_pass", cert.flux_pass);
    rw.put("sufficient_lhs", cert.sufficient_lhs);
    rw.put("sufficient_rhs", cert.sufficient_rhs);
    rw.put_bool("sufficient_pass", cert.sufficient_pass);

    out.fields.push_back({"w", cert.w});
    out.fields.push_back({"theta", cert.theta});
    out.fields.push_back({"psi", cert.psi});
    out.fields.push_back({"v", cert.v});
    out.fields.push_back({"omega", cert.omega});
    if (cert.flux_pass) {
      rw.section("sublinear");
      echo_iteration(rw, cert.final_report);
      rw.put("min_u", cert.positivity.min_u);
      rw.put("min_u_over_delta", cert.positivity.min_ratio);
      rw.put_bool("positivity_pass", cert.positivity.pass);
      out.fields.push_back({"u", cert.u});
      out.fields.push_back({"super", cert.super});
      out.tables.push_back({"sweep_log", sweep_log_csv(cert.final_report)});
    }
    rw.section("constructions.verdict");
    rw.put_bool("existence_certified", cert.certified);
    verdict = cert.certified ? "existence certified"
                             : (cert.flux_pass ? "flux pass, certificate incomplete"
                                               : "flux condition failed");
    basis = "constructions.flux_pass, sublinear.positivity_pass, "
            "constructions.v_bound_worst";
    break;
  }

  case PipelineKind::CertifyNonexistence: {
    NonexistenceOptions opts;
    opts.green_cap = s.tol.green_cap;
    NonexistenceCertificate cert = certify_nonexistence(m, f, g, opts);
    cert.scenario = s.name;
    rw.section("constructions");
    rw.put("r", cert.r);
    rw.put("c_np", cert.c_np);
    rw.put("green_norm", cert.op_norm.value);
    rw.put_bool("green_norm_subsampled", cert.op_norm.subsampled);
    rw.put("m_plus_norm", cert.m_plus_norm);
    rw.put_bool("has_ball", cert.has_ball);
    if (cert.has_ball) {
      rw.put("ball_center_x", cert.best.ball.center.x());
      if (g.dim() == 2)
        rw.put("ball_center_y", cert.best.ball.center.y());
      rw.put("ball_radius", cert.best.ball.radius);
      rw.put("ball_weight_inf", cert.best.weight_inf);
      rw.put("ball_score", cert.best.score);
      if (cert.barrier.size() > 0) {
        rw.put_bool("barrier_pass", cert.barrier_report.pass);
        rw.put("barrier_max_residual", cert.barrier_report.max_abs_residual);
        out.fields.push_back({"barrier", cert.barrier});
      }
    }
    rw.put("lhs", cert.lhs);
    rw.put("rhs", cert.rhs);
    rw.put_str("note", cert.note);
    verdict = to_string(cert.verdict);
    basis = "constructions.lhs >= constructions.rhs";
    break;
  }

  case PipelineKind::Corollary33: {
    NonexistenceOptions opts;
    opts.green_cap = s.tol.green_cap;
    ConvexCriterionReport rep = certify_nonexistence_convex(m, f, *s.omega1, g, opts);
    rep.scenario = s.name;
    rw.section("constructions");
    rw.put("r", rep.r);
    rw.put("c_np", rep.c_np);
    rw.put("green_norm", rep.op_norm.value);
    rw.put("omega1_measure", rep.omega1_measure);
    rw.put("delta_sq_integral", rep.delta_sq_integral);
    rw.put("lhs", rep.lhs);
    rw.put("rhs", rep.rhs);
    rw.put("m_plus_norm_domain", rep.m_plus_norm_domain);
    rw.put("norm_equality_gap", rep.norm_equality_gap);
    rw.put_bool("pointwise_ok", rep.pointwise_ok);
    rw.put("pointwise_worst", rep.pointwise_worst);
    rw.put_int("pointwise_samples", rep.pointwise_samples);
    verdict = to_string(rep.verdict);
    basis = "constructions.lhs >= constructions.rhs";
    break;
  }
  }

  rw.section("verdict");
  rw.put_str("pipeline", to_string(s.pipeline));
  rw.put_str("verdict", verdict);
  if (!basis.empty())
    rw.put_str("basis", basis);

  out.entries = rw.entries();
  return out;
}

RunReport run_scenario(const Scenario& s, const std::string& out_dir) {
  RunReport rep = execute_scenario(s);
  namespace fs = std::filesystem;
  const fs::path root = fs::path(out_dir) / rep.name;
  fs::create_directories(root / "fields");
  for (const auto& [name, values] : rep.fields) {
    const std::string rel = "fields/" + name + ".csv";
    write_text_file((root / rel).string(), field_csv(*rep.grid, values));
    rep.dump_paths.push_back(rel);
  }
  for (const auto& [name, csv] : rep.tables) {
    const std::string rel = "fields/" + name + ".csv";
    write_text_file((root / rel).string(), csv);
    rep.dump_paths.push_back(rel);
  }
  write_text_file((root / "report.txt").string(), rep.report_text());
  return rep;
}

std::string sweep_scenario(const Scenario& s, const std::string& parameter,
                           const std::vector<Real>& values,
                           const std::string& out_dir) {
  if (std::find(kSweepParameters.begin(), kSweepParameters.end(), parameter) ==
      kSweepParameters.end())
    throw ScenarioError("unknown sweep parameter '" + parameter +
                        "' (use p, resolution, scale or omega1_amplitude)");
  if (values.empty())
    throw ScenarioError("sweep needs at least one value");

  std::vector<RunReport> reps;
  for (Real v : values) {
    Scenario variant = s;
    if (parameter == "p")
      variant.p = v;
    else if (parameter == "resolution")
      variant.resolution = static_cast<int>(std::llround(v));
    else if (parameter == "scale")
      variant.weight_scale = v;
    else
      variant.omega1_amplitude = v;
    reps.push_back(execute_scenario(variant));
  }

  auto numeric = [](const std::string& v) {
    if (v == "true" || v == "false" || v == "inf" || v == "-inf")
      return true;
    try {
      std::size_t pos = 0;
      std::stod(v, &pos);
      return pos == v.size();
    } catch (...) {
      return false;
    }
  };

  std::string csv = parameter;
  std::vector<std::pair<std::string, std::string>> columns;
  for (const auto& e : reps.front().entries) {
    if (!numeric(e[2]))
      continue;
    columns.push_back({e[0], e[1]});
    csv += "," + e[0] + "." + e[1];
  }
  csv += "\n";
  for (std::size_t k = 0; k < reps.size(); ++k) {
    csv += format_real(values[k]);
    for (const auto& [sec, key] : columns) {
      const std::string* v = reps[k].find(sec, key);
      csv += ",";
      csv += v ? *v : "";
    }
    csv += "\n";
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path root = fs::path(out_dir) / s.name;
    fs::create_directories(root);
    write_text_file((root / ("sweep_" + parameter + ".csv")).string(), csv);
  }
  return csv;
}

} // namespace subell
