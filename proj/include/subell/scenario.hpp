#pragma once

#include "subell/core.hpp"
#include "subell/expression.hpp"
#include "subell/geometry.hpp"
#include "subell/report.hpp"
#include "subell/weights.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subell {

/// Config-level failure (unknown keys, malformed values, inconsistent specs).
/// The CLI maps it to exit code 2.
class ScenarioError : public std::runtime_error {
public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

enum class PipelineKind {
  Solve,
  Poisson,
  CertifyExistence,
  CertifyNonexistence,
  Corollary33,
  Constants
};

std::string to_string(PipelineKind k);

struct ToleranceConfig {
  Real linear_residual = 1e-10;
  Real eigen_residual = 1e-8;
  Real change_tol = 1e-10;
  Real residual_tol = 1e-8;
  int max_sweeps = 500;
  long long green_cap = 50000;
};

struct Scenario {
  std::string name;
  Domain domain = Domain::interval(0, 1);
  int resolution = 0;
  std::vector<WeightPiece> pieces;
  Real weight_r = kInfinity;
  SamplingMode sampling = SamplingMode::Nodal;
  std::string family = "power"; // power | power-plus-min
  Real p = 0.5;
  Real kappa = 1.0;
  PipelineKind pipeline = PipelineKind::Constants;
  std::optional<RegionSpec> omega0;
  std::optional<RegionSpec> omega1;
  std::optional<Expression> reference;
  std::optional<Expression> rhs;
  ToleranceConfig tol;
  // sweep hooks
  Real weight_scale = 1.0;
  Real omega1_amplitude = 1.0;
};

/// Parses and fully validates an INI-style scenario file; throws a
/// ScenarioError listing every violation.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& name);

struct RunReport {
  std::string name;
  std::vector<std::array<std::string, 3>> entries; // section, key, value
  std::vector<std::pair<std::string, Vector>> fields;
  std::vector<std::pair<std::string, std::string>> tables; // extra CSV text
  std::shared_ptr<const Grid> grid;
  std::vector<std::string> dump_paths;
  double wall_ms = 0.0; // measured by the CLI; never serialized

  std::string report_text() const;
  const std::string* find(const std::string& section, const std::string& key) const;
  Real find_real(const std::string& section, const std::string& key) const;
};

/// Runs the selected pipeline in memory.
RunReport execute_scenario(const Scenario& s);

/// Runs and writes <out_dir>/<name>/report.txt plus fields/*.csv.
RunReport run_scenario(const Scenario& s, const std::string& out_dir);

inline const std::vector<std::string> kSweepParameters = {
    "p", "resolution", "scale", "omega1_amplitude"};

/// One run per value; returns the CSV table (also written to
/// <out_dir>/<name>/sweep_<param>.csv when out_dir is nonempty).
std::string sweep_scenario(const Scenario& s, const std::string& parameter,
                           const std::vector<Real>& values,
                           const std::string& out_dir);

} // namespace subell
