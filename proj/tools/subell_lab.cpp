#include "subell/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

// --sweep p=0.5,0.9,0.99
bool parse_sweep(const std::string& text, std::string& param,
                 std::vector<subell::Real>& values) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos)
    return false;
  param = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    std::size_t comma = rest.find(',', pos);
    if (comma == std::string::npos)
      comma = rest.size();
    try {
      values.push_back(std::stod(rest.substr(pos, comma - pos)));
    } catch (...) {
      return false;
    }
    pos = comma + 1;
  }
  return !values.empty();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"subell — existence and nonexistence certificates for the "
               "sublinear Dirichlet problem -Lap u = m f(u)"};
  std::string config, out_dir = "./out", sweep;
  int resolution = 0;
  app.add_option("--config", config, "scenario config file")->required();
  app.add_option("--out-dir", out_dir, "output directory (default ./out)");
  app.add_option("--resolution", resolution, "override the grid resolution");
  app.add_option("--sweep", sweep, "parameter sweep, e.g. p=0.5,0.9,0.99");
  CLI11_PARSE(app, argc, argv);

  subell::Scenario scenario;
  try {
    scenario = subell::parse_scenario(config);
    if (resolution > 0)
      scenario.resolution = resolution;
    if (scenario.resolution < 4)
      throw subell::ScenarioError("resolution must be at least 4");
  } catch (const subell::ScenarioError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (!sweep.empty()) {
      std::string param;
      std::vector<subell::Real> values;
      if (!parse_sweep(sweep, param, values)) {
        std::fprintf(stderr, "config error: malformed --sweep '%s'\n", sweep.c_str());
        return 2;
      }
      try {
        subell::sweep_scenario(scenario, param, values, out_dir);
      } catch (const subell::ScenarioError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
      }
      const auto t1 = std::chrono::steady_clock::now();
      std::printf("%s: sweep %s over %zu values -> %s/%s/sweep_%s.csv (%.1f ms)\n",
                  scenario.name.c_str(), param.c_str(), values.size(),
                  out_dir.c_str(), scenario.name.c_str(), param.c_str(),
                  std::chrono::duration<double, std::milli>(t1 - t0).count());
      return 0;
    }

    subell::RunReport rep = subell::run_scenario(scenario, out_dir);
    const auto t1 = std::chrono::steady_clock::now();
    rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const std::string* verdict = rep.find("verdict", "verdict");
    std::printf("%s: %s -> %s/%s/report.txt (%.1f ms)\n", scenario.name.c_str(),
                verdict ? verdict->c_str() : "done", out_dir.c_str(),
                scenario.name.c_str(), rep.wall_ms);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pipeline error: %s\n", e.what());
    return 1;
  }
}
