// Verifies the CLI exit-code contract: 0 completed, 1 pipeline failure,
// 2 config error. Usage: cli_exit_checker <subell_lab-path> <source-dir>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

namespace {

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status < 0)
    return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int g_failures = 0;

void expect(const std::string& what, int got, int want) {
  const bool ok = got == want;
  std::printf("%s: exit %d (want %d) %s\n", what.c_str(), got, want,
              ok ? "ok" : "WRONG");
  if (!ok)
    ++g_failures;
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: cli_exit_checker <subell_lab> <source-dir>\n");
    return 2;
  }
  const std::string lab = argv[1];
  const std::string src = argv[2];
  const std::string quiet = " > /dev/null 2>&1";

  expect("valid run",
         run(lab + " --config " + src + "/scenarios/interval_basic.cfg" +
             " --out-dir cli_exit_out --resolution 32" + quiet),
         0);
  expect("verdict-carrying run (flux fail is data, not an error)",
         run(lab + " --config " + src + "/scenarios/flux_fail.cfg" +
             " --out-dir cli_exit_out --resolution 120" + quiet),
         0);
  expect("config error",
         run(lab + " --config " + src + "/tests/data/bad_p.cfg" + quiet), 2);
  expect("missing file",
         run(lab + " --config " + src + "/tests/data/nope.cfg" + quiet), 2);
  expect("pipeline error",
         run(lab + " --config " + src + "/tests/data/pipeline_error.cfg" +
             " --out-dir cli_exit_out" + quiet),
         1);
  expect("bad sweep parameter",
         run(lab + " --config " + src + "/scenarios/interval_basic.cfg" +
             " --sweep volume=1,2" + quiet),
         2);
  return g_failures == 0 ? 0 : 1;
}
