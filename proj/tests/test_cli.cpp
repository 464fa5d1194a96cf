// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Spawns the installed binary and checks exit codes and report stability.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(QTM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.out.append(buf.data(), n);
  }
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const char* name) {
  return std::string(QTM_MACHINES_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("validate verdicts map to exit codes") {
  RunResult good = run("validate " + fixture("two_phase.qtm"));
  CHECK(good.code == 0);
  CHECK(good.out.find("halt-preservation: PASS") != std::string::npos);
  CHECK(good.out.find("unitarity: PASS") != std::string::npos);
  CHECK(good.out.find("overall: PASS") != std::string::npos);

  RunResult bad = run("validate " + fixture("halt_violator.qtm"));
  CHECK(bad.code == 1);
  CHECK(bad.out.find("halt-preservation: FAIL") != std::string::npos);
  CHECK(bad.out.find("writes symbol 0 over read symbol 1") !=
        std::string::npos);
  CHECK(bad.out.find("unitarity: FAIL") != std::string::npos);
}

TEST_CASE("compare passes the sound machine and rejects the violator") {
  RunResult ok =
      run("compare " + fixture("two_phase.qtm") + " --steps 6 --initial 1:1");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("max diff") != std::string::npos);
  CHECK(ok.out.find("PASS") != std::string::npos);

  // Without --force the violator is refused up front.
  RunResult refused =
      run("compare " + fixture("halt_violator.qtm") + " --initial 1:1");
  CHECK(refused.code == 1);
  CHECK(refused.out.find("fails validation") != std::string::npos);

  // With --force it runs and reports the genuine disagreement.
  RunResult forced = run("compare " + fixture("halt_violator.qtm") +
                         " --initial 1:1 --steps 3 --force");
  CHECK(forced.code == 1);
  CHECK(forced.out.find("FAIL") != std::string::npos);
}

TEST_CASE("operator checks split verdicts by machine") {
  RunResult pm = run("qnd " + fixture("permutation.qtm") +
                     " --window 4 --max-steps 3");
  CHECK(pm.code == 0);
  CHECK(pm.out.find("overall: PASS") != std::string::npos);

  // two_phase keeps injecting fresh halting amplitude; the adjoint-based
  // projection relations deviate by 1/4 and the verdict is honest.
  RunResult tp = run("qnd " + fixture("two_phase.qtm") +
                     " --window 4 --max-steps 3");
  CHECK(tp.code == 1);
  CHECK(tp.out.find("commutation scan") != std::string::npos);
  CHECK(tp.out.find("PASS") != std::string::npos);
  CHECK(tp.out.find("projection relations") != std::string::npos);
  CHECK(tp.out.find("overall: FAIL") != std::string::npos);
}

TEST_CASE("resource exhaustion exits with the resource code") {
  RunResult r = run("qnd " + fixture("two_phase.qtm") +
                    " --window 1 --max-steps 4");
  CHECK(r.code == 3);
  CHECK(r.out.find("window") != std::string::npos);
}

TEST_CASE("parse problems exit with the parse code") {
  std::string path = "/tmp/qtm_cli_bad_machine.qtm";
  FILE* f = fopen(path.c_str(), "w");
  REQUIRE(f != nullptr);
  fputs("qtm 1\nalphabet 3\nstates 2\ninitial 0\nrule 0 0 9 -> 0 0 0 R 1 0\n",
        f);
  fclose(f);
  RunResult r = run("validate " + path);
  CHECK(r.code == 2);
  CHECK(r.out.find("error") != std::string::npos);
  std::remove(path.c_str());

  RunResult missing = run("validate /nonexistent/machine.qtm");
  CHECK(missing.code == 2);

  RunResult badinit = run("compare " + fixture("two_phase.qtm") +
                          " --initial nonsense");
  CHECK(badinit.code == 2);
  CHECK(badinit.out.find("--initial") != std::string::npos);

  RunResult badsym = run("compare " + fixture("two_phase.qtm") +
                         " --initial 0:7");
  CHECK(badsym.code == 2);
  CHECK(badsym.out.find("alphabet") != std::string::npos);

  RunResult nosub = run("");
  CHECK(nosub.code == 2);
}

TEST_CASE("reports are byte-identical across invocations") {
  for (const std::string& cmd :
       {std::string("validate ") + fixture("two_phase.qtm") +
            " --format records",
        std::string("compare ") + fixture("two_phase.qtm") +
            " --steps 6 --initial 1:1 --format records",
        std::string("qnd ") + fixture("permutation.qtm") +
            " --window 4 --max-steps 3 --format records",
        std::string("sample ") + fixture("two_phase.qtm") +
            " --steps 6 --initial 1:1 --runs 400 --seed 7 --format records"}) {
    RunResult a = run(cmd);
    RunResult b = run(cmd);
    CHECK_MESSAGE(a.out == b.out, cmd);
    CHECK(a.code == b.code);
    CHECK(!a.out.empty());
  }
}

TEST_CASE("sampling reports frequencies and the fit statistic") {
  RunResult r = run("sample " + fixture("two_phase.qtm") +
                    " --steps 6 --initial 1:1 --runs 400 --seed 7");
  CHECK(r.code == 0);
  CHECK(r.out.find("chi-squared") != std::string::npos);
  CHECK(r.out.find("halting-step histogram") != std::string::npos);

  // Zero runs: an empty histogram is still a valid report.
  RunResult zero = run("sample " + fixture("two_phase.qtm") +
                       " --steps 6 --initial 1:1 --runs 0 --seed 7");
  CHECK(zero.code == 0);
}

TEST_CASE("records format stays machine-parseable") {
  RunResult r = run("compare " + fixture("two_phase.qtm") +
                    " --steps 6 --initial 1:1 --format records");
  CHECK(r.code == 0);
  CHECK(r.out.find("summary max_diff=") != std::string::npos);
  CHECK(r.out.find("row label=") != std::string::npos);
  CHECK(r.out.find("pass=1") != std::string::npos);
}
