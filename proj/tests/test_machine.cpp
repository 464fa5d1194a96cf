// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "machine.h"

using namespace qtm;

namespace {

std::string fixture(const char* name) {
  return std::string(QTM_MACHINES_DIR) + "/" + name;
}

Err code_of(const std::string& text) {
  try {
    parse_machine(text);
  } catch (const Error& e) {
    return e.code;
  }
  throw std::runtime_error("expected a parse failure");
}

}  // namespace

TEST_CASE("bundled machines load and round-trip through serialization") {
  for (const char* name :
       {"two_phase.qtm", "permutation.qtm", "shuttle.qtm",
        "halt_violator.qtm"}) {
    MachineSpec m = load_machine(fixture(name));
    std::string text = serialize_machine(m);
    MachineSpec m2 = parse_machine(text);
    CHECK(m2.alphabet_size == m.alphabet_size);
    CHECK(m2.state_count == m.state_count);
    CHECK(m2.initial_state == m.initial_state);
    CHECK(m2.rules.size() == m.rules.size());
    CHECK(serialize_machine(m2) == text);
  }
}

TEST_CASE("parser accepts sqrt amplitudes and superposed keys") {
  MachineSpec m = parse_machine(
      "qtm 1\n"
      "alphabet 2\n"
      "states 2\n"
      "initial 0\n"
      "# split into two branches\n"
      "rule 0 0 0 -> 1 1 1 R 1/sqrt2 0\n"
      "rule 0 0 0 -> 1 0 1 R -1/sqrt2 0\n");
  RuleKey k{0, 0, 0};
  REQUIRE(m.rules.count(k) == 1);
  CHECK(m.rules.at(k).size() == 2);
  double a = std::abs(m.rules.at(k)[0].c);
  CHECK(a == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("parser rejects malformed inputs with parse errors") {
  CHECK(code_of("garbage\n") == Err::kParse);
  CHECK(code_of("qtm 2\nalphabet 2\nstates 1\ninitial 0\n") == Err::kParse);
  // Missing header fields.
  CHECK(code_of("qtm 1\nstates 1\ninitial 0\n") == Err::kParse);
  // Symbol outside the alphabet.
  CHECK(code_of("qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
                "rule 0 0 5 -> 0 0 0 R 1 0\n") == Err::kParse);
  // State out of range.
  CHECK(code_of("qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
                "rule 0 0 0 -> 0 0 3 R 1 0\n") == Err::kParse);
  // Bad direction token.
  CHECK(code_of("qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
                "rule 0 0 0 -> 0 0 0 X 1 0\n") == Err::kParse);
  // Duplicate slot: identical key and target tuple.
  CHECK(code_of("qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
                "rule 0 0 0 -> 0 0 0 R 1 0\n"
                "rule 0 0 0 -> 0 0 0 R 0 1\n") == Err::kParse);
  // Initial state out of range.
  CHECK(code_of("qtm 1\nalphabet 2\nstates 1\ninitial 5\n") == Err::kParse);

  try {
    parse_machine("qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
                  "rule 0 0 0 -> 0 0 0 Q 1 0\n");
  } catch (const Error& e) {
    // The message carries the offending line number.
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
}

TEST_CASE("missing file reports a parse error") {
  CHECK_THROWS_AS(load_machine("/nonexistent/machine.qtm"), Error);
  try {
    load_machine("/nonexistent/machine.qtm");
  } catch (const Error& e) {
    CHECK(e.code == Err::kParse);
  }
}

TEST_CASE("halt preservation holds for the three sound machines") {
  for (const char* name : {"two_phase.qtm", "permutation.qtm",
                           "shuttle.qtm"}) {
    MachineSpec m = load_machine(fixture(name));
    HaltReport r = validate_halt_preservation(m);
    CHECK_MESSAGE(r.pass(), name);
  }
}

TEST_CASE("halt violator is flagged with a specific violation") {
  MachineSpec m = load_machine(fixture("halt_violator.qtm"));
  HaltReport r = validate_halt_preservation(m);
  REQUIRE(r.violations.size() == 1);
  // The violating rule reads halted symbol 1 and writes 0.
  CHECK(r.violations[0].find("p=2") != std::string::npos);
  CHECK(r.violations[0].find("sigma=1") != std::string::npos);
}

TEST_CASE("unitarity validation passes the sound machines") {
  for (const char* name : {"two_phase.qtm", "permutation.qtm",
                           "shuttle.qtm"}) {
    MachineSpec m = load_machine(fixture(name));
    UnitarityReport r = validate_unitarity(m, 2);
    CHECK_MESSAGE(r.pass(), name << ": key dev " << r.worst_key_norm_dev
                                 << ", pair dev " << r.worst_pair_dev);
    CHECK(r.columns_checked > 0);
  }
}

TEST_CASE("unitarity validation pinpoints colliding columns") {
  MachineSpec m = load_machine(fixture("halt_violator.qtm"));
  UnitarityReport r = validate_unitarity(m, 2);
  CHECK_FALSE(r.pass());
  // Two halted columns map onto the same configuration: overlap magnitude 1.
  CHECK(r.worst_pair_dev == doctest::Approx(1.0));
  CHECK(r.worst_pair.find("p=2 n0=1 sigma=0") != std::string::npos);
  CHECK(r.worst_pair.find("p=2 n0=1 sigma=1") != std::string::npos);
  CHECK(r.worst_pair.find("head offset 0") != std::string::npos);
}

TEST_CASE("unitarity validation catches non-normalized rule rows") {
  // Single rule with amplitude 0.5: column norm 0.25.
  MachineSpec m = parse_machine(
      "qtm 1\nalphabet 2\nstates 1\ninitial 0\n"
      "rule 0 0 0 -> 0 0 0 R 0.5 0\n"
      "rule 0 0 1 -> 1 0 0 R 1 0\n"
      "rule 0 1 0 -> 0 1 0 R 1 0\n"
      "rule 0 1 1 -> 1 1 0 R 1 0\n");
  UnitarityReport r = validate_unitarity(m, 2);
  CHECK_FALSE(r.pass());
  CHECK(r.worst_key_norm_dev == doctest::Approx(0.75));
  CHECK(r.worst_key.find("p=0 n0=0 sigma=0") != std::string::npos);
}
