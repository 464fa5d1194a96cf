// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "evolve.h"
#include "generate.h"
#include "machine.h"

using namespace qtm;

TEST_CASE("seeded machines are small, reproducible, and well formed") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    MachineSpec m = random_machine(seed);
    CHECK(m.state_count <= 4);
    CHECK(m.state_count >= 2);
    CHECK(m.alphabet_size >= 2);
    CHECK(m.alphabet_size <= 3);

    MachineSpec again = random_machine(seed);
    CHECK(serialize_machine(again) == serialize_machine(m));

    HaltReport halt = validate_halt_preservation(m);
    CHECK_MESSAGE(halt.pass(), "seed " << seed);

    UnitarityReport uni = validate_unitarity(m, 2);
    CHECK_MESSAGE(uni.pass(), "seed " << seed << ": key "
                                      << uni.worst_key_norm_dev << " pair "
                                      << uni.worst_pair_dev);
    CHECK(uni.columns_checked > 0);
  }
}

TEST_CASE("every seeded machine can actually halt") {
  // The generator mixes the halt column into the work sector, so some
  // work-state key must carry a target that sets the halt bit.
  for (uint64_t seed = 0; seed < 50; ++seed) {
    MachineSpec m = random_machine(seed);
    bool halts = false;
    for (const auto& [k, targets] : m.rules) {
      if (k.n0 != 0) continue;
      for (const RuleTarget& t : targets) {
        if (t.n1 == 1 && std::abs(t.c) > 1e-12) halts = true;
      }
    }
    CHECK_MESSAGE(halts, "seed " << seed);
  }
}

TEST_CASE("random states are normalized and usually straddle both sectors") {
  int straddled = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    MachineSpec m = random_machine(seed);
    CounterRng rng(seed + 1000);
    StateVector psi = random_state(m, rng);
    CHECK(norm_sq(psi) == doctest::Approx(1.0));
    CHECK(psi.terms.size() >= 1);
    bool work = false, halted = false;
    for (const auto& [c, a] : psi.terms) {
      (c.halt == 0 ? work : halted) = true;
      CHECK(c.q < m.state_count);
    }
    if (work && halted) ++straddled;
  }
  // A drawn amplitude can be exactly zero (probability ~2% per sector), so
  // demand straddling only in the bulk of the sample.
  CHECK(straddled >= 15);
}

TEST_CASE("random states evolve without missing rules for many steps") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    MachineSpec m = random_machine(seed);
    CounterRng rng(seed * 13 + 5);
    StateVector psi = random_state(m, rng);
    StateVector out = evolve(m, psi, 12);
    CHECK(norm_sq(out) == doctest::Approx(1.0).epsilon(1e-10));
  }
}
