// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Machine specification: alphabet, states, and the amplitude-valued
// transition table, plus the line-oriented file format and the two
// well-formedness validators.

#ifndef QTM_MACHINE_H_
#define QTM_MACHINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core.h"

namespace qtm {

struct RuleKey {
  int32_t p = 0;      // internal state read
  int32_t n0 = 0;     // halt bit read
  int32_t sigma = 0;  // tape symbol read

  auto operator<=>(const RuleKey&) const = default;
  bool operator==(const RuleKey&) const = default;
};

struct RuleTarget {
  int32_t tau = 0;   // symbol written
  int32_t n1 = 0;    // halt bit written
  int32_t q = 0;     // next internal state
  int32_t d = +1;    // head move, -1 or +1
  cxd c;             // amplitude
};

struct MachineSpec {
  int32_t alphabet_size = 1;  // symbol 0 is the blank
  int32_t state_count = 1;
  int32_t initial_state = 0;
  std::map<RuleKey, std::vector<RuleTarget>> rules;
};

std::string key_string(const RuleKey& k);
std::string target_string(const RuleTarget& t);

// Parses the line-oriented machine format:
//   qtm 1
//   alphabet A
//   states S
//   initial q
//   rule p n0 sigma -> tau n0' q d re im
// d is L or R; '#' starts a comment; a key repeated across lines superposes
// targets; the amplitude tokens 1/sqrt2 and -1/sqrt2 are accepted.
// Throws Error(kParse) with a line number on any defect.
MachineSpec parse_machine(const std::string& text);
MachineSpec load_machine(const std::string& path);

// Canonical emission; parse(serialize(spec)) == spec structurally.
std::string serialize_machine(const MachineSpec& spec);

struct HaltReport {
  std::vector<std::string> violations;
  bool pass() const { return violations.empty(); }
};

// Checks that every rule reading halt bit 1 writes back the read symbol and
// keeps the halt bit set, i.e. a halted configuration's tape is frozen.
HaltReport validate_halt_preservation(const MachineSpec& spec);

struct UnitarityReport {
  double tol = 1e-10;
  double worst_key_norm_dev = 0;
  std::string worst_key;
  double worst_pair_dev = 0;
  std::string worst_pair;
  int64_t basis_size = 0;
  int64_t columns_checked = 0;
  int64_t columns_excluded = 0;  // configurations whose key has no rules
  bool pass() const {
    return worst_key_norm_dev <= tol && worst_pair_dev <= tol;
  }
};

// Checks per-key amplitude norms and pairwise orthogonality of the evolution
// columns over a truncated configuration window (all tapes within the seed
// radius, all states, both halt bits). Columns without a declared rule are
// excluded and counted. Implemented in analysis.cpp on top of the truncated
// model builder.
UnitarityReport validate_unitarity(const MachineSpec& spec,
                                   int32_t seed_radius = 2,
                                   double tol = 1e-10,
                                   int64_t basis_cap = 200000);

}  // namespace qtm

#endif  // QTM_MACHINE_H_
