// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evolve.h"

namespace qtm {

StateVector step(const MachineSpec& spec, const StateVector& psi) {
  StateVector out;
  for (const auto& [c, a] : psi.terms) {
    RuleKey k{c.q, c.halt, tape_read(c.tape, c.h)};
    auto it = spec.rules.find(k);
    if (it == spec.rules.end() || it->second.empty()) {
      throw Error(Err::kMissingRule,
                  "no rule for reachable key " + key_string(k));
    }
    for (const RuleTarget& t : it->second) {
      Config nc;
      nc.q = t.q;
      nc.h = c.h + t.d;
      nc.tape = tape_write(c.tape, c.h, t.tau);
      nc.halt = t.n1;
      out.add(nc, a * t.c);
    }
  }
  out.prune();
  return out;
}

StateVector evolve(const MachineSpec& spec, const StateVector& psi, int n) {
  if (n < 0) throw Error(Err::kBadArgument, "negative step count");
  StateVector v = psi;
  for (int i = 0; i < n; ++i) v = step(spec, v);
  return v;
}

StateVector project_halt(const StateVector& psi, int bit) {
  StateVector out;
  for (const auto& [c, a] : psi.terms) {
    if (c.halt == bit) out.terms.emplace(c, a);
  }
  return out;
}

StateVector project_tape(const StateVector& psi, uint64_t label,
                         int32_t alphabet_size) {
  StateVector out;
  for (const auto& [c, a] : psi.terms) {
    if (tape_label(c.tape, alphabet_size) == label) out.terms.emplace(c, a);
  }
  return out;
}

}  // namespace qtm
