// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded family of small validated machines with genuine halting flux, plus
// random initial states for them. Used by the property-test harness.

#ifndef QTM_GENERATE_H_
#define QTM_GENERATE_H_

#include "core.h"
#include "machine.h"

namespace qtm {

// Machine with 1-3 work states, one flow state, alphabet 2-3. The work-sector
// transition block is drawn as a signed permutation followed by random Givens
// column rotations (the first always mixing the halt column), so columns stay
// orthonormal and the halt amplitude is nonzero. Halting writes the marker
// symbol (alphabet_size - 1) and parks the head walking right over a frozen
// tape. Passes both validators for every seed.
MachineSpec random_machine(uint64_t seed);

// Normalized state for a random_machine spec: a few work-sector terms with
// marker-free tapes near the origin plus one already-halted term, so monitored
// runs exercise both sectors from step 0.
StateVector random_state(const MachineSpec& spec, CounterRng& rng);

}  // namespace qtm

#endif  // QTM_GENERATE_H_
