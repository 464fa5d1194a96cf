// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// One unitary step of the machine on sparse states, N-step evolution, and
// the spectral projections onto the halt flag and onto single tape strings.

#ifndef QTM_EVOLVE_H_
#define QTM_EVOLVE_H_

#include "core.h"
#include "machine.h"

namespace qtm {

// Applies the transition table once. For every term (C, a) the rule list for
// key (q_C, halt_C, tape(h_C)) distributes a*c over targets
// (q', h_C + d, tape with tau written at h_C, n0'). Amplitudes on identical
// configurations sum; magnitudes below kDropTol are pruned afterwards.
// Throws Error(kMissingRule) when a populated configuration has no rule list.
StateVector step(const MachineSpec& spec, const StateVector& psi);

// N-fold step; N = 0 returns the input.
StateVector evolve(const MachineSpec& spec, const StateVector& psi, int n);

// Keeps exactly the terms with the given halt bit. No renormalization.
StateVector project_halt(const StateVector& psi, int bit);

// Keeps exactly the terms whose tape label equals `label`. No renormalization.
StateVector project_tape(const StateVector& psi, uint64_t label,
                         int32_t alphabet_size);

}  // namespace qtm

#endif  // QTM_EVOLVE_H_
