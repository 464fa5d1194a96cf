// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Projective measurements of the halt flag and the tape, the monitored run
// protocol (measure the halt flag after every step, then read the tape), and
// exact outcome distributions for both the monitored and the single-shot
// unmonitored schemes.

#ifndef QTM_MEASURE_H_
#define QTM_MEASURE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core.h"
#include "evolve.h"
#include "machine.h"

namespace qtm {

struct OutcomeRecord {
  std::optional<int> halted_at;        // step index, absent if never observed
  std::optional<uint64_t> output_label;  // present iff halted_at is present
  StateVector final_state;
};

struct Distribution {
  std::map<uint64_t, double> entries;  // tape label -> probability
  double residual = 0;                 // mass not halted within the horizon
};

// Measures the halt flag. Outcome 1 has probability norm_sq(project_halt(psi,
// 1)); the post-state is the outcome's projection renormalized.
// Throws Error(kZeroNorm) on zero input.
std::pair<int, StateVector> measure_halt(const StateVector& psi,
                                         CounterRng& rng);

// Measures the tape string; outcomes are tape labels.
std::pair<uint64_t, StateVector> measure_tape(const StateVector& psi,
                                              int32_t alphabet_size,
                                              CounterRng& rng);

// Runs the monitored protocol for up to `horizon` steps: measure the halt
// flag (at step 0 when measure_at_zero is set, then after every step); on the
// first outcome 1 measure the tape and stop.
OutcomeRecord run_monitored(const MachineSpec& spec, const StateVector& psi0,
                            int horizon, CounterRng& rng,
                            bool measure_at_zero = true);

// Exact distribution of the monitored protocol: entries[j] accumulates
// |P Q_j (U Pperp)^K psi0|^2 over K = 0..N; the residual is the mass still
// unhalted after the final step.
Distribution monitored_distribution(const MachineSpec& spec,
                                    const StateVector& psi0, int horizon,
                                    bool measure_at_zero = true);

// Exact distribution of a single measurement after N steps:
// entries[j] = |P Q_j U^N psi0|^2, residual = |Pperp U^N psi0|^2.
Distribution unmonitored_distribution(const MachineSpec& spec,
                                      const StateVector& psi0, int horizon);

struct CompareRow {
  uint64_t label = 0;
  double monitored = 0;
  double unmonitored = 0;
  double diff = 0;
};

struct CompareReport {
  std::vector<CompareRow> rows;  // union of labels, ascending
  double residual_monitored = 0;
  double residual_unmonitored = 0;
  double max_diff = 0;           // includes the residual difference
  uint64_t worst_label = 0;      // 0 marks the residual row
  double tol = 1e-10;
  bool pass() const { return max_diff <= tol; }
};

CompareReport compare_distributions(const Distribution& a,
                                    const Distribution& b, double tol);

}  // namespace qtm

#endif  // QTM_MEASURE_H_
