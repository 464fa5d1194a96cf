// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo sampling of the monitored protocol and the chi-squared
// goodness-of-fit comparison against the exact distribution.

#ifndef QTM_SAMPLE_H_
#define QTM_SAMPLE_H_

#include <cstdint>
#include <map>

#include "measure.h"

namespace qtm {

struct SampleReport {
  uint64_t seed = 0;
  int64_t runs = 0;
  int horizon = 0;
  std::map<uint64_t, int64_t> label_counts;
  std::map<int, int64_t> halted_at_counts;
  int64_t unhalted = 0;
  double chi2 = 0;
  int dof = 0;
  double p_value = 1.0;
  Distribution exact;  // monitored distribution the test compares against
};

// Runs `runs` independent monitored executions with per-run generators
// derived from the master seed and tallies outcomes. The chi-squared
// statistic compares label frequencies (plus the never-halted category when
// it has expected mass) against monitored_distribution.
SampleReport run_sampling(const MachineSpec& spec, const StateVector& psi0,
                          int horizon, int64_t runs, uint64_t seed,
                          bool measure_at_zero = true);

// Upper tail of the chi-squared distribution with `dof` degrees of freedom:
// Pr[X >= x]. dof = 0 returns 1.
double chi_squared_tail(int dof, double x);

}  // namespace qtm

#endif  // QTM_SAMPLE_H_
