// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "measure.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace qtm {

std::pair<int, StateVector> measure_halt(const StateVector& psi,
                                         CounterRng& rng) {
  double total = norm_sq(psi);
  if (total < kDropTol) {
    throw Error(Err::kZeroNorm, "measure_halt on zero state");
  }
  StateVector halted = project_halt(psi, 1);
  double p1 = norm_sq(halted) / total;
  double u = rng.next_double();
  if (u < p1) {
    return {1, normalized(halted)};
  }
  return {0, normalized(project_halt(psi, 0))};
}

std::pair<uint64_t, StateVector> measure_tape(const StateVector& psi,
                                              int32_t alphabet_size,
                                              CounterRng& rng) {
  double total = norm_sq(psi);
  if (total < kDropTol) {
    throw Error(Err::kZeroNorm, "measure_tape on zero state");
  }
  // Group probability mass by label in ascending label order.
  std::map<uint64_t, double> mass;
  for (const auto& [c, a] : psi.terms) {
    mass[tape_label(c.tape, alphabet_size)] += std::norm(a);
  }
  double u = rng.next_double() * total;
  double acc = 0;
  uint64_t chosen = mass.rbegin()->first;
  for (const auto& [label, m] : mass) {
    acc += m;
    if (u < acc) {
      chosen = label;
      break;
    }
  }
  return {chosen, normalized(project_tape(psi, chosen, alphabet_size))};
}

OutcomeRecord run_monitored(const MachineSpec& spec, const StateVector& psi0,
                            int horizon, CounterRng& rng,
                            bool measure_at_zero) {
  OutcomeRecord rec;
  StateVector psi = psi0;
  for (int k = measure_at_zero ? 0 : 1; k <= horizon; ++k) {
    if (k > 0) psi = step(spec, psi);
    auto [flag, post] = measure_halt(psi, rng);
    psi = std::move(post);
    if (flag == 1) {
      auto [label, final_state] = measure_tape(psi, spec.alphabet_size, rng);
      rec.halted_at = k;
      rec.output_label = label;
      rec.final_state = std::move(final_state);
      return rec;
    }
  }
  rec.final_state = std::move(psi);
  return rec;
}

namespace {

void accumulate_halted(const StateVector& psi, int32_t alphabet_size,
                       Distribution* d) {
  for (const auto& [c, a] : psi.terms) {
    if (c.halt == 1) {
      d->entries[tape_label(c.tape, alphabet_size)] += std::norm(a);
    }
  }
}

}  // namespace

Distribution monitored_distribution(const MachineSpec& spec,
                                    const StateVector& psi0, int horizon,
                                    bool measure_at_zero) {
  Distribution d;
  StateVector phi = psi0;
  if (measure_at_zero) {
    accumulate_halted(phi, spec.alphabet_size, &d);
    phi = project_halt(phi, 0);
  }
  for (int k = 1; k <= horizon; ++k) {
    phi = step(spec, phi);
    accumulate_halted(phi, spec.alphabet_size, &d);
    phi = project_halt(phi, 0);
  }
  d.residual = norm_sq(phi);
  return d;
}

Distribution unmonitored_distribution(const MachineSpec& spec,
                                      const StateVector& psi0, int horizon) {
  Distribution d;
  StateVector phi = evolve(spec, psi0, horizon);
  accumulate_halted(phi, spec.alphabet_size, &d);
  d.residual = norm_sq(project_halt(phi, 0));
  return d;
}

CompareReport compare_distributions(const Distribution& a,
                                    const Distribution& b, double tol) {
  CompareReport rep;
  rep.tol = tol;
  std::set<uint64_t> labels;
  for (const auto& [l, p] : a.entries) labels.insert(l);
  for (const auto& [l, p] : b.entries) labels.insert(l);
  for (uint64_t l : labels) {
    CompareRow row;
    row.label = l;
    auto ia = a.entries.find(l);
    auto ib = b.entries.find(l);
    row.monitored = ia == a.entries.end() ? 0 : ia->second;
    row.unmonitored = ib == b.entries.end() ? 0 : ib->second;
    row.diff = std::abs(row.monitored - row.unmonitored);
    if (row.diff > rep.max_diff) {
      rep.max_diff = row.diff;
      rep.worst_label = l;
    }
    rep.rows.push_back(row);
  }
  rep.residual_monitored = a.residual;
  rep.residual_unmonitored = b.residual;
  double rd = std::abs(a.residual - b.residual);
  if (rd > rep.max_diff) {
    rep.max_diff = rd;
    rep.worst_label = 0;
  }
  return rep;
}

}  // namespace qtm
