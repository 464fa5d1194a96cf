// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "sample.h"

#include <cmath>

namespace qtm {

namespace {

// Regularized upper incomplete gamma Q(a, x) via power series (x < a+1) or
// Lentz continued fraction (x >= a+1).
double igamma_q(double a, double x) {
  if (x <= 0) return 1.0;
  double lg = std::lgamma(a);
  if (x < a + 1) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  double tiny = 1e-300;
  double b = x + 1 - a;
  double c = 1 / tiny;
  double d = 1 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace

double chi_squared_tail(int dof, double x) {
  if (dof <= 0) return 1.0;
  return igamma_q(double(dof) / 2.0, x / 2.0);
}

SampleReport run_sampling(const MachineSpec& spec, const StateVector& psi0,
                          int horizon, int64_t runs, uint64_t seed,
                          bool measure_at_zero) {
  SampleReport rep;
  rep.seed = seed;
  rep.runs = runs;
  rep.horizon = horizon;
  CounterRng master(seed);
  for (int64_t i = 0; i < runs; ++i) {
    CounterRng rng = master.stream(uint64_t(i));
    OutcomeRecord rec =
        run_monitored(spec, psi0, horizon, rng, measure_at_zero);
    if (rec.halted_at) {
      rep.label_counts[*rec.output_label] += 1;
      rep.halted_at_counts[*rec.halted_at] += 1;
    } else {
      rep.unhalted += 1;
    }
  }
  rep.exact = monitored_distribution(spec, psi0, horizon, measure_at_zero);

  // Chi-squared over categories with nonzero expected probability.
  if (runs > 0) {
    int categories = 0;
    double chi2 = 0;
    for (const auto& [label, p] : rep.exact.entries) {
      if (p <= 0) continue;
      double expected = p * double(runs);
      auto it = rep.label_counts.find(label);
      double observed = it == rep.label_counts.end() ? 0 : double(it->second);
      chi2 += (observed - expected) * (observed - expected) / expected;
      ++categories;
    }
    if (rep.exact.residual > 0) {
      double expected = rep.exact.residual * double(runs);
      chi2 += (double(rep.unhalted) - expected) * (double(rep.unhalted) - expected) /
              expected;
      ++categories;
    }
    rep.chi2 = chi2;
    rep.dof = categories > 1 ? categories - 1 : 0;
    rep.p_value = chi_squared_tail(rep.dof, rep.chi2);
  }
  return rep;
}

}  // namespace qtm
