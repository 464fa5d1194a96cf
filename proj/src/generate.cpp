// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "generate.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qtm {
namespace {

int64_t rand_below(CounterRng& rng, int64_t n) {
  return int64_t(rng.next_u64() % uint64_t(n));
}

int64_t rand_int(CounterRng& rng, int64_t lo, int64_t hi) {
  return lo + rand_below(rng, hi - lo + 1);
}

}  // namespace

MachineSpec random_machine(uint64_t seed) {
  CounterRng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  int32_t work_states = 1 + int32_t(seed % 3);
  int32_t a = 2 + int32_t((seed / 3) % 2);
  int32_t marker = a - 1;
  int32_t flow = work_states;

  // Row index = work key (p, 0, s); column index = target slot, the last
  // column being the halting slot (marker, 1, flow).
  struct Slot {
    int32_t tau, n1, q;
  };
  std::vector<Slot> slots;
  for (int32_t tau = 0; tau < a; ++tau)
    for (int32_t q = 0; q < work_states; ++q) slots.push_back({tau, 0, q});
  slots.push_back({marker, 1, flow});
  int32_t nk = work_states * a;
  int32_t ns = int32_t(slots.size());

  std::vector<std::vector<cxd>> mat(nk, std::vector<cxd>(ns, cxd(0, 0)));
  std::vector<int32_t> perm(ns);
  std::iota(perm.begin(), perm.end(), 0);
  for (int32_t i = ns - 1; i > 0; --i) {
    std::swap(perm[i], perm[rand_below(rng, i + 1)]);
  }
  static const cxd kPhases[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int32_t i = 0; i < nk; ++i) {
    mat[i][perm[i]] = kPhases[rand_below(rng, 4)];
  }

  // Unitary column rotations preserve row orthonormality; requiring a != 0
  // and (b, c) != (0, 0) makes every rotation strictly mixing, so the first
  // one leaves the halt column with nonzero weight.
  int32_t halt_col = ns - 1;
  int32_t nrot = 2 + int32_t(seed % 3);
  for (int32_t r = 0; r < nrot; ++r) {
    int32_t c1, c2;
    if (r == 0) {
      c1 = halt_col;
      c2 = int32_t(rand_below(rng, ns - 1));
    } else {
      c1 = int32_t(rand_below(rng, ns));
      do {
        c2 = int32_t(rand_below(rng, ns));
      } while (c2 == c1);
    }
    int64_t ga, gb, gc;
    do {
      ga = rand_int(rng, -3, 3);
      gb = rand_int(rng, -3, 3);
      gc = rand_int(rng, -3, 3);
    } while (ga == 0 || (gb == 0 && gc == 0));
    double nrm = std::sqrt(double(ga * ga + gb * gb + gc * gc));
    double co = double(ga) / nrm;
    cxd si = cxd(double(gb), double(gc)) / nrm;
    for (auto& row : mat) {
      cxd x = row[c1], y = row[c2];
      row[c1] = co * x - std::conj(si) * y;
      row[c2] = si * x + co * y;
    }
  }

  MachineSpec spec;
  spec.alphabet_size = a;
  spec.state_count = work_states + 1;
  spec.initial_state = 0;
  for (int32_t p = 0; p < work_states; ++p) {
    for (int32_t sym = 0; sym < a; ++sym) {
      RuleKey key{p, 0, sym};
      int32_t row = p * a + sym;
      for (int32_t j = 0; j < ns; ++j) {
        if (std::abs(mat[row][j]) <= 1e-14) continue;
        spec.rules[key].push_back(
            RuleTarget{slots[j].tau, slots[j].n1, slots[j].q, +1, mat[row][j]});
      }
    }
  }
  for (int32_t sym = 0; sym < a; ++sym) {
    if (sym == marker) continue;
    spec.rules[RuleKey{flow, 1, sym}].push_back(
        RuleTarget{sym, 1, flow, +1, cxd(1, 0)});
  }
  return spec;
}

StateVector random_state(const MachineSpec& spec, CounterRng& rng) {
  int32_t a = spec.alphabet_size;
  int32_t marker = a - 1;
  int32_t work_states = spec.state_count - 1;
  int32_t flow = spec.state_count - 1;
  std::vector<int32_t> nonmarker;
  for (int32_t s = 0; s < a; ++s)
    if (s != marker) nonmarker.push_back(s);

  for (;;) {
    StateVector psi;
    for (int k = 0; k < 4; ++k) {
      int32_t q = int32_t(rand_below(rng, work_states));
      int32_t h = int32_t(rand_int(rng, -1, 1));
      Tape t;
      int32_t cells = int32_t(rand_int(rng, 0, 2));
      std::vector<int32_t> pos{-1, 0, 1};
      for (int32_t c = 0; c < cells; ++c) {
        int32_t pick = int32_t(rand_below(rng, int64_t(pos.size())));
        int32_t cell = pos[pick];
        pos.erase(pos.begin() + pick);
        t = tape_write(t, cell,
                       nonmarker[rand_below(rng, int64_t(nonmarker.size()))]);
      }
      psi.add(Config{q, h, t, 0},
              cxd(double(rand_int(rng, -3, 3)), double(rand_int(rng, -3, 3))));
    }
    Tape t;
    if (rng.next_double() < 0.7) {
      t = tape_write(t, -2, int32_t(rand_below(rng, a)));
    }
    psi.add(Config{flow, 0, t, 1},
            cxd(double(rand_int(rng, -3, 3)), double(rand_int(rng, -3, 3))));
    psi.prune();
    double n2 = norm_sq(psi);
    if (n2 > 1e-18) return normalized(psi);
  }
}

}  // namespace qtm
