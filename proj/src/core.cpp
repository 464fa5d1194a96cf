// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core.h"

#include <cmath>

namespace qtm {

int32_t tape_read(const Tape& t, int32_t i) {
  auto it = t.cells.find(i);
  return it == t.cells.end() ? 0 : it->second;
}

Tape tape_write(const Tape& t, int32_t i, int32_t sym) {
  Tape out = t;
  if (sym == 0) {
    out.cells.erase(i);
  } else {
    out.cells[i] = sym;
  }
  return out;
}

namespace {

uint64_t zigzag(int64_t v) {
  return v >= 0 ? uint64_t(v) * 2 : uint64_t(-v) * 2 - 1;
}

uint64_t checked_add(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw Error(Err::kCapacity, "tape label exceeds encoding range");
  }
  return r;
}

uint64_t checked_mul(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw Error(Err::kCapacity, "tape label exceeds encoding range");
  }
  return r;
}

// Cantor pairing (a+b)(a+b+1)/2 + b, overflow-checked.
uint64_t pair(uint64_t a, uint64_t b) {
  uint64_t s = checked_add(a, b);
  uint64_t p = checked_mul(s, checked_add(s, 1));
  return checked_add(p / 2, b);
}

}  // namespace

uint64_t tape_label(const Tape& t, int32_t alphabet_size) {
  if (t.cells.empty()) return 1;
  int32_t lo = t.cells.begin()->first;
  int32_t hi = t.cells.rbegin()->first;
  uint64_t value = 0;
  uint64_t scale = 1;
  for (int32_t i = lo; i <= hi; ++i) {
    value = checked_add(value, checked_mul(scale, uint64_t(tape_read(t, i))));
    if (i < hi) scale = checked_mul(scale, uint64_t(alphabet_size));
  }
  return checked_add(pair(zigzag(lo), value), 1);
}

void StateVector::prune() {
  for (auto it = terms.begin(); it != terms.end();) {
    if (std::abs(it->second) < kDropTol) {
      it = terms.erase(it);
    } else {
      ++it;
    }
  }
}

cxd inner(const StateVector& a, const StateVector& b) {
  // Walk the smaller map.
  const StateVector& s = a.terms.size() <= b.terms.size() ? a : b;
  const StateVector& l = a.terms.size() <= b.terms.size() ? b : a;
  cxd acc = 0;
  for (const auto& [c, v] : s.terms) {
    auto it = l.terms.find(c);
    if (it == l.terms.end()) continue;
    cxd av = (&s == &a) ? v : it->second;
    cxd bv = (&s == &a) ? it->second : v;
    acc += std::conj(av) * bv;
  }
  return acc;
}

double norm_sq(const StateVector& v) {
  double acc = 0;
  for (const auto& [c, a] : v.terms) acc += std::norm(a);
  return acc;
}

StateVector normalized(const StateVector& v) {
  double n2 = norm_sq(v);
  if (n2 < kDropTol * kDropTol) {
    throw Error(Err::kZeroNorm, "cannot normalize a zero state");
  }
  return scaled(v, 1.0 / std::sqrt(n2));
}

StateVector scaled(const StateVector& v, cxd f) {
  StateVector out;
  for (const auto& [c, a] : v.terms) {
    cxd s = a * f;
    if (std::abs(s) >= kDropTol) out.terms.emplace(c, s);
  }
  return out;
}

uint64_t CounterRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CounterRng::next_double() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

CounterRng CounterRng::stream(uint64_t i) const {
  CounterRng base(state_ ^ (0xd1342543de82ef95ULL * (i + 1)));
  CounterRng out(base.next_u64());
  return out;
}

}  // namespace qtm
