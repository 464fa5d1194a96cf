// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Domain types: tapes with canonical finite support, machine configurations,
// and sparse complex state vectors keyed by configuration.

#ifndef QTM_CORE_H_
#define QTM_CORE_H_

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace qtm {

using cxd = std::complex<double>;

// Amplitudes below this magnitude are pruned after every linear operation.
inline constexpr double kDropTol = 1e-15;

enum class Err {
  kParse,
  kValidation,
  kMissingRule,
  kWindow,
  kCapacity,
  kBadArgument,
  kZeroNorm,
};

struct Error : std::runtime_error {
  Err code;
  Error(Err c, const std::string& what) : std::runtime_error(what), code(c) {}
};

// Finite-support tape. Symbol 0 is the blank; blank cells are never stored,
// so equal tapes have equal representations.
struct Tape {
  std::map<int32_t, int32_t> cells;

  auto operator<=>(const Tape&) const = default;
  bool operator==(const Tape&) const = default;
};

int32_t tape_read(const Tape& t, int32_t i);
Tape tape_write(const Tape& t, int32_t i, int32_t sym);

// Injective positive label for a canonical tape. Empty tape gets 1; otherwise
// 1 + cantor(zigzag(min support index), base-A value of the support string).
// Throws Error(kCapacity) when the encoding leaves uint64 range.
uint64_t tape_label(const Tape& t, int32_t alphabet_size);

struct Config {
  int32_t q = 0;
  int32_t h = 0;
  Tape tape;
  int32_t halt = 0;

  auto operator<=>(const Config&) const = default;
  bool operator==(const Config&) const = default;
};

// Sparse state: configuration -> amplitude. std::map keeps iteration order
// deterministic, which makes every aggregation below reproducible.
struct StateVector {
  std::map<Config, cxd> terms;

  void add(const Config& c, cxd a) { terms[c] += a; }
  void prune();
};

cxd inner(const StateVector& a, const StateVector& b);
double norm_sq(const StateVector& v);
StateVector normalized(const StateVector& v);
StateVector scaled(const StateVector& v, cxd f);

// Counter-based generator (splitmix64). Stateless jumps: stream(i) yields an
// independent deterministic stream for worker i.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64();
  // Uniform in [0, 1).
  double next_double();
  CounterRng stream(uint64_t i) const;

 private:
  uint64_t state_;
};

}  // namespace qtm

#endif  // QTM_CORE_H_
