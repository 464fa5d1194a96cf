// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// C API shim over the core library. Owns all report formatting so that
// every front end prints byte-identical text for identical inputs.

#include "qtm/qtm.h"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "analysis.h"
#include "core.h"
#include "evolve.h"
#include "machine.h"
#include "measure.h"
#include "sample.h"

struct qtm_machine {
  qtm::MachineSpec spec;
};

struct qtm_state {
  qtm::StateVector v;
};

struct qtm_rng {
  qtm::CounterRng rng;
};

namespace {

thread_local std::string g_last_error;

qtm_status status_of(const qtm::Error& e) {
  switch (e.code) {
    case qtm::Err::kParse:
      return QTM_ERR_PARSE;
    case qtm::Err::kValidation:
      return QTM_ERR_VALIDATION;
    case qtm::Err::kMissingRule:
      return QTM_ERR_MISSING_RULE;
    case qtm::Err::kWindow:
      return QTM_ERR_WINDOW;
    case qtm::Err::kCapacity:
      return QTM_ERR_CAPACITY;
    case qtm::Err::kBadArgument:
      return QTM_ERR_BAD_ARGUMENT;
    case qtm::Err::kZeroNorm:
      return QTM_ERR_ZERO_NORM;
  }
  return QTM_ERR_INTERNAL;
}

template <typename Fn>
qtm_status guarded(Fn&& fn) {
  try {
    fn();
    return QTM_OK;
  } catch (const qtm::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QTM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QTM_ERR_INTERNAL;
  }
}

qtm_status bad_argument(const char* msg) {
  g_last_error = msg;
  return QTM_ERR_BAD_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qtm_status emit(const std::string& text, char** report) {
  if (report == nullptr) return QTM_OK;
  *report = dup_string(text);
  if (*report == nullptr) {
    g_last_error = "out of memory";
    return QTM_ERR_INTERNAL;
  }
  return QTM_OK;
}

void appendf(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  out += buf;
}

std::string format_validate(const qtm::MachineSpec& spec,
                            const qtm::HaltReport& halt,
                            const qtm::UnitarityReport& uni, bool records) {
  std::string out;
  size_t rule_lines = 0;
  for (const auto& [k, targets] : spec.rules) rule_lines += targets.size();
  if (records) {
    appendf(out, "machine alphabet=%d states=%d initial=%d rules=%zu\n",
            spec.alphabet_size, spec.state_count, spec.initial_state,
            rule_lines);
    appendf(out, "halt pass=%d violations=%zu\n", halt.pass() ? 1 : 0,
            halt.violations.size());
    for (size_t i = 0; i < halt.violations.size(); ++i) {
      appendf(out, "halt_violation index=%zu text=%s\n", i,
              halt.violations[i].c_str());
    }
    appendf(out,
            "unitarity pass=%d worst_key_dev=%.12e worst_pair_dev=%.12e "
            "columns=%lld excluded=%lld\n",
            uni.pass() ? 1 : 0, uni.worst_key_norm_dev, uni.worst_pair_dev,
            (long long)uni.columns_checked, (long long)uni.columns_excluded);
    if (!uni.worst_key.empty())
      appendf(out, "unitarity_worst_key text=%s\n", uni.worst_key.c_str());
    if (!uni.worst_pair.empty())
      appendf(out, "unitarity_worst_pair text=%s\n", uni.worst_pair.c_str());
    appendf(out, "summary pass=%d\n",
            (halt.pass() && uni.pass()) ? 1 : 0);
    return out;
  }
  appendf(out, "machine: alphabet %d, states %d, initial state %d, %zu rules\n",
          spec.alphabet_size, spec.state_count, spec.initial_state,
          rule_lines);
  if (halt.pass()) {
    out += "halt-preservation: PASS\n";
  } else {
    appendf(out, "halt-preservation: FAIL (%zu violations)\n",
            halt.violations.size());
    for (const std::string& v : halt.violations) {
      out += "  " + v + "\n";
    }
  }
  if (uni.pass()) {
    appendf(out,
            "unitarity: PASS (worst key-norm dev %.3e, worst pair dev %.3e, "
            "%lld columns checked, %lld without rules)\n",
            uni.worst_key_norm_dev, uni.worst_pair_dev,
            (long long)uni.columns_checked, (long long)uni.columns_excluded);
  } else {
    appendf(out, "unitarity: FAIL (worst key-norm dev %.3e at %s",
            uni.worst_key_norm_dev, uni.worst_key.c_str());
    appendf(out, ", worst pair dev %.3e", uni.worst_pair_dev);
    if (!uni.worst_pair.empty()) {
      appendf(out, " at %s", uni.worst_pair.c_str());
    }
    out += ")\n";
  }
  out += (halt.pass() && uni.pass()) ? "overall: PASS\n" : "overall: FAIL\n";
  return out;
}

std::string format_compare(const qtm::CompareReport& rep, int steps,
                           bool records) {
  std::string out;
  if (records) {
    appendf(out, "compare steps=%d tol=%.12e\n", steps, rep.tol);
    for (const qtm::CompareRow& r : rep.rows) {
      appendf(out,
              "row label=%llu monitored=%.12e unmonitored=%.12e diff=%.12e\n",
              (unsigned long long)r.label, r.monitored, r.unmonitored,
              r.diff);
    }
    appendf(out, "residual monitored=%.12e unmonitored=%.12e diff=%.12e\n",
            rep.residual_monitored, rep.residual_unmonitored,
            std::abs(rep.residual_monitored - rep.residual_unmonitored));
    appendf(out, "summary max_diff=%.12e worst_label=%llu pass=%d\n",
            rep.max_diff, (unsigned long long)rep.worst_label,
            rep.pass() ? 1 : 0);
    return out;
  }
  appendf(out, "monitored vs unmonitored output distribution, %d steps\n",
          steps);
  appendf(out, "%-20s %-16s %-16s %s\n", "label", "monitored", "unmonitored",
          "|diff|");
  for (const qtm::CompareRow& r : rep.rows) {
    appendf(out, "%-20llu %-16.12f %-16.12f %.3e\n",
            (unsigned long long)r.label, r.monitored, r.unmonitored, r.diff);
  }
  appendf(out, "%-20s %-16.12f %-16.12f %.3e\n", "(residual)",
          rep.residual_monitored, rep.residual_unmonitored,
          std::abs(rep.residual_monitored - rep.residual_unmonitored));
  appendf(out, "max diff %.3e (tol %.1e): %s\n", rep.max_diff, rep.tol,
          rep.pass() ? "PASS" : "FAIL");
  return out;
}

std::string format_qnd(const qtm::TruncatedModel& m, const qtm::QndReport& q,
                       const qtm::ProjectionReport& p,
                       const qtm::LemmaReport& l, uint64_t seed,
                       bool records) {
  std::string out;
  bool pass = q.pass() && p.pass() && l.pass();
  if (records) {
    appendf(out, "model window=%d max_steps=%d basis=%lld labels=%zu\n",
            m.window, m.max_steps, (long long)m.size(), m.tapes.size());
    appendf(out, "qnd worst=%.12e n1=%d n2=%d columns=%lld pass=%d\n",
            q.worst, q.worst_n1, q.worst_n2, (long long)q.columns_checked,
            q.pass() ? 1 : 0);
    appendf(out,
            "projections worst_a=%.12e worst_b=%.12e worst_c=%.12e "
            "worst_d=%.12e worst_x=%.12e columns=%lld pass=%d\n",
            p.worst_a, p.worst_b, p.worst_c, p.worst_d, p.worst_x,
            (long long)p.columns_checked, p.pass() ? 1 : 0);
    appendf(out,
            "lemmas trials=%d seed=%llu worst_a=%.12e worst_b=%.12e "
            "worst_c=%.12e worst_d=%.12e worst_e=%.12e pass=%d\n",
            l.trials, (unsigned long long)seed, l.worst_a, l.worst_b,
            l.worst_c, l.worst_d, l.worst_e, l.pass() ? 1 : 0);
    appendf(out, "summary pass=%d\n", pass ? 1 : 0);
    return out;
  }
  appendf(out,
          "truncated model: window %d, max-steps %d, basis %lld, "
          "%zu output labels\n",
          m.window, m.max_steps, (long long)m.size(), m.tapes.size());
  appendf(out,
          "commutation scan (pairs up to %d): worst %.3e at (%d,%d), "
          "%lld interior columns: %s\n",
          q.max_pair, q.worst, q.worst_n1, q.worst_n2,
          (long long)q.columns_checked, q.pass() ? "PASS" : "FAIL");
  appendf(out,
          "projection relations (pairs up to %d): worst %.3e "
          "(a=%.3e b=%.3e c=%.3e d=%.3e x=%.3e), %lld interior columns: %s\n",
          p.max_pair, p.worst(), p.worst_a, p.worst_b, p.worst_c, p.worst_d,
          p.worst_x, (long long)p.columns_checked, p.pass() ? "PASS" : "FAIL");
  appendf(out,
          "identity suite (%d trials, seed %llu): worst %.3e "
          "(a=%.3e b=%.3e c=%.3e d=%.3e e=%.3e): %s\n",
          l.trials, (unsigned long long)seed, l.worst(), l.worst_a, l.worst_b,
          l.worst_c, l.worst_d, l.worst_e, l.pass() ? "PASS" : "FAIL");
  appendf(out, "overall: %s\n", pass ? "PASS" : "FAIL");
  return out;
}

std::string format_sample(const qtm::SampleReport& rep, bool records) {
  std::string out;
  if (records) {
    appendf(out, "sample runs=%lld steps=%d seed=%llu\n", (long long)rep.runs,
            rep.horizon, (unsigned long long)rep.seed);
    for (const auto& [label, count] : rep.label_counts) {
      double freq = rep.runs > 0 ? double(count) / double(rep.runs) : 0.0;
      auto it = rep.exact.entries.find(label);
      double exact = it == rep.exact.entries.end() ? 0.0 : it->second;
      appendf(out, "label value=%llu count=%lld freq=%.12e exact=%.12e\n",
              (unsigned long long)label, (long long)count, freq, exact);
    }
    for (const auto& [at, count] : rep.halted_at_counts) {
      appendf(out, "halted_at step=%d count=%lld\n", at, (long long)count);
    }
    appendf(out, "unhalted count=%lld exact=%.12e\n", (long long)rep.unhalted,
            rep.exact.residual);
    appendf(out, "chi2 value=%.12e dof=%d p=%.12e\n", rep.chi2, rep.dof,
            rep.p_value);
    return out;
  }
  appendf(out, "monitored sampling: %lld runs, %d steps, seed %llu\n",
          (long long)rep.runs, rep.horizon, (unsigned long long)rep.seed);
  appendf(out, "%-20s %-10s %-14s %s\n", "label", "count", "frequency",
          "exact");
  for (const auto& [label, count] : rep.label_counts) {
    double freq = rep.runs > 0 ? double(count) / double(rep.runs) : 0.0;
    auto it = rep.exact.entries.find(label);
    double exact = it == rep.exact.entries.end() ? 0.0 : it->second;
    appendf(out, "%-20llu %-10lld %-14.6f %.12f\n", (unsigned long long)label,
            (long long)count, freq, exact);
  }
  appendf(out, "%-20s %-10lld %-14.6f %.12f\n", "(unhalted)",
          (long long)rep.unhalted,
          rep.runs > 0 ? double(rep.unhalted) / double(rep.runs) : 0.0,
          rep.exact.residual);
  out += "halting-step histogram:\n";
  for (const auto& [at, count] : rep.halted_at_counts) {
    appendf(out, "  step %-6d %lld\n", at, (long long)count);
  }
  appendf(out, "chi-squared %.6f (dof %d), p-value %.6f\n", rep.chi2, rep.dof,
          rep.p_value);
  return out;
}

}  // namespace

extern "C" {

const char* qtm_status_name(qtm_status s) {
  switch (s) {
    case QTM_OK:
      return "ok";
    case QTM_ERR_PARSE:
      return "parse-error";
    case QTM_ERR_VALIDATION:
      return "validation-error";
    case QTM_ERR_MISSING_RULE:
      return "missing-rule";
    case QTM_ERR_WINDOW:
      return "window-too-small";
    case QTM_ERR_CAPACITY:
      return "capacity-exceeded";
    case QTM_ERR_BAD_ARGUMENT:
      return "bad-argument";
    case QTM_ERR_ZERO_NORM:
      return "zero-norm";
    case QTM_ERR_INTERNAL:
      return "internal-error";
  }
  return "unknown";
}

const char* qtm_last_error(void) { return g_last_error.c_str(); }

void qtm_string_free(char* s) { std::free(s); }

qtm_status qtm_machine_parse(const char* text, qtm_machine** out) {
  if (text == nullptr || out == nullptr) {
    return bad_argument("null argument to qtm_machine_parse");
  }
  return guarded([&] {
    auto* m = new qtm_machine{qtm::parse_machine(text)};
    *out = m;
  });
}

qtm_status qtm_machine_load(const char* path, qtm_machine** out) {
  if (path == nullptr || out == nullptr) {
    return bad_argument("null argument to qtm_machine_load");
  }
  return guarded([&] {
    auto* m = new qtm_machine{qtm::load_machine(path)};
    *out = m;
  });
}

void qtm_machine_free(qtm_machine* m) { delete m; }

int32_t qtm_machine_alphabet(const qtm_machine* m) {
  return m == nullptr ? 0 : m->spec.alphabet_size;
}

int32_t qtm_machine_state_count(const qtm_machine* m) {
  return m == nullptr ? 0 : m->spec.state_count;
}

int32_t qtm_machine_initial_state(const qtm_machine* m) {
  return m == nullptr ? 0 : m->spec.initial_state;
}

qtm_status qtm_machine_serialize(const qtm_machine* m, char** out) {
  if (m == nullptr || out == nullptr) {
    return bad_argument("null argument to qtm_machine_serialize");
  }
  return guarded([&] {
    qtm_status st = emit(qtm::serialize_machine(m->spec), out);
    if (st != QTM_OK) throw qtm::Error(qtm::Err::kBadArgument, g_last_error);
  });
}

qtm_status qtm_validate(const qtm_machine* m, int records, int* halt_ok,
                        int* unitary_ok, char** report) {
  if (m == nullptr) return bad_argument("null machine");
  return guarded([&] {
    qtm::HaltReport halt = qtm::validate_halt_preservation(m->spec);
    qtm::UnitarityReport uni = qtm::validate_unitarity(m->spec, 2);
    if (halt_ok != nullptr) *halt_ok = halt.pass() ? 1 : 0;
    if (unitary_ok != nullptr) *unitary_ok = uni.pass() ? 1 : 0;
    std::string text = format_validate(m->spec, halt, uni, records != 0);
    if (emit(text, report) != QTM_OK) {
      throw qtm::Error(qtm::Err::kBadArgument, g_last_error);
    }
  });
}

qtm_status qtm_state_new(qtm_state** out) {
  if (out == nullptr) return bad_argument("null out");
  *out = new (std::nothrow) qtm_state{};
  return *out != nullptr ? QTM_OK : QTM_ERR_INTERNAL;
}

void qtm_state_free(qtm_state* s) { delete s; }

qtm_status qtm_state_add(qtm_state* s, int32_t q, int32_t head, int32_t halt,
                         const int32_t* cells, const int32_t* syms,
                         size_t n_cells, double re, double im) {
  if (s == nullptr) return bad_argument("null state");
  if (n_cells > 0 && (cells == nullptr || syms == nullptr)) {
    return bad_argument("null tape arrays");
  }
  if (halt != 0 && halt != 1) return bad_argument("halt bit must be 0 or 1");
  return guarded([&] {
    qtm::Tape t;
    for (size_t i = 0; i < n_cells; ++i) {
      if (syms[i] < 0) {
        throw qtm::Error(qtm::Err::kBadArgument, "negative tape symbol");
      }
      t = qtm::tape_write(t, cells[i], syms[i]);
    }
    s->v.add(qtm::Config{q, head, t, halt}, qtm::cxd(re, im));
    s->v.prune();
  });
}

size_t qtm_state_term_count(const qtm_state* s) {
  return s == nullptr ? 0 : s->v.terms.size();
}

double qtm_state_norm_sq(const qtm_state* s) {
  return s == nullptr ? 0.0 : qtm::norm_sq(s->v);
}

qtm_status qtm_state_normalize(qtm_state* s) {
  if (s == nullptr) return bad_argument("null state");
  return guarded([&] { s->v = qtm::normalized(s->v); });
}

qtm_status qtm_state_evolve(const qtm_machine* m, const qtm_state* in,
                            int32_t steps, qtm_state** out) {
  if (m == nullptr || in == nullptr || out == nullptr) {
    return bad_argument("null argument to qtm_state_evolve");
  }
  if (steps < 0) return bad_argument("negative step count");
  return guarded([&] {
    auto* result = new qtm_state{qtm::evolve(m->spec, in->v, steps)};
    *out = result;
  });
}

qtm_rng* qtm_rng_new(uint64_t seed) {
  return new (std::nothrow) qtm_rng{qtm::CounterRng(seed)};
}

void qtm_rng_free(qtm_rng* r) { delete r; }

qtm_status qtm_run_monitored(const qtm_machine* m, const qtm_state* psi0,
                             int32_t horizon, qtm_rng* rng, int32_t* halted_at,
                             uint64_t* output_label) {
  if (m == nullptr || psi0 == nullptr || rng == nullptr) {
    return bad_argument("null argument to qtm_run_monitored");
  }
  if (horizon < 0) return bad_argument("negative horizon");
  return guarded([&] {
    qtm::OutcomeRecord rec =
        qtm::run_monitored(m->spec, psi0->v, horizon, rng->rng);
    if (halted_at != nullptr) {
      *halted_at = rec.halted_at ? int32_t(*rec.halted_at) : -1;
    }
    if (output_label != nullptr) {
      *output_label = rec.output_label ? *rec.output_label : 0;
    }
  });
}

qtm_status qtm_compare_report(const qtm_machine* m, const qtm_state* psi0,
                              int32_t steps, double tol, int records,
                              int* pass, char** report) {
  if (m == nullptr || psi0 == nullptr) {
    return bad_argument("null argument to qtm_compare_report");
  }
  if (steps < 0) return bad_argument("negative step count");
  return guarded([&] {
    qtm::Distribution mon =
        qtm::monitored_distribution(m->spec, psi0->v, steps);
    qtm::Distribution unm =
        qtm::unmonitored_distribution(m->spec, psi0->v, steps);
    qtm::CompareReport rep = qtm::compare_distributions(mon, unm, tol);
    if (pass != nullptr) *pass = rep.pass() ? 1 : 0;
    if (emit(format_compare(rep, steps, records != 0), report) != QTM_OK) {
      throw qtm::Error(qtm::Err::kBadArgument, g_last_error);
    }
  });
}

qtm_status qtm_qnd_report(const qtm_machine* m, int32_t max_steps,
                          int32_t window, double tol, int32_t trials,
                          uint64_t seed, int records, int* pass,
                          char** report) {
  if (m == nullptr) return bad_argument("null machine");
  if (max_steps < 0 || trials < 0) {
    return bad_argument("negative max_steps or trials");
  }
  return guarded([&] {
    qtm::TruncatedModel model = qtm::build_truncated(m->spec, window,
                                                     max_steps);
    qtm::QndReport q = qtm::qnd_check(model, max_steps, tol);
    qtm::ProjectionReport p =
        qtm::projection_relations_check(model, max_steps, tol);
    qtm::LemmaReport l = qtm::lemma_suite(model, trials, seed, tol);
    if (pass != nullptr) {
      *pass = (q.pass() && p.pass() && l.pass()) ? 1 : 0;
    }
    if (emit(format_qnd(model, q, p, l, seed, records != 0), report) !=
        QTM_OK) {
      throw qtm::Error(qtm::Err::kBadArgument, g_last_error);
    }
  });
}

qtm_status qtm_sample_report(const qtm_machine* m, const qtm_state* psi0,
                             int32_t steps, int64_t runs, uint64_t seed,
                             int records, char** report) {
  if (m == nullptr || psi0 == nullptr) {
    return bad_argument("null argument to qtm_sample_report");
  }
  if (steps < 0 || runs < 0) return bad_argument("negative steps or runs");
  return guarded([&] {
    qtm::SampleReport rep =
        qtm::run_sampling(m->spec, psi0->v, steps, runs, seed);
    if (emit(format_sample(rep, records != 0), report) != QTM_OK) {
      throw qtm::Error(qtm::Err::kBadArgument, g_last_error);
    }
  });
}

}  // extern "C"
