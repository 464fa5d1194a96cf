// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links only the public C API.
//
// Exit codes: 0 success / checks passed, 1 verification failure,
// 2 parse error (machine file or --initial literal), 3 resource limit
// (window too small or basis capacity exceeded).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtm/qtm.h"

namespace {

int exit_code_for(qtm_status s) {
  switch (s) {
    case QTM_OK:
      return 0;
    case QTM_ERR_PARSE:
      return 2;
    case QTM_ERR_WINDOW:
    case QTM_ERR_CAPACITY:
      return 3;
    default:
      return 1;
  }
}

int fail(qtm_status s) {
  std::fprintf(stderr, "error (%s): %s\n", qtm_status_name(s),
               qtm_last_error());
  return exit_code_for(s);
}

// Parses "cell:symbol,cell:symbol,..." into parallel arrays. Empty input
// means a blank tape. Returns false on malformed text or a symbol outside
// the machine's alphabet.
bool parse_initial(const std::string& text, int32_t alphabet,
                   std::vector<int32_t>* cells, std::vector<int32_t>* syms) {
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string tok = text.substr(pos, end - pos);
    int cell = 0, sym = 0;
    char extra = 0;
    if (std::sscanf(tok.c_str(), "%d:%d%c", &cell, &sym, &extra) != 2) {
      std::fprintf(stderr, "error: bad --initial entry '%s' (want cell:symbol)\n",
                   tok.c_str());
      return false;
    }
    if (sym < 0 || sym >= alphabet) {
      std::fprintf(stderr, "error: --initial symbol %d outside alphabet 0..%d\n",
                   sym, alphabet - 1);
      return false;
    }
    cells->push_back(cell);
    syms->push_back(sym);
    pos = end + 1;
  }
  return true;
}

// Shared prologue: load the machine and (unless skipped) require that it
// passes both structural validators before running anything on it.
int load_checked(const std::string& path, bool force, qtm_machine** out) {
  qtm_status st = qtm_machine_load(path.c_str(), out);
  if (st != QTM_OK) return fail(st);
  if (force) return -1;
  int halt_ok = 0, unitary_ok = 0;
  st = qtm_validate(*out, 0, &halt_ok, &unitary_ok, nullptr);
  if (st != QTM_OK) return fail(st);
  if (!halt_ok || !unitary_ok) {
    std::fprintf(stderr,
                 "error: machine fails validation (%s); run 'qtmsim validate %s' "
                 "for details or pass --force to run anyway\n",
                 !halt_ok ? "halt preservation" : "unitarity", path.c_str());
    return 1;
  }
  return -1;  // no exit requested
}

int make_state(const qtm_machine* m, const std::string& initial,
               qtm_state** out) {
  std::vector<int32_t> cells, syms;
  if (!parse_initial(initial, qtm_machine_alphabet(m), &cells, &syms)) {
    return 2;
  }
  qtm_status st = qtm_state_new(out);
  if (st != QTM_OK) return fail(st);
  st = qtm_state_add(*out, qtm_machine_initial_state(m), 0, 0, cells.data(),
                     syms.data(), cells.size(), 1.0, 0.0);
  if (st != QTM_OK) return fail(st);
  return -1;
}

int print_and_free(char* report) {
  if (report != nullptr) {
    std::fputs(report, stdout);
    qtm_string_free(report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qtmsim: sparse quantum Turing machine simulator with a monitored "
      "halt flag"};
  app.require_subcommand(1);

  std::string path;
  std::string initial;
  std::string format = "human";
  int steps = 12;
  int max_steps = 4;
  int window = 6;
  int trials = 20;
  std::int64_t runs = 10000;
  std::uint64_t seed = 1234;
  double tol = 1e-10;
  bool force = false;

  auto add_common = [&](CLI::App* sub, bool with_force) {
    sub->add_option("machine", path, "machine description file")->required();
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"human", "records"}))
        ->capture_default_str();
    if (with_force) {
      sub->add_flag("--force", force,
                    "run even if the machine fails validation");
    }
  };

  CLI::App* validate =
      app.add_subcommand("validate",
                         "check halt preservation and unitarity of a machine");
  add_common(validate, false);

  CLI::App* compare = app.add_subcommand(
      "compare",
      "compare monitored and unmonitored output distributions exactly");
  add_common(compare, true);
  compare->add_option("--steps", steps, "evolution horizon")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  compare->add_option("--initial", initial,
                      "input tape as cell:symbol,... (default blank)");
  compare->add_option("--tol", tol, "comparison tolerance")
      ->capture_default_str();

  CLI::App* qnd = app.add_subcommand(
      "qnd",
      "verify commutation, projection relations, and evolution identities "
      "on a truncated model");
  add_common(qnd, true);
  qnd->add_option("--max-steps", max_steps, "largest step count checked")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  qnd->add_option("--window", window, "tape window radius")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  qnd->add_option("--trials", trials, "random vectors for the identity suite")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  qnd->add_option("--seed", seed, "seed for the identity suite")
      ->capture_default_str();
  qnd->add_option("--tol", tol, "verification tolerance")
      ->capture_default_str();

  CLI::App* sample = app.add_subcommand(
      "sample", "sample the monitored protocol and test against the exact "
                "distribution");
  add_common(sample, true);
  sample->add_option("--steps", steps, "evolution horizon")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample->add_option("--initial", initial,
                     "input tape as cell:symbol,... (default blank)");
  sample->add_option("--runs", runs, "number of sampled executions")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample->add_option("--seed", seed, "master sampling seed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  bool records = format == "records";

  if (validate->parsed()) {
    qtm_machine* m = nullptr;
    qtm_status st = qtm_machine_load(path.c_str(), &m);
    if (st != QTM_OK) return fail(st);
    int halt_ok = 0, unitary_ok = 0;
    char* report = nullptr;
    st = qtm_validate(m, records ? 1 : 0, &halt_ok, &unitary_ok, &report);
    if (st != QTM_OK) {
      qtm_machine_free(m);
      return fail(st);
    }
    print_and_free(report);
    qtm_machine_free(m);
    return (halt_ok && unitary_ok) ? 0 : 1;
  }

  qtm_machine* m = nullptr;
  int code = load_checked(path, force, &m);
  if (code >= 0) {
    qtm_machine_free(m);
    return code;
  }

  if (qnd->parsed()) {
    char* report = nullptr;
    int pass = 0;
    qtm_status st = qtm_qnd_report(m, max_steps, window, tol, trials, seed,
                                   records ? 1 : 0, &pass, &report);
    if (st != QTM_OK) {
      qtm_machine_free(m);
      return fail(st);
    }
    print_and_free(report);
    qtm_machine_free(m);
    return pass ? 0 : 1;
  }

  qtm_state* psi0 = nullptr;
  code = make_state(m, initial, &psi0);
  if (code >= 0) {
    qtm_machine_free(m);
    return code;
  }

  int rc = 0;
  if (compare->parsed()) {
    char* report = nullptr;
    int pass = 0;
    qtm_status st = qtm_compare_report(m, psi0, steps, tol, records ? 1 : 0,
                                       &pass, &report);
    if (st != QTM_OK) {
      rc = fail(st);
    } else {
      print_and_free(report);
      rc = pass ? 0 : 1;
    }
  } else if (sample->parsed()) {
    char* report = nullptr;
    qtm_status st = qtm_sample_report(m, psi0, steps, runs, seed,
                                      records ? 1 : 0, &report);
    if (st != QTM_OK) {
      rc = fail(st);
    } else {
      print_and_free(report);
      rc = 0;
    }
  }

  qtm_state_free(psi0);
  qtm_machine_free(m);
  return rc;
}
