// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "machine.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace qtm {

std::string key_string(const RuleKey& k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(p=%d n0=%d sigma=%d)", k.p, k.n0, k.sigma);
  return buf;
}

std::string target_string(const RuleTarget& t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(tau=%d n0'=%d q=%d d=%c)", t.tau, t.n1,
                t.q, t.d < 0 ? 'L' : 'R');
  return buf;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Err::kParse, "line " + std::to_string(line) + ": " + msg);
}

bool parse_amplitude_token(const std::string& tok, double* out) {
  if (tok == "1/sqrt2") {
    *out = std::numbers::sqrt2 / 2.0;
    return true;
  }
  if (tok == "-1/sqrt2") {
    *out = -std::numbers::sqrt2 / 2.0;
    return true;
  }
  try {
    size_t pos = 0;
    *out = std::stod(tok, &pos);
    return pos == tok.size() && std::isfinite(*out);
  } catch (const std::exception&) {
    return false;
  }
}

long parse_int(const std::string& tok, int line, const char* what) {
  try {
    size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) fail(line, std::string("bad ") + what);
    return v;
  } catch (const std::exception&) {
    fail(line, std::string("bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

MachineSpec parse_machine(const std::string& text) {
  MachineSpec spec;
  bool saw_magic = false, saw_alphabet = false, saw_states = false,
       saw_initial = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::istringstream ls(body);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "qtm") {
      if (tok.size() != 2 || tok[1] != "1") fail(line, "expected 'qtm 1'");
      saw_magic = true;
    } else if (tok[0] == "alphabet") {
      if (tok.size() != 2) fail(line, "expected 'alphabet A'");
      long a = parse_int(tok[1], line, "alphabet size");
      if (a < 1 || a > 64) fail(line, "alphabet size out of range");
      spec.alphabet_size = int32_t(a);
      saw_alphabet = true;
    } else if (tok[0] == "states") {
      if (tok.size() != 2) fail(line, "expected 'states S'");
      long s = parse_int(tok[1], line, "state count");
      if (s < 1 || s > 4096) fail(line, "state count out of range");
      spec.state_count = int32_t(s);
      saw_states = true;
    } else if (tok[0] == "initial") {
      if (tok.size() != 2) fail(line, "expected 'initial q'");
      spec.initial_state = int32_t(parse_int(tok[1], line, "initial state"));
      saw_initial = true;
    } else if (tok[0] == "rule") {
      if (!saw_alphabet || !saw_states) {
        fail(line, "rule before alphabet/states header");
      }
      if (tok.size() != 11 || tok[4] != "->") {
        fail(line, "expected 'rule p n0 sigma -> tau n0' q d re im'");
      }
      RuleKey k;
      k.p = int32_t(parse_int(tok[1], line, "rule state"));
      k.n0 = int32_t(parse_int(tok[2], line, "rule halt bit"));
      k.sigma = int32_t(parse_int(tok[3], line, "rule symbol"));
      RuleTarget t;
      t.tau = int32_t(parse_int(tok[5], line, "target symbol"));
      t.n1 = int32_t(parse_int(tok[6], line, "target halt bit"));
      t.q = int32_t(parse_int(tok[7], line, "target state"));
      if (tok[8] == "L") {
        t.d = -1;
      } else if (tok[8] == "R") {
        t.d = +1;
      } else {
        fail(line, "direction must be L or R");
      }
      double re, im;
      if (!parse_amplitude_token(tok[9], &re)) fail(line, "bad amplitude re");
      if (!parse_amplitude_token(tok[10], &im)) fail(line, "bad amplitude im");
      t.c = cxd(re, im);
      if (k.p < 0 || k.p >= spec.state_count) fail(line, "rule state out of range");
      if (k.n0 != 0 && k.n0 != 1) fail(line, "rule halt bit must be 0 or 1");
      if (k.sigma < 0 || k.sigma >= spec.alphabet_size) {
        fail(line, "rule symbol out of range");
      }
      if (t.q < 0 || t.q >= spec.state_count) fail(line, "target state out of range");
      if (t.n1 != 0 && t.n1 != 1) fail(line, "target halt bit must be 0 or 1");
      if (t.tau < 0 || t.tau >= spec.alphabet_size) {
        fail(line, "target symbol out of range");
      }
      for (const RuleTarget& prev : spec.rules[k]) {
        if (prev.tau == t.tau && prev.n1 == t.n1 && prev.q == t.q &&
            prev.d == t.d) {
          fail(line, "duplicate rule for key " + key_string(k) + " target " +
                         target_string(t));
        }
      }
      spec.rules[k].push_back(t);
    } else {
      fail(line, "unknown directive '" + tok[0] + "'");
    }
  }
  if (!saw_magic) throw Error(Err::kParse, "missing 'qtm 1' header");
  if (!saw_alphabet) throw Error(Err::kParse, "missing 'alphabet' header");
  if (!saw_states) throw Error(Err::kParse, "missing 'states' header");
  if (!saw_initial) throw Error(Err::kParse, "missing 'initial' header");
  if (spec.initial_state < 0 || spec.initial_state >= spec.state_count) {
    throw Error(Err::kParse, "initial state out of range");
  }
  return spec;
}

MachineSpec load_machine(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::kParse, "cannot open machine file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_machine(ss.str());
}

std::string serialize_machine(const MachineSpec& spec) {
  std::ostringstream out;
  out << "qtm 1\n";
  out << "alphabet " << spec.alphabet_size << "\n";
  out << "states " << spec.state_count << "\n";
  out << "initial " << spec.initial_state << "\n";
  char buf[128];
  for (const auto& [k, targets] : spec.rules) {
    for (const RuleTarget& t : targets) {
      std::snprintf(buf, sizeof buf, "rule %d %d %d -> %d %d %d %c %.17g %.17g\n",
                    k.p, k.n0, k.sigma, t.tau, t.n1, t.q, t.d < 0 ? 'L' : 'R',
                    t.c.real(), t.c.imag());
      out << buf;
    }
  }
  return out.str();
}

HaltReport validate_halt_preservation(const MachineSpec& spec) {
  HaltReport rep;
  for (const auto& [k, targets] : spec.rules) {
    if (k.n0 != 1) continue;
    for (const RuleTarget& t : targets) {
      if (t.tau != k.sigma) {
        rep.violations.push_back("halted rule " + key_string(k) +
                                 " writes symbol " + std::to_string(t.tau) +
                                 " over read symbol " + std::to_string(k.sigma));
      }
      if (t.n1 != 1) {
        rep.violations.push_back("halted rule " + key_string(k) +
                                 " clears the halt bit");
      }
    }
  }
  return rep;
}

}  // namespace qtm
