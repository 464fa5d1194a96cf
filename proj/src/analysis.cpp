// Copyright 2026 The qtmsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "analysis.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>
#include <utility>

namespace qtm {
namespace {

// Sparse vector over basis indices. std::map keeps accumulation order
// deterministic so repeated runs produce identical bytes in reports.
using SpV = std::map<int32_t, cxd>;

bool in_window(const Config& c, int32_t w) {
  if (c.h < -w || c.h > w) return false;
  if (c.tape.cells.empty()) return true;
  return c.tape.cells.begin()->first >= -w &&
         c.tape.cells.rbegin()->first <= w;
}

// Declared successor list of a configuration, or nullptr if its key has no
// rules. Targets land on head h+d with tau written at h.
const std::vector<RuleTarget>* rules_for(const MachineSpec& spec,
                                         const Config& c) {
  RuleKey k{c.q, c.halt, tape_read(c.tape, c.h)};
  auto it = spec.rules.find(k);
  return it == spec.rules.end() ? nullptr : &it->second;
}

Config target_config(const Config& c, const RuleTarget& t) {
  return Config{t.q, c.h + t.d, tape_write(c.tape, c.h, t.tau), t.n1};
}

// All canonical tapes with support inside [lo, hi] over the given alphabet.
std::vector<Tape> enumerate_tapes(int32_t lo, int32_t hi, int32_t a) {
  std::vector<Tape> out;
  out.push_back(Tape{});
  for (int32_t cell = lo; cell <= hi; ++cell) {
    size_t prior = out.size();
    for (size_t i = 0; i < prior; ++i) {
      for (int32_t sym = 1; sym < a; ++sym) {
        Tape t = out[i];
        t.cells[cell] = sym;
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

void check_cap(size_t n, int64_t cap) {
  if (int64_t(n) > cap) {
    throw Error(Err::kCapacity,
                "basis exceeds the configuration cap of " +
                    std::to_string(cap) +
                    "; shrink the window or raise the cap");
  }
}

// y += U x (or U_adj x) column-wise on sparse vectors.
SpV sp_apply(const Eigen::SparseMatrix<cxd>& mat, const SpV& x) {
  SpV y;
  for (const auto& [j, a] : x) {
    for (Eigen::SparseMatrix<cxd>::InnerIterator it(mat, j); it; ++it) {
      y[int32_t(it.row())] += a * it.value();
    }
  }
  return y;
}

SpV sp_fwd(const TruncatedModel& m, SpV v, int n) {
  for (int k = 0; k < n; ++k) v = sp_apply(m.U, std::move(v));
  return v;
}

SpV sp_adj(const TruncatedModel& m, SpV v, int n) {
  for (int k = 0; k < n; ++k) v = sp_apply(m.U_adj, std::move(v));
  return v;
}

SpV sp_mask_rank(const TruncatedModel& m, const SpV& v, int32_t rank) {
  SpV y;
  for (const auto& [i, a] : v)
    if (m.tape_rank[i] == rank) y.emplace(i, a);
  return y;
}

SpV sp_mask_halted(const TruncatedModel& m, const SpV& v) {
  SpV y;
  for (const auto& [i, a] : v)
    if (m.halted[i]) y.emplace(i, a);
  return y;
}

SpV sp_sub(const SpV& a, const SpV& b) {
  SpV y = a;
  for (const auto& [i, v] : b) y[i] -= v;
  return y;
}

double sp_max_abs(const SpV& v) {
  double w = 0;
  for (const auto& [i, a] : v) w = std::max(w, std::abs(a));
  return w;
}

double sp_norm_sq(const SpV& v) {
  double s = 0;
  for (const auto& [i, a] : v) s += std::norm(a);
  return s;
}

std::set<int32_t> sp_ranks(const TruncatedModel& m, const SpV& v) {
  std::set<int32_t> r;
  for (const auto& [i, a] : v)
    if (m.tape_rank[i] >= 0 && a != cxd(0, 0)) r.insert(m.tape_rank[i]);
  return r;
}

SpV sp_O(const TruncatedModel& m, int n, const SpV& v) {
  SpV u = sp_fwd(m, v, n);
  SpV masked;
  for (const auto& [i, a] : u)
    if (m.halted[i]) masked.emplace(i, a * m.lambda_diag[i]);
  return sp_adj(m, std::move(masked), n);
}

double gauss_pair(CounterRng& rng, double* second) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  double t = 2.0 * std::numbers::pi * u2;
  *second = r * std::sin(t);
  return r * std::cos(t);
}

}  // namespace

TruncatedModel build_truncated(const MachineSpec& spec, int32_t window,
                               int32_t max_steps, int64_t basis_cap,
                               int64_t dense_cap,
                               const std::vector<Config>* seeds,
                               bool halted_closure) {
  if (max_steps < 0 || window < 0) {
    throw Error(Err::kBadArgument, "window and max_steps must be nonnegative");
  }
  int32_t r0 = window - max_steps;
  if (r0 < 0) {
    throw Error(Err::kWindow,
                "window " + std::to_string(window) +
                    " cannot host " + std::to_string(max_steps) +
                    " steps; required window radius >= max_steps + seed "
                    "radius (at least " +
                    std::to_string(max_steps) + ")");
  }

  TruncatedModel m;
  m.spec = spec;
  m.window = window;
  m.seed_radius = r0;
  m.max_steps = max_steps;

  std::set<Config> bas;
  if (seeds != nullptr) {
    for (const Config& s : *seeds) {
      if (!in_window(s, r0)) {
        throw Error(Err::kWindow,
                    "seed configuration lies outside the seed radius " +
                        std::to_string(r0) +
                        " (window minus max_steps); enlarge the window");
      }
      bas.insert(s);
    }
  } else {
    double est = double(spec.state_count) * 2.0 * double(2 * r0 + 1) *
                 std::pow(double(spec.alphabet_size), double(2 * r0 + 1));
    if (est > double(basis_cap)) {
      throw Error(Err::kCapacity,
                  "seed family of ~" + std::to_string(int64_t(est)) +
                      " configurations exceeds the cap of " +
                      std::to_string(basis_cap));
    }
    std::vector<Tape> tapes = enumerate_tapes(-r0, r0, spec.alphabet_size);
    for (int32_t q = 0; q < spec.state_count; ++q) {
      for (int32_t h = -r0; h <= r0; ++h) {
        for (int32_t n = 0; n <= 1; ++n) {
          for (const Tape& t : tapes) bas.insert(Config{q, h, t, n});
        }
      }
    }
  }
  check_cap(bas.size(), basis_cap);

  auto forward_close = [&](std::vector<Config> frontier) {
    for (int32_t lev = 0; lev < max_steps && !frontier.empty(); ++lev) {
      std::vector<Config> next;
      for (const Config& c : frontier) {
        const auto* tg = rules_for(spec, c);
        if (tg == nullptr) continue;
        for (const RuleTarget& t : *tg) {
          Config tc = target_config(c, t);
          if (!in_window(tc, window)) continue;
          if (bas.insert(tc).second) next.push_back(std::move(tc));
        }
      }
      check_cap(bas.size(), basis_cap);
      frontier = std::move(next);
    }
  };

  // Phase 1: forward orbit of the seed family.
  forward_close({bas.begin(), bas.end()});

  // Phase 2: declared predecessors of every halted configuration, so the
  // adjoint is entry-complete on halted vectors (every identity below applies
  // the adjoint only to vectors in the halted sector).
  std::vector<Config> halted_now;
  for (const Config& c : bas)
    if (c.halt == 1) halted_now.push_back(c);
  std::vector<Config> added;
  if (halted_closure) {
    std::vector<Config> frontier = halted_now;
    for (int32_t lev = 0; lev < max_steps && !frontier.empty(); ++lev) {
      std::vector<Config> next;
      for (const Config& y : frontier) {
        for (const auto& [key, targets] : spec.rules) {
          for (const RuleTarget& t : targets) {
            if (t.q != y.q || t.n1 != y.halt) continue;
            int32_t hs = y.h - t.d;
            if (hs < -window || hs > window) continue;
            if (tape_read(y.tape, hs) != t.tau) continue;
            Config src{key.p, hs, tape_write(y.tape, hs, key.sigma), key.n0};
            if (!in_window(src, window)) continue;
            if (bas.insert(src).second) {
              next.push_back(src);
              added.push_back(std::move(src));
            }
          }
        }
      }
      check_cap(bas.size(), basis_cap);
      frontier = std::move(next);
    }
  }

  // Phase 3: forward orbits of the predecessors and of the halted sector, so
  // forward legs launched from adjoint results stay on complete columns.
  if (halted_closure) {
    std::vector<Config> frontier = added;
    frontier.insert(frontier.end(), halted_now.begin(), halted_now.end());
    forward_close(std::move(frontier));
  }

  m.basis.assign(bas.begin(), bas.end());
  int32_t n = int32_t(m.basis.size());
  for (int32_t i = 0; i < n; ++i) m.index.emplace(m.basis[i], i);

  std::vector<Eigen::Triplet<cxd>> trip;
  std::vector<std::vector<int32_t>> tg_idx(n);
  m.col_ok.assign(n, 0);
  for (int32_t j = 0; j < n; ++j) {
    const auto* tg = rules_for(spec, m.basis[j]);
    if (tg == nullptr) continue;
    bool ok = true;
    std::vector<int32_t> idxs;
    idxs.reserve(tg->size());
    for (const RuleTarget& t : *tg) {
      auto it = m.index.find(target_config(m.basis[j], t));
      if (it == m.index.end()) {
        ok = false;
        continue;
      }
      trip.emplace_back(it->second, j, t.c);
      idxs.push_back(it->second);
    }
    m.col_ok[j] = ok ? 1 : 0;
    if (ok) tg_idx[j] = std::move(idxs);
  }
  m.U.resize(n, n);
  m.U.setFromTriplets(trip.begin(), trip.end());
  m.U_adj = m.U.adjoint();

  m.depth.assign(n, 0);
  for (int32_t round = 0; round < max_steps; ++round) {
    std::vector<int32_t> nd(n, 0);
    for (int32_t j = 0; j < n; ++j) {
      if (!m.col_ok[j]) continue;
      int32_t least = max_steps;
      for (int32_t t : tg_idx[j]) least = std::min(least, m.depth[t]);
      nd[j] = std::min(max_steps, least + 1);
    }
    if (nd == m.depth) break;
    m.depth = std::move(nd);
  }

  m.halted.assign(n, 0);
  m.tape_rank.assign(n, -1);
  m.lambda_diag.assign(n, 0.0);
  std::map<Tape, int32_t> rank_of;
  for (int32_t i = 0; i < n; ++i) {
    if (m.basis[i].halt == 1) {
      m.halted[i] = 1;
      rank_of.emplace(m.basis[i].tape, 0);
    }
  }
  m.tapes.clear();
  m.tapes.reserve(rank_of.size());
  for (auto& [tape, rank] : rank_of) {
    rank = int32_t(m.tapes.size());
    m.tapes.push_back(tape);
  }
  for (int32_t i = 0; i < n; ++i) {
    if (!m.halted[i]) continue;
    int32_t r = rank_of.at(m.basis[i].tape);
    m.tape_rank[i] = r;
    m.lambda_diag[i] = m.lambda_of_rank(r);
  }

  if (n <= dense_cap) {
    m.has_dense = true;
    m.U_dense = Eigen::MatrixXcd(m.U);
  }
  return m;
}

Eigen::VectorXcd apply_U(const TruncatedModel& m, Eigen::VectorXcd v, int n) {
  for (int k = 0; k < n; ++k) v = m.U * v;
  return v;
}

Eigen::VectorXcd apply_U_adj(const TruncatedModel& m, Eigen::VectorXcd v,
                             int n) {
  for (int k = 0; k < n; ++k) v = m.U_adj * v;
  return v;
}

Eigen::VectorXcd apply_O_heis(const TruncatedModel& m, int N,
                              Eigen::VectorXcd v) {
  v = apply_U(m, std::move(v), N);
  for (int32_t i = 0; i < v.size(); ++i) v[i] *= m.lambda_diag[i];
  return apply_U_adj(m, std::move(v), N);
}

Eigen::VectorXcd apply_E(const TruncatedModel& m, int N, int32_t rank,
                         Eigen::VectorXcd v) {
  Eigen::VectorXcd u = apply_U(m, v, N);
  if (rank >= 0) {
    for (int32_t i = 0; i < u.size(); ++i)
      if (m.tape_rank[i] != rank) u[i] = cxd(0, 0);
    return apply_U_adj(m, std::move(u), N);
  }
  for (int32_t i = 0; i < u.size(); ++i)
    if (!m.halted[i]) u[i] = cxd(0, 0);
  return v - apply_U_adj(m, std::move(u), N);
}

Eigen::MatrixXcd heisenberg_observable(const TruncatedModel& m, int N) {
  if (!m.has_dense) {
    throw Error(Err::kBadArgument,
                "dense mirror unavailable: basis larger than the dense cap");
  }
  Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(m.size(), m.size());
  for (int32_t i = 0; i < m.size(); ++i) o(i, i) = m.lambda_diag[i];
  for (int k = 0; k < N; ++k) o = m.U_dense.adjoint() * o * m.U_dense;
  return o;
}

QndReport qnd_check(const TruncatedModel& m, int max_pair, double tol) {
  if (max_pair > m.max_steps) {
    throw Error(Err::kBadArgument, "qnd pair bound exceeds max_steps");
  }
  QndReport rep;
  rep.max_pair = max_pair;
  rep.tol = tol;
  int32_t n = int32_t(m.size());
  rep.columns_checked = 0;
  for (int32_t j = 0; j < n; ++j)
    if (m.depth[j] >= max_pair) ++rep.columns_checked;
  for (int n2 = 1; n2 <= max_pair; ++n2) {
    for (int n1 = 0; n1 < n2; ++n1) {
      for (int32_t j = 0; j < n; ++j) {
        if (m.depth[j] < n2) continue;
        SpV e{{j, cxd(1, 0)}};
        SpV c1 = sp_O(m, n1, sp_O(m, n2, e));
        SpV c2 = sp_O(m, n2, sp_O(m, n1, e));
        double dev = sp_max_abs(sp_sub(c1, c2));
        if (dev > rep.worst) {
          rep.worst = dev;
          rep.worst_n1 = n1;
          rep.worst_n2 = n2;
        }
      }
    }
  }
  return rep;
}

double ProjectionReport::worst() const {
  return std::max({worst_a, worst_b, worst_c, worst_d, worst_x});
}

ProjectionReport projection_relations_check(const TruncatedModel& m,
                                            int max_pair, double tol) {
  if (max_pair > m.max_steps) {
    throw Error(Err::kBadArgument,
                "projection pair bound exceeds max_steps");
  }
  ProjectionReport rep;
  rep.max_pair = max_pair;
  rep.tol = tol;
  int32_t n = int32_t(m.size());
  rep.columns_checked = 0;
  for (int32_t j = 0; j < n; ++j)
    if (m.depth[j] >= max_pair) ++rep.columns_checked;

  for (int N = 0; N <= max_pair; ++N) {
    for (int Np = 0; Np <= N; ++Np) {
      for (int32_t j = 0; j < n; ++j) {
        if (m.depth[j] < N) continue;
        SpV e{{j, cxd(1, 0)}};
        SpV u = sp_fwd(m, e, Np);          // U^N' e_j
        SpV fN = sp_fwd(m, e, N);          // U^N  e_j
        SpV w0 = sp_sub(e, sp_adj(m, sp_mask_halted(m, u), Np));  // E_N'(0)e

        // (d) E_N(0) E_N'(0) = E_N(0).
        SpV fw0 = sp_fwd(m, w0, N);
        SpV lhs_d = sp_sub(w0, sp_adj(m, sp_mask_halted(m, fw0), N));
        SpV rhs_d = sp_sub(e, sp_adj(m, sp_mask_halted(m, fN), N));
        rep.worst_d = std::max(rep.worst_d, sp_max_abs(sp_sub(lhs_d, rhs_d)));

        std::set<int32_t> labels = sp_ranks(m, u);
        for (int32_t la : sp_ranks(m, fN)) labels.insert(la);
        for (int32_t la : sp_ranks(m, fw0)) labels.insert(la);
        for (int32_t l : labels) {
          SpV b = sp_adj(m, sp_mask_rank(m, u, l), Np);  // E_N'(l) e_j
          SpV fb = sp_fwd(m, b, N);

          // (a) E_N(l) E_N'(l) = E_N'(l).
          SpV a_lhs = sp_adj(m, sp_mask_rank(m, fb, l), N);
          rep.worst_a = std::max(rep.worst_a, sp_max_abs(sp_sub(a_lhs, b)));

          // (x) E_N(k) E_N'(l) = 0 for k != l.
          for (int32_t k : sp_ranks(m, fb)) {
            if (k == l) continue;
            SpV x_lhs = sp_adj(m, sp_mask_rank(m, fb, k), N);
            rep.worst_x = std::max(rep.worst_x, sp_max_abs(x_lhs));
          }

          // (c) E_N(0) E_N'(l) = 0.
          SpV c_lhs = sp_sub(b, sp_adj(m, sp_mask_halted(m, fb), N));
          rep.worst_c = std::max(rep.worst_c, sp_max_abs(c_lhs));

          // (b) E_N(l) E_N'(0) = E_N(l) - E_N'(l).
          SpV b_lhs = sp_adj(m, sp_mask_rank(m, fw0, l), N);
          SpV b_rhs = sp_sub(sp_adj(m, sp_mask_rank(m, fN, l), N), b);
          rep.worst_b = std::max(rep.worst_b, sp_max_abs(sp_sub(b_lhs, b_rhs)));
        }
      }
    }
  }
  return rep;
}

double LemmaReport::worst() const {
  return std::max({worst_a, worst_b, worst_c, worst_d, worst_e});
}

LemmaReport lemma_suite(const TruncatedModel& m, int trials, uint64_t seed,
                        double tol) {
  LemmaReport rep;
  rep.trials = trials;
  rep.tol = tol;
  int32_t n = int32_t(m.size());
  int32_t L = int32_t(m.tapes.size());
  CounterRng master(seed);

  for (int trial = 0; trial < trials; ++trial) {
    CounterRng rng = master.stream(uint64_t(trial));
    Eigen::VectorXcd v = random_interior_vector(m, rng);

    // Per-label halted pieces of v as sparse vectors.
    std::vector<SpV> piece(L);
    for (int32_t i = 0; i < n; ++i) {
      if (m.tape_rank[i] >= 0 && v[i] != cxd(0, 0))
        piece[m.tape_rank[i]].emplace(i, v[i]);
    }

    Eigen::VectorXcd pv = v;
    Eigen::VectorXcd pperp_v = v;
    for (int32_t i = 0; i < n; ++i) (m.halted[i] ? pperp_v[i] : pv[i]) = 0;
    Eigen::VectorXcd u_pv = m.U * pv;
    Eigen::VectorXcd u_pperp = m.U * pperp_v;
    Eigen::VectorXcd uv = m.U * v;

    for (int32_t l = 0; l < L; ++l) {
      if (piece[l].empty()) continue;
      // (a) flow keeps the label: U^K (Q_l P v) stays in the rank-l sector.
      SpV w = piece[l];
      for (int k = 1; k <= m.max_steps; ++k) {
        w = sp_apply(m.U, w);
        for (const auto& [i, a] : w) {
          if (m.tape_rank[i] != l)
            rep.worst_a = std::max(rep.worst_a, std::abs(a));
        }
      }
      // (b) no cross-label leakage in one step: Q_l P U (P - Q_l P) v = 0.
      SpV ul = sp_apply(m.U, piece[l]);
      for (int32_t i = 0; i < n; ++i) {
        if (m.tape_rank[i] != l) continue;
        cxd leak = u_pv[i] - (ul.count(i) ? ul.at(i) : cxd(0, 0));
        rep.worst_b = std::max(rep.worst_b, std::abs(leak));
      }
      // (d) orthogonality of the two step-images.
      cxd dot(0, 0);
      for (const auto& [i, a] : ul) {
        if (m.tape_rank[i] == l) dot += std::conj(a) * u_pperp[i];
      }
      rep.worst_d = std::max(rep.worst_d, std::abs(dot));
    }

    // (c) Pythagorean split per label.
    {
      std::vector<double> m_uv(L, 0), m_v(L, 0), m_up(L, 0);
      for (int32_t i = 0; i < n; ++i) {
        int32_t r = m.tape_rank[i];
        if (r < 0) continue;
        m_uv[r] += std::norm(uv[i]);
        m_v[r] += std::norm(v[i]);
        m_up[r] += std::norm(u_pperp[i]);
      }
      for (int32_t l = 0; l < L; ++l) {
        rep.worst_c =
            std::max(rep.worst_c, std::abs(m_uv[l] - m_v[l] - m_up[l]));
      }
    }

    // (e) telescoping: |Q_l P U^N v|^2 = sum_K |Q_l P (U Pperp)^K v|^2.
    {
      Eigen::VectorXcd plain = v;
      Eigen::VectorXcd proj = v;
      std::vector<double> acc(L, 0);
      for (int step = 0; step <= m.max_steps; ++step) {
        if (step > 0) {
          plain = m.U * plain;
          for (int32_t i = 0; i < n; ++i)
            if (m.halted[i]) proj[i] = 0;
          proj = m.U * proj;
        }
        std::vector<double> m_plain(L, 0);
        for (int32_t i = 0; i < n; ++i) {
          int32_t r = m.tape_rank[i];
          if (r < 0) continue;
          m_plain[r] += std::norm(plain[i]);
          acc[r] += std::norm(proj[i]);
        }
        // `acc` must be compared before the next projection consumes proj,
        // i.e. right here acc[l] = sum_{K<=step} of the monitored terms.
        for (int32_t l = 0; l < L; ++l) {
          rep.worst_e = std::max(rep.worst_e, std::abs(m_plain[l] - acc[l]));
        }
      }
    }
  }
  return rep;
}

Eigen::VectorXcd random_interior_vector(const TruncatedModel& m,
                                        CounterRng& rng) {
  int32_t n = int32_t(m.size());
  std::vector<int32_t> interior;
  for (int32_t j = 0; j < n; ++j)
    if (m.depth[j] >= m.max_steps) interior.push_back(j);
  if (interior.empty()) {
    throw Error(Err::kWindow,
                "no interior columns: the window cannot support max_steps");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  for (int32_t j : interior) {
    double im = 0;
    double re = gauss_pair(rng, &im);
    v[j] = cxd(re, im);
  }
  double nrm = std::sqrt(v.squaredNorm());
  if (nrm == 0) throw Error(Err::kZeroNorm, "degenerate random vector");
  return v / nrm;
}

Eigen::VectorXcd lift(const TruncatedModel& m, const StateVector& psi) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m.size());
  for (const auto& [c, a] : psi.terms) {
    auto it = m.index.find(c);
    if (it == m.index.end()) {
      throw Error(Err::kBadArgument,
                  "state has support outside the truncated basis");
    }
    v[it->second] = a;
  }
  return v;
}

HeisenbergDistributionReport heisenberg_monitored_distribution(
    const TruncatedModel& m, const StateVector& psi0, int N) {
  if (N > m.max_steps) {
    throw Error(Err::kBadArgument, "horizon exceeds max_steps");
  }
  HeisenbergDistributionReport rep;
  Eigen::VectorXcd v = lift(m, psi0);
  int32_t n = int32_t(m.size());
  int32_t L = int32_t(m.tapes.size());

  // Forward images U^K v once; per label the E_K chains reuse them.
  std::vector<Eigen::VectorXcd> fwd(N + 1);
  fwd[0] = v;
  for (int k = 1; k <= N; ++k) fwd[k] = m.U * fwd[k - 1];

  for (int32_t l = 0; l < L; ++l) {
    uint64_t label = tape_label(m.tapes[l], m.spec.alphabet_size);
    double by_diff = 0;
    SpV prev;
    for (int k = 0; k <= N; ++k) {
      SpV masked;
      for (int32_t i = 0; i < n; ++i) {
        if (m.tape_rank[i] == l && fwd[k][i] != cxd(0, 0))
          masked.emplace(i, fwd[k][i]);
      }
      SpV ek = sp_adj(m, std::move(masked), k);
      by_diff += sp_norm_sq(sp_sub(ek, prev));
      prev = std::move(ek);
      if (k == N) {
        double mass = sp_norm_sq(prev);
        if (mass > 0) rep.by_final.entries[label] = mass;
      }
    }
    if (by_diff > 0) rep.by_difference.entries[label] = by_diff;
  }

  {
    Eigen::VectorXcd masked = fwd[N];
    for (int32_t i = 0; i < n; ++i)
      if (!m.halted[i]) masked[i] = 0;
    Eigen::VectorXcd e0 = v - apply_U_adj(m, std::move(masked), N);
    rep.by_final.residual = e0.squaredNorm();
    rep.by_difference.residual = rep.by_final.residual;
  }

  rep.by_sparse = monitored_distribution(m.spec, psi0, N);

  std::set<uint64_t> keys;
  for (const auto& [k, p] : rep.by_difference.entries) keys.insert(k);
  for (const auto& [k, p] : rep.by_final.entries) keys.insert(k);
  for (const auto& [k, p] : rep.by_sparse.entries) keys.insert(k);
  auto get = [](const Distribution& d, uint64_t k) {
    auto it = d.entries.find(k);
    return it == d.entries.end() ? 0.0 : it->second;
  };
  for (uint64_t k : keys) {
    double a = get(rep.by_difference, k);
    double b = get(rep.by_final, k);
    double c = get(rep.by_sparse, k);
    rep.max_diff = std::max(
        {rep.max_diff, std::abs(a - b), std::abs(a - c), std::abs(b - c)});
  }
  rep.max_diff = std::max(
      {rep.max_diff,
       std::abs(rep.by_difference.residual - rep.by_final.residual),
       std::abs(rep.by_final.residual - rep.by_sparse.residual)});
  return rep;
}

TelescopingReport telescoping_check(const TruncatedModel& m,
                                    const StateVector& psi0, int N) {
  if (N > m.max_steps) {
    throw Error(Err::kBadArgument, "horizon exceeds max_steps");
  }
  TelescopingReport rep;
  int32_t n = int32_t(m.size());
  int32_t L = int32_t(m.tapes.size());

  std::vector<uint64_t> label_of(L);
  for (int32_t l = 0; l < L; ++l)
    label_of[l] = tape_label(m.tapes[l], m.spec.alphabet_size);

  auto matrix_step = [&m](const Eigen::VectorXcd& v) {
    return m.has_dense ? Eigen::VectorXcd(m.U_dense * v)
                       : Eigen::VectorXcd(m.U * v);
  };
  Eigen::VectorXcd w = lift(m, psi0);
  Eigen::VectorXcd phi_d = w;
  StateVector phi_s = psi0;
  std::map<uint64_t, double> acc_dense;

  for (int k = 0; k <= N; ++k) {
    if (k > 0) {
      for (int32_t i = 0; i < n; ++i)
        if (m.halted[i]) phi_d[i] = 0;
      phi_d = matrix_step(phi_d);
      phi_s = step(m.spec, project_halt(phi_s, 0));
    }
    std::map<uint64_t, double> dense_term;
    for (int32_t i = 0; i < n; ++i) {
      if (m.tape_rank[i] >= 0)
        dense_term[label_of[m.tape_rank[i]]] += std::norm(phi_d[i]);
    }
    std::map<uint64_t, double> sparse_term;
    for (const auto& [c, a] : project_halt(phi_s, 1).terms) {
      sparse_term[tape_label(c.tape, m.spec.alphabet_size)] += std::norm(a);
    }
    std::set<uint64_t> keys;
    for (const auto& [key, p] : dense_term) keys.insert(key);
    for (const auto& [key, p] : sparse_term) keys.insert(key);
    for (uint64_t key : keys) {
      double a = dense_term.count(key) ? dense_term.at(key) : 0.0;
      double b = sparse_term.count(key) ? sparse_term.at(key) : 0.0;
      rep.worst_term = std::max(rep.worst_term, std::abs(a - b));
      acc_dense[key] += a;
    }
  }

  Eigen::VectorXcd plain = w;
  for (int k = 0; k < N; ++k) plain = matrix_step(plain);
  std::map<uint64_t, double> unmon;
  for (int32_t i = 0; i < n; ++i) {
    if (m.tape_rank[i] >= 0)
      unmon[label_of[m.tape_rank[i]]] += std::norm(plain[i]);
  }
  std::set<uint64_t> keys;
  for (const auto& [key, p] : unmon) keys.insert(key);
  for (const auto& [key, p] : acc_dense) keys.insert(key);
  for (uint64_t key : keys) {
    double a = unmon.count(key) ? unmon.at(key) : 0.0;
    double b = acc_dense.count(key) ? acc_dense.at(key) : 0.0;
    rep.worst_sum = std::max(rep.worst_sum, std::abs(a - b));
  }
  return rep;
}

double oracle_evolution_diff(const TruncatedModel& m, const StateVector& psi0,
                             int N) {
  if (N > m.max_steps) {
    throw Error(Err::kBadArgument, "horizon exceeds max_steps");
  }
  Eigen::VectorXcd w = lift(m, psi0);
  StateVector sv = psi0;
  double worst = 0;
  for (int k = 1; k <= N; ++k) {
    w = m.has_dense ? Eigen::VectorXcd(m.U_dense * w)
                    : Eigen::VectorXcd(m.U * w);
    sv = step(m.spec, sv);
    Eigen::VectorXcd lifted = lift(m, sv);
    worst = std::max(worst, (w - lifted).cwiseAbs().maxCoeff());
  }
  return worst;
}

UnitarityReport validate_unitarity(const MachineSpec& spec,
                                   int32_t seed_radius, double tol,
                                   int64_t basis_cap) {
  UnitarityReport rep;
  rep.tol = tol;

  // Per-key amplitude norms come straight off the table.
  for (const auto& [key, targets] : spec.rules) {
    double s = 0;
    for (const RuleTarget& t : targets) s += std::norm(t.c);
    double dev = std::abs(s - 1.0);
    if (dev > rep.worst_key_norm_dev) {
      rep.worst_key_norm_dev = dev;
      rep.worst_key = key_string(key);
    }
  }

  int32_t r = seed_radius;
  double est = double(spec.state_count) * 2.0 * double(2 * r + 1) *
               std::pow(double(spec.alphabet_size), double(2 * r + 1));
  if (est > double(basis_cap)) {
    throw Error(Err::kCapacity,
                "unitarity window of ~" + std::to_string(int64_t(est)) +
                    " configurations exceeds the cap of " +
                    std::to_string(basis_cap));
  }

  std::vector<Tape> tapes = enumerate_tapes(-r, r, spec.alphabet_size);
  std::vector<Config> cols;
  std::map<Config, std::vector<std::pair<int32_t, cxd>>> buckets;
  for (int32_t q = 0; q < spec.state_count; ++q) {
    for (int32_t h = -r; h <= r; ++h) {
      for (int32_t nb = 0; nb <= 1; ++nb) {
        for (const Tape& t : tapes) {
          Config c{q, h, t, nb};
          ++rep.basis_size;
          const auto* tg = rules_for(spec, c);
          if (tg == nullptr) {
            ++rep.columns_excluded;
            continue;
          }
          int32_t id = int32_t(cols.size());
          cols.push_back(c);
          ++rep.columns_checked;
          for (const RuleTarget& tr : *tg) {
            buckets[target_config(c, tr)].emplace_back(id, tr.c);
          }
        }
      }
    }
  }

  std::map<std::pair<int32_t, int32_t>, cxd> gram;
  for (const auto& [target, hits] : buckets) {
    for (size_t a = 0; a < hits.size(); ++a) {
      for (size_t b = a + 1; b < hits.size(); ++b) {
        auto key = std::minmax(hits[a].first, hits[b].first);
        cxd term = std::conj(hits[a].second) * hits[b].second;
        if (hits[b].first < hits[a].first) term = std::conj(term);
        gram[{key.first, key.second}] += term;
      }
    }
  }
  for (const auto& [pair, val] : gram) {
    double dev = std::abs(val);
    if (dev > rep.worst_pair_dev) {
      rep.worst_pair_dev = dev;
      const Config& ca = cols[pair.first];
      const Config& cb = cols[pair.second];
      RuleKey ka{ca.q, ca.halt, tape_read(ca.tape, ca.h)};
      RuleKey kb{cb.q, cb.halt, tape_read(cb.tape, cb.h)};
      rep.worst_pair = key_string(ka) + " vs " + key_string(kb) +
                       " at head offset " + std::to_string(cb.h - ca.h);
    }
  }
  return rep;
}

}  // namespace qtm
