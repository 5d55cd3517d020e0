// Copyright 2026 The Chainsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "chainsim/model.hpp"
#include "chainsim/sim_engine.hpp"

namespace chainsim {

// Drift-penalty constant of the cost-optimality gap, from the capacity and
// arrival magnitudes: 4.5*(deg*l)^2 + 1.5*(R^2 + p^2).
inline double drift_penalty_constant(double max_degree, double max_link_cap,
                                     double max_proc_cap, double max_arrival) {
  const double dl = max_degree * max_link_cap;
  return 4.5 * dl * dl +
         1.5 * (max_arrival * max_arrival + max_proc_cap * max_proc_cap);
}

inline double drift_penalty_constant(const Topology& topo, double max_arrival) {
  return drift_penalty_constant(topo.max_degree(), topo.max_link_cap(),
                                topo.max_proc_cap(), max_arrival);
}

// Same constant split into its pending- and staged-queue parts; the sum must
// agree with drift_penalty_constant exactly.
inline double drift_penalty_pending_part(double max_degree, double max_link_cap,
                                         double max_proc_cap,
                                         double max_arrival) {
  const double dl = max_degree * max_link_cap;
  return (8.0 * dl * dl + 3.0 * max_arrival * max_arrival +
          2.0 * max_proc_cap * max_proc_cap) / 2.0;
}

inline double drift_penalty_staged_part(double max_degree, double max_link_cap,
                                        double max_proc_cap) {
  const double dl = max_degree * max_link_cap;
  return (dl * dl + max_proc_cap * max_proc_cap) / 2.0;
}

// Largest possible one-slot backlog movement per queue family.
struct DriftBounds {
  double pending = 0.0;
  double staged = 0.0;
};

inline DriftBounds per_slot_drift_bounds(double max_degree, double max_link_cap,
                                         double max_proc_cap,
                                         double max_arrival) {
  const double dl = max_degree * max_link_cap;
  DriftBounds b;
  b.pending = std::max(dl + max_proc_cap, 2.0 * dl + max_arrival);
  b.staged = std::max(dl, max_proc_cap);
  return b;
}

inline DriftBounds per_slot_drift_bounds(const Topology& topo,
                                         double max_arrival) {
  return per_slot_drift_bounds(topo.max_degree(), topo.max_link_cap(),
                               topo.max_proc_cap(), max_arrival);
}

// Bound on the extra per-slot objective incurred by deciding against
// window-frozen backlogs instead of current ones. Grows with the square of
// the placement interval.
inline double placement_hold_loss(double epsilon, int t_delta, int n_vms,
                                  int n_services, int n_vnfs, double alpha_max,
                                  double beta_max, const DriftBounds& drift) {
  const double width = drift.pending + drift.staged;
  const double inner = (0.5 / alpha_max + 0.5 / beta_max) * width * width +
                       (2.0 / beta_max) * drift.pending * drift.pending;
  return epsilon * static_cast<double>(t_delta) * t_delta *
         static_cast<double>(n_vms) * n_vms * n_services * n_vnfs * inner;
}

inline double placement_hold_loss(const SimConfig& cfg, const Topology& topo,
                                  const ChainSet& chains) {
  DriftBounds drift =
      per_slot_drift_bounds(topo, cfg.max_arrival(chains.num_services()));
  return placement_hold_loss(cfg.epsilon, cfg.t_delta, topo.n_vms,
                             chains.num_services(), chains.num_vnfs(),
                             cfg.price.hi, cfg.price.hi, drift);
}

// Window-drift audit of one trace: every slot's deviation from its window
// anchor must stay within t_delta times the per-slot drift bound.
struct BoundReport {
  double bound_pending = 0.0;   // t_delta * per-slot pending bound
  double bound_staged = 0.0;
  std::vector<double> slack_pending;  // bound - observed deviation, per slot
  std::vector<double> slack_staged;
  int violations = 0;
  double max_ratio = 0.0;  // observed / bound, worst slot
};

inline BoundReport verify_window_drift(const Trace& trace, const SimConfig& cfg) {
  DriftBounds drift = per_slot_drift_bounds(
      trace.facts.max_degree, trace.facts.max_link_cap,
      trace.facts.max_proc_cap, trace.facts.max_arrival);
  BoundReport rep;
  rep.bound_pending = cfg.t_delta * drift.pending;
  rep.bound_staged = cfg.t_delta * drift.staged;
  rep.slack_pending.reserve(trace.rows.size());
  rep.slack_staged.reserve(trace.rows.size());
  for (const TraceRow& row : trace.rows) {
    rep.slack_pending.push_back(rep.bound_pending - row.dev_pending);
    rep.slack_staged.push_back(rep.bound_staged - row.dev_staged);
    if (row.dev_pending > rep.bound_pending) ++rep.violations;
    if (row.dev_staged > rep.bound_staged) ++rep.violations;
    if (rep.bound_pending > 0.0)
      rep.max_ratio = std::max(rep.max_ratio, row.dev_pending / rep.bound_pending);
    if (rep.bound_staged > 0.0)
      rep.max_ratio = std::max(rep.max_ratio, row.dev_staged / rep.bound_staged);
  }
  return rep;
}

// Steady-state cost/backlog across a stepsize sweep, with the expected
// trend flags: cost should not fall and backlog should not rise as the
// stepsize grows.
struct TradeoffPoint {
  double epsilon = 0.0;
  double mean_cost = 0.0;
  double mean_backlog = 0.0;
  double backlog_times_epsilon = 0.0;
  int n_runs = 0;
};

struct TradeoffReport {
  std::vector<TradeoffPoint> points;  // sorted by epsilon
  int cost_inversions = 0;            // adjacent pairs where cost drops
  int backlog_inversions = 0;         // adjacent pairs where backlog rises
  bool cost_nondecreasing() const { return cost_inversions == 0; }
  bool backlog_nonincreasing() const { return backlog_inversions == 0; }
};

inline TradeoffReport tradeoff_report(const std::vector<Trace>& runs,
                                      double tail_fraction) {
  if (runs.size() < 2)
    throw std::invalid_argument(
        "tradeoff_report: need at least two runs to compare");
  std::map<double, TradeoffPoint> by_eps;
  for (const Trace& tr : runs) {
    SteadyStats st = steady_state_stats(tr, tail_fraction);
    TradeoffPoint& pt = by_eps[tr.epsilon];
    pt.epsilon = tr.epsilon;
    pt.mean_cost += st.mean_cost;
    pt.mean_backlog += st.mean_backlog;
    ++pt.n_runs;
  }
  TradeoffReport rep;
  for (auto& [eps, pt] : by_eps) {
    pt.mean_cost /= pt.n_runs;
    pt.mean_backlog /= pt.n_runs;
    pt.backlog_times_epsilon = pt.mean_backlog * eps;
    rep.points.push_back(pt);
  }
  for (std::size_t j = 1; j < rep.points.size(); ++j) {
    if (rep.points[j].mean_cost < rep.points[j - 1].mean_cost)
      ++rep.cost_inversions;
    if (rep.points[j].mean_backlog > rep.points[j - 1].mean_backlog)
      ++rep.backlog_inversions;
  }
  return rep;
}

}  // namespace chainsim
