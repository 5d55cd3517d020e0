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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chainsim/algorithms.hpp"
#include "chainsim/dual_core.hpp"
#include "chainsim/dynamics.hpp"
#include "chainsim/model.hpp"

namespace chainsim {

// Capacity/arrival magnitudes a finished run was subject to; inputs to the
// analytic constants.
struct TopologyFacts {
  int max_degree = 0;
  double max_link_cap = 0.0;
  double max_proc_cap = 0.0;
  double max_arrival = 0.0;

  friend bool operator==(const TopologyFacts&, const TopologyFacts&) = default;

  static TopologyFacts gather(const Topology& topo, const ChainSet& chains,
                              const SimConfig& cfg) {
    TopologyFacts f;
    f.max_degree = topo.max_degree();
    f.max_link_cap = topo.max_link_cap();
    f.max_proc_cap = topo.max_proc_cap();
    f.max_arrival = cfg.max_arrival(chains.num_services());
    return f;
  }
};

struct TraceRow {
  int t = 0;
  double cost = 0.0;
  double avg_cost = 0.0;       // running mean of cost over slots 0..t
  double backlog = 0.0;        // total backlog at the start of the slot
  bool truncated = false;      // an empty-queue clip fired during this slot
  double dev_pending = 0.0;    // max |pending - window anchor| over entries
  double dev_staged = 0.0;
  double proc_rate = 0.0;      // summed processing rate this slot
  double route_rate = 0.0;     // summed transmit rate this slot
  std::vector<VnfId> placement;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

// Full record of one run.
struct Trace {
  std::vector<TraceRow> rows;
  PolicyKind policy = PolicyKind::DualGradient;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  int t_delta = 1;
  TopologyFacts facts;
  LearnState final_learn;
  std::vector<Decision> decisions;  // only kept on request

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct RunOptions {
  bool sample_capacities = true;  // draw caps from cfg.capacity at setup
  bool keep_decisions = false;
};

// Capacity draws happen once, before the per-slot stream, on the same seed.
struct RunSetup {
  Topology topo;
  Rng stream;
};

inline RunSetup prepare_run(const SimConfig& cfg, const Topology& topo_template,
                            const RunOptions& opts = {}) {
  RunSetup setup{expand_colocated(topo_template), Rng(cfg.seed)};
  if (opts.sample_capacities)
    setup.topo.sample_capacities(setup.stream, cfg.capacity.lo, cfg.capacity.hi);
  setup.topo.validate();
  return setup;
}

namespace detail {

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  const std::vector<double>& x = a.raw();
  const std::vector<double>& y = b.raw();
  for (std::size_t j = 0; j < x.size(); ++j)
    m = std::max(m, std::abs(x[j] - y[j]));
  return m;
}

}  // namespace detail

// Executes one run: sample state, decide per the configured policy, step the
// queues, record. All VMs decide on the same start-of-slot snapshot; window
// anchors for the backlog-drift check are refreshed on the t_delta grid in
// both placement modes.
inline Trace run(const SimConfig& cfg, const Topology& topo_template,
                 const ChainSet& chains, const RunOptions& opts = {}) {
  cfg.validate();
  RunSetup setup = prepare_run(cfg, topo_template, opts);
  const Topology& topo = setup.topo;
  SimContext ctx{&topo, &chains, &cfg};
  StateSampler sampler(setup.stream, topo, chains, cfg);

  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  const int N = topo.n_vms;

  Trace trace;
  trace.policy = cfg.policy;
  trace.epsilon = cfg.epsilon;
  trace.seed = cfg.seed;
  trace.t_delta = cfg.t_delta;
  trace.facts = TopologyFacts::gather(topo, chains, cfg);
  trace.rows.reserve(cfg.horizon);

  QueueState state = QueueState::zeros(I, K, N);
  QueueState anchor = state;
  LearnState learn = LearnState::zeros(I, K, N);
  PlacementHold hold;
  const bool two_timescale = cfg.placement == PlacementMode::TwoTimescale;

  double cost_sum = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    StateSample s = sampler.next();
    if (t % cfg.t_delta == 0) {
      anchor = state;
      if (two_timescale) {
        switch (cfg.policy) {
          case PolicyKind::DualGradient:
            hold = twoscale_place(
                MultiplierView::scaled_backlog(state, cfg.epsilon), s, t, ctx);
            break;
          case PolicyKind::MeanPrice:
            hold = twoscale_place(
                MultiplierView::scaled_backlog(state, cfg.epsilon), s, t, ctx,
                /*use_means=*/true);
            break;
          case PolicyKind::LearnAndAdapt:
            hold = twoscale_place(effective_multiplier(learn, state, ctx), s, t,
                                  ctx);
            break;
        }
      }
    }
    const PlacementHold* hold_ptr = two_timescale ? &hold : nullptr;

    Decision d;
    Decision learning;
    bool has_learning = false;
    switch (cfg.policy) {
      case PolicyKind::DualGradient:
        d = alg1_decide(state, s, ctx, hold_ptr);
        break;
      case PolicyKind::MeanPrice:
        d = heu_decide(state, s, ctx, hold_ptr);
        break;
      case PolicyKind::LearnAndAdapt: {
        Alg2Decision ad = alg2_decide(state, learn, s, ctx, hold_ptr);
        d = std::move(ad.applied);
        learning = std::move(ad.learning);
        has_learning = true;
        break;
      }
    }

    TraceRow row;
    row.t = t;
    row.cost = slot_cost(d, s, topo, chains);
    cost_sum += row.cost;
    row.avg_cost = cost_sum / (t + 1);
    row.backlog = total_backlog(state);
    row.dev_pending = detail::max_abs_diff(state.pending, anchor.pending);
    row.dev_staged = detail::max_abs_diff(state.staged, anchor.staged);
    row.proc_rate = d.proc_rate.sum();
    row.route_rate = d.pending_route.sum() + d.staged_route.sum();
    row.placement = d.placement;

    StepResult step = step_queues(state, d, s, topo, chains);
    row.truncated = step.truncated;
    trace.rows.push_back(std::move(row));
    if (opts.keep_decisions) trace.decisions.push_back(d);

    if (has_learning) alg2_update(learn, learning, s, ctx);
    state = std::move(step.next);
  }
  trace.final_learn = std::move(learn);
  return trace;
}

struct SteadyStats {
  double mean_cost = 0.0;
  double mean_backlog = 0.0;
  double mean_proc_rate = 0.0;
  double mean_route_rate = 0.0;
};

// Means over the final ceil(tail_fraction * T) slots.
inline SteadyStats steady_state_stats(const Trace& trace, double tail_fraction) {
  if (trace.rows.empty())
    throw std::invalid_argument("steady_state_stats: empty trace");
  if (tail_fraction <= 0.0 || tail_fraction > 1.0)
    throw std::invalid_argument("steady_state_stats: tail_fraction in (0,1]");
  const std::size_t total = trace.rows.size();
  std::size_t window = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(total)));
  window = std::max<std::size_t>(1, std::min(window, total));
  SteadyStats st;
  for (std::size_t j = total - window; j < total; ++j) {
    st.mean_cost += trace.rows[j].cost;
    st.mean_backlog += trace.rows[j].backlog;
    st.mean_proc_rate += trace.rows[j].proc_rate;
    st.mean_route_rate += trace.rows[j].route_rate;
  }
  st.mean_cost /= window;
  st.mean_backlog /= window;
  st.mean_proc_rate /= window;
  st.mean_route_rate /= window;
  return st;
}

}  // namespace chainsim
