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

#include <optional>
#include <stdexcept>
#include <vector>

#include "chainsim/dual_core.hpp"
#include "chainsim/dynamics.hpp"
#include "chainsim/model.hpp"

namespace chainsim {

// Everything a policy needs besides the evolving state.
struct SimContext {
  const Topology* topo = nullptr;
  const ChainSet* chains = nullptr;
  const SimConfig* cfg = nullptr;

  PriceView prices(const StateSample& s, bool use_means) const {
    PriceView pv;
    pv.sample = &s;
    pv.topo = topo;
    pv.use_means = use_means;
    pv.mean_price = cfg->price.mean();
    pv.price_floor = cfg->beta_floor;
    return pv;
  }

  DecideOptions decide_options() const {
    return {cfg->epsilon, cfg->strict_drain};
  }
};

// VNF installation frozen for a window of slots.
struct PlacementHold {
  std::vector<VnfId> installed;  // per VM
  int valid_until = 0;           // first slot the hold no longer covers

  bool covers(int t) const { return t < valid_until; }
};

// Empirical dual variables learned across slots, plus the slot counter that
// drives the diminishing stepsize. Entries never go negative.
struct LearnState {
  Tensor3 lambda_pending;
  Tensor3 lambda_staged;
  int t = 1;

  static LearnState zeros(int n_services, int n_vnfs, int n_vms) {
    LearnState ls;
    ls.lambda_pending = Tensor3(n_services, n_vnfs, n_vms);
    ls.lambda_staged = Tensor3(n_services, n_vnfs, n_vms);
    return ls;
  }

  friend bool operator==(const LearnState&, const LearnState&) = default;
};

namespace detail {

// Shared pipeline: fix the installation (hold, or per-slot selection under
// the given view), then build candidates and run the greedy one-to-one
// assignment per VM.
inline Decision decide_with_view(const MultiplierView& view,
                                 const QueueState& state, const StateSample& s,
                                 const SimContext& ctx, const PlacementHold* hold,
                                 bool use_means) {
  const Topology& topo = *ctx.topo;
  const ChainSet& chains = *ctx.chains;
  const PriceView prices = ctx.prices(s, use_means);
  const DecideOptions opt = ctx.decide_options();
  Decision d = Decision::zeros(chains.num_services(), chains.num_vnfs(),
                               topo.n_vms, static_cast<int>(topo.links.size()));
  for (VmId n = 0; n < topo.n_vms; ++n) {
    VnfId installed = hold ? hold->installed[n]
                           : placement_select(view, prices, n, chains,
                                              opt.epsilon);
    d.placement[n] = installed;
    std::vector<Candidate> cands =
        build_candidates(view, state, prices, topo, chains, n, installed, opt);
    greedy_assign(std::move(cands), n, topo, chains, d);
  }
  return d;
}

}  // namespace detail

// Dual-gradient policy: multipliers are the scaled backlogs.
inline Decision alg1_decide(const QueueState& state, const StateSample& s,
                            const SimContext& ctx,
                            const PlacementHold* hold = nullptr) {
  MultiplierView view = MultiplierView::scaled_backlog(state, ctx.cfg->epsilon);
  return detail::decide_with_view(view, state, s, ctx, hold, false);
}

// Benchmark policy: same pipeline with all prices replaced by their means,
// so decisions depend on queue differences only.
inline Decision heu_decide(const QueueState& state, const StateSample& s,
                           const SimContext& ctx,
                           const PlacementHold* hold = nullptr) {
  MultiplierView view = MultiplierView::scaled_backlog(state, ctx.cfg->epsilon);
  return detail::decide_with_view(view, state, s, ctx, hold, true);
}

// Window placement: run the per-slot installation rule on the window-anchor
// snapshot and freeze the result for t_delta slots. Only valid on window
// boundaries.
inline PlacementHold twoscale_place(const MultiplierView& view,
                                    const StateSample& s, int tau,
                                    const SimContext& ctx,
                                    bool use_means = false) {
  if (tau % ctx.cfg->t_delta != 0)
    throw std::logic_error("twoscale_place: slot " + std::to_string(tau) +
                           " is not a placement boundary");
  const PriceView prices = ctx.prices(s, use_means);
  PlacementHold hold;
  hold.installed.resize(ctx.topo->n_vms);
  for (VmId n = 0; n < ctx.topo->n_vms; ++n)
    hold.installed[n] =
        placement_select(view, prices, n, *ctx.chains, ctx.cfg->epsilon);
  hold.valid_until = tau + ctx.cfg->t_delta;
  return hold;
}

// Effective multiplier: learned dual plus scaled backlog, biased downward by
// theta on every structurally valid entry. May be negative; the closed forms
// then yield zero rates.
inline MultiplierView effective_multiplier(const LearnState& learn,
                                           const QueueState& state,
                                           const SimContext& ctx) {
  const ChainSet& chains = *ctx.chains;
  const double eps = ctx.cfg->epsilon;
  const double theta = ctx.cfg->resolved_theta();
  MultiplierView v = MultiplierView::zeros(
      chains.num_services(), chains.num_vnfs(), ctx.topo->n_vms);
  for (ServiceId i = 0; i < chains.num_services(); ++i)
    for (VnfId k = 0; k < chains.num_vnfs(); ++k) {
      if (!chains.in_chain(i, k)) continue;
      for (VmId n = 0; n < ctx.topo->n_vms; ++n) {
        v.on_pending.at(i, k, n) = learn.lambda_pending.at(i, k, n) +
                                   eps * state.pending.at(i, k, n) - theta;
        if (chains.staged_valid(i, k))
          v.on_staged.at(i, k, n) = learn.lambda_staged.at(i, k, n) +
                                    eps * state.staged.at(i, k, n) - theta;
      }
    }
  return v;
}

struct Alg2Decision {
  Decision applied;  // drives the physical queues
  Decision learning; // the allocation the dual update is evaluated at
};

// Learn-and-adapt policy. The applied decision minimizes the online
// Lagrangian under the effective multiplier; the learning decision does the
// same under the empirical duals alone (fresh per-slot placement, no hold).
inline Alg2Decision alg2_decide(const QueueState& state, const LearnState& learn,
                                const StateSample& s, const SimContext& ctx,
                                const PlacementHold* hold = nullptr) {
  Alg2Decision out;
  MultiplierView gamma = effective_multiplier(learn, state, ctx);
  out.applied = detail::decide_with_view(gamma, state, s, ctx, hold, false);
  MultiplierView lambda;
  lambda.on_pending = learn.lambda_pending;
  lambda.on_staged = learn.lambda_staged;
  out.learning = detail::decide_with_view(lambda, state, s, ctx, nullptr, false);
  return out;
}

// Gradient-ascent step on the empirical duals using the learning
// allocation's flows and the realized arrivals, projected to stay
// nonnegative. Advances the stepsize clock.
inline void alg2_update(LearnState& learn, const Decision& learning,
                        const StateSample& s, const SimContext& ctx) {
  const Topology& topo = *ctx.topo;
  const ChainSet& chains = *ctx.chains;
  const double eta = ctx.cfg->eta(learn.t);
  for (ServiceId i = 0; i < chains.num_services(); ++i)
    for (VnfId k = 0; k < chains.num_vnfs(); ++k) {
      if (!chains.in_chain(i, k)) continue;
      for (VmId n = 0; n < topo.n_vms; ++n) {
        double grad = s.arrivals.at(i, k, n) - learning.proc_rate.at(i, k, n);
        for (LinkId l : topo.in_links[n]) {
          grad += learning.pending_route.at(i, k, l);
          grad += learning.staged_route.at(i, k, l);
        }
        for (LinkId l : topo.out_links[n])
          grad -= learning.pending_route.at(i, k, l);
        double next = learn.lambda_pending.at(i, k, n) + eta * grad;
        learn.lambda_pending.at(i, k, n) = std::max(next, 0.0);
      }
      if (chains.staged_valid(i, k)) {
        const VnfId kp = chains.prev(i, k);
        for (VmId n = 0; n < topo.n_vms; ++n) {
          double grad = learning.proc_rate.at(i, kp, n);
          for (LinkId l : topo.out_links[n])
            grad -= learning.staged_route.at(i, k, l);
          double next = learn.lambda_staged.at(i, k, n) + eta * grad;
          learn.lambda_staged.at(i, k, n) = std::max(next, 0.0);
        }
      }
    }
  ++learn.t;
}

}  // namespace chainsim
