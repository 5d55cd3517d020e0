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
#include <vector>

#include "chainsim/dynamics.hpp"
#include "chainsim/model.hpp"

namespace chainsim {

// Dual multipliers over the two queue families. Concrete policies fill this
// differently: the dual-gradient policy uses epsilon-scaled backlogs, the
// learn-and-adapt policy uses its effective multiplier (which may go
// negative), and its learning pass uses the empirical duals alone.
struct MultiplierView {
  Tensor3 on_pending;  // one entry per (service, vnf, vm)
  Tensor3 on_staged;

  static MultiplierView zeros(int n_services, int n_vnfs, int n_vms) {
    MultiplierView v;
    v.on_pending = Tensor3(n_services, n_vnfs, n_vms);
    v.on_staged = Tensor3(n_services, n_vnfs, n_vms);
    return v;
  }

  // The dual-gradient view: multipliers are the scaled physical backlogs.
  static MultiplierView scaled_backlog(const QueueState& st, double epsilon) {
    MultiplierView v;
    v.on_pending = st.pending;
    v.on_staged = st.staged;
    v.on_pending.scale(epsilon);
    v.on_staged.scale(epsilon);
    return v;
  }
};

// Price source for the per-slot rules. The benchmark policy swaps every
// sampled price for its distribution mean; zero-price links keep their floor
// in both modes (their distribution is the constant floor).
struct PriceView {
  const StateSample* sample = nullptr;
  const Topology* topo = nullptr;
  bool use_means = false;
  double mean_price = 0.0;
  double price_floor = 0.0;

  double processing(VmId n) const {
    return use_means ? mean_price : sample->proc_price[n];
  }
  double routing(LinkId l) const {
    if (!use_means) return sample->route_price[l];
    return topo->links[l].zero_price ? price_floor : mean_price;
  }
};

// Interior minimizer of price*r^2 - delta*r clipped to [0, cap]. For the
// dual-gradient view delta is epsilon times a backlog difference.
inline double opt_rate(double delta, double price, double cap) {
  if (price <= 0.0)
    throw std::invalid_argument("opt_rate: price must be positive");
  if (cap < 0.0) throw std::invalid_argument("opt_rate: cap must be >= 0");
  double r = delta / (2.0 * price);
  if (r < 0.0) return 0.0;
  return std::min(r, cap);
}

// Queue-price objective at the interior optimum: -delta^2/(4*price*epsilon)
// when delta is positive, else zero. Nonpositive by construction.
inline double objective_value(double delta, double price, double epsilon) {
  if (price <= 0.0)
    throw std::invalid_argument("objective_value: price must be positive");
  if (epsilon <= 0.0)
    throw std::invalid_argument("objective_value: epsilon must be positive");
  if (delta <= 0.0) return 0.0;
  return -delta * delta / (4.0 * price * epsilon);
}

// Exact objective at a given (possibly cap-clipped) rate. Coincides with
// objective_value whenever the cap does not bind.
inline double objective_at_rate(double rate, double delta, double price,
                                double epsilon) {
  return (price * rate * rate - delta * rate) / epsilon;
}

enum class ActionKind { Process, ForwardPending, ForwardStaged };

// One admissible action for a VM: process a pending queue, or transmit a
// pending/staged queue over one outgoing link. Ranked by objective; inert
// candidates (objective zero) are kept for introspection but never scheduled.
struct Candidate {
  ActionKind kind = ActionKind::Process;
  ServiceId service = 0;
  VnfId vnf = 0;
  LinkId link = -1;   // -1 for processing
  VmId target = -1;   // routing destination, -1 for processing
  double rate = 0.0;
  double objective = 0.0;

  bool active() const { return objective < 0.0; }
};

namespace detail {

inline double view_or_zero(const Tensor3& t, ServiceId i, VnfId k, VmId n) {
  return k < 0 ? 0.0 : t.at(i, k, n);
}

// Candidate ordering: better (more negative) objective first, then lowest
// vnf, service, destination VM, with processing ahead of routing on full
// ties.
inline bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  if (a.vnf != b.vnf) return a.vnf < b.vnf;
  if (a.service != b.service) return a.service < b.service;
  if (a.target != b.target) return a.target < b.target;
  return static_cast<int>(a.kind) < static_cast<int>(b.kind);
}

}  // namespace detail

// Per-VM installation rule: pick the VNF whose processing objective, summed
// over service types, is most negative. Ties go to the lowest VNF id.
inline VnfId placement_select(const MultiplierView& view, const PriceView& price,
                              VmId n, const ChainSet& chains, double epsilon) {
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  VnfId best_k = 0;
  double best = 0.0;
  bool have = false;
  for (VnfId k = 0; k < K; ++k) {
    double sum = 0.0;
    for (ServiceId i = 0; i < I; ++i) {
      if (!chains.in_chain(i, k)) continue;
      double delta = view.on_pending.at(i, k, n) -
                     detail::view_or_zero(view.on_staged, i, chains.next(i, k), n);
      sum += objective_value(delta, price.processing(n), epsilon);
    }
    if (!have || sum < best) {
      best = sum;
      best_k = k;
      have = true;
    }
  }
  return best_k;
}

// Options shared by the per-slot decision pipeline.
struct DecideOptions {
  double epsilon = 0.1;
  bool strict_drain = false;  // additionally cap rates at source backlogs
};

// Enumerates every admissible action of VM n against a start-of-slot
// snapshot: one processing candidate per service type whose chain uses the
// installed VNF, and one candidate per (service, vnf, outgoing link) for each
// queue family. Rates and objectives come from the closed forms, evaluated
// at the clipped rate so ranking reflects achievable improvement.
inline std::vector<Candidate> build_candidates(
    const MultiplierView& view, const QueueState& state, const PriceView& price,
    const Topology& topo, const ChainSet& chains, VmId n, VnfId installed,
    const DecideOptions& opt) {
  std::vector<Candidate> cands;
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  const double eps = opt.epsilon;

  for (ServiceId i = 0; i < I; ++i) {
    if (installed >= 0 && installed < K && chains.in_chain(i, installed)) {
      const VnfId k = installed;
      double delta = view.on_pending.at(i, k, n) -
                     detail::view_or_zero(view.on_staged, i, chains.next(i, k), n);
      double cap = topo.proc_cap[n];
      if (opt.strict_drain) cap = std::min(cap, state.pending.at(i, k, n));
      double a = price.processing(n);
      Candidate c;
      c.kind = ActionKind::Process;
      c.service = i;
      c.vnf = k;
      c.rate = opt_rate(delta, a, cap);
      c.objective = objective_at_rate(c.rate, delta, a, eps);
      cands.push_back(c);
    }
    for (VnfId k = 0; k < K; ++k) {
      if (!chains.in_chain(i, k)) continue;
      const bool has_staged = chains.staged_valid(i, k);
      for (LinkId l : topo.out_links[n]) {
        const VmId b = topo.links[l].to;
        const double beta = price.routing(l);
        {
          double delta = view.on_pending.at(i, k, n) - view.on_pending.at(i, k, b);
          double cap = topo.links[l].cap;
          if (opt.strict_drain) cap = std::min(cap, state.pending.at(i, k, n));
          Candidate c;
          c.kind = ActionKind::ForwardPending;
          c.service = i;
          c.vnf = k;
          c.link = l;
          c.target = b;
          c.rate = opt_rate(delta, beta, cap);
          c.objective = objective_at_rate(c.rate, delta, beta, eps);
          cands.push_back(c);
        }
        if (has_staged) {
          double delta = view.on_staged.at(i, k, n) - view.on_pending.at(i, k, b);
          double cap = topo.links[l].cap;
          if (opt.strict_drain) cap = std::min(cap, state.staged.at(i, k, n));
          Candidate c;
          c.kind = ActionKind::ForwardStaged;
          c.service = i;
          c.vnf = k;
          c.link = l;
          c.target = b;
          c.rate = opt_rate(delta, beta, cap);
          c.objective = objective_at_rate(c.rate, delta, beta, eps);
          cands.push_back(c);
        }
      }
    }
  }
  return cands;
}

// One-to-one assignment of queues to the processor and outgoing links:
// repeatedly take the most negative remaining objective, retire that queue
// and that resource, stop when only zero objectives remain. Writes the
// selected rates into `d` for VM n.
inline void greedy_assign(std::vector<Candidate> cands, VmId n,
                          const Topology& topo, const ChainSet& chains,
                          Decision& d) {
  std::sort(cands.begin(), cands.end(), detail::candidate_before);
  const int K = chains.num_vnfs();
  const int I = chains.num_services();
  // Queue key: family * I*K + i*K + k.  Resource key: 0 = processor, else
  // 1 + position of the link in this VM's outgoing list.
  std::vector<char> queue_used(static_cast<std::size_t>(2) * I * K, 0);
  std::vector<char> resource_used(1 + topo.out_links[n].size(), 0);
  std::vector<int> link_slot(topo.links.size(), -1);
  for (std::size_t j = 0; j < topo.out_links[n].size(); ++j)
    link_slot[topo.out_links[n][j]] = static_cast<int>(j) + 1;

  for (const Candidate& c : cands) {
    if (!c.active()) break;  // sorted: the rest are inert
    std::size_t qk = (c.kind == ActionKind::ForwardStaged ? 1u : 0u);
    qk = (qk * I + c.service) * K + c.vnf;
    int rk = c.kind == ActionKind::Process ? 0 : link_slot[c.link];
    if (queue_used[qk] || resource_used[rk]) continue;
    queue_used[qk] = 1;
    resource_used[rk] = 1;
    switch (c.kind) {
      case ActionKind::Process:
        d.proc_rate.at(c.service, c.vnf, n) = c.rate;
        break;
      case ActionKind::ForwardPending:
        d.pending_route.at(c.service, c.vnf, c.link) = c.rate;
        break;
      case ActionKind::ForwardStaged:
        d.staged_route.at(c.service, c.vnf, c.link) = c.rate;
        break;
    }
  }
}

// Instantaneous Lagrangian of a decision under a multiplier view: the slot
// cost plus multiplier-weighted net queue drifts.
inline double instantaneous_lagrangian(const Decision& d,
                                       const MultiplierView& view,
                                       const StateSample& s,
                                       const Topology& topo,
                                       const ChainSet& chains) {
  double value = slot_cost(d, s, topo, chains);
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  for (ServiceId i = 0; i < I; ++i)
    for (VnfId k = 0; k < K; ++k) {
      if (!chains.in_chain(i, k)) continue;
      for (VmId n = 0; n < topo.n_vms; ++n) {
        double drift = s.arrivals.at(i, k, n) - d.proc_rate.at(i, k, n);
        for (LinkId l : topo.in_links[n]) {
          drift += d.pending_route.at(i, k, l);
          drift += d.staged_route.at(i, k, l);
        }
        for (LinkId l : topo.out_links[n]) drift -= d.pending_route.at(i, k, l);
        value += view.on_pending.at(i, k, n) * drift;
      }
      if (chains.staged_valid(i, k)) {
        const VnfId kp = chains.prev(i, k);
        for (VmId n = 0; n < topo.n_vms; ++n) {
          double drift = d.proc_rate.at(i, kp, n);
          for (LinkId l : topo.out_links[n]) drift -= d.staged_route.at(i, k, l);
          value += view.on_staged.at(i, k, n) * drift;
        }
      }
    }
  return value;
}

}  // namespace chainsim
