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

#include <sstream>
#include <string>
#include <vector>

#include "chainsim/model.hpp"

namespace chainsim {

// Two fluid backlog families per (service, vnf, vm): `pending` holds services
// waiting to be processed by that VNF at that VM; `staged` holds services
// already processed locally and waiting to be forwarded to a VM that runs the
// next VNF. Entries outside the chain structure stay identically zero.
struct QueueState {
  Tensor3 pending;  // services awaiting VNF k at VM n
  Tensor3 staged;   // processed at n, awaiting VNF k downstream

  static QueueState zeros(int n_services, int n_vnfs, int n_vms) {
    QueueState st;
    st.pending = Tensor3(n_services, n_vnfs, n_vms);
    st.staged = Tensor3(n_services, n_vnfs, n_vms);
    return st;
  }

  friend bool operator==(const QueueState&, const QueueState&) = default;
};

// One slot's control: a one-hot VNF installation per VM, at most one
// processing rate per VM, and at most one transmit rate per link. Rate
// tensors use link ids in the last axis.
struct Decision {
  std::vector<VnfId> placement;  // installed VNF per VM
  Tensor3 proc_rate;             // [service][vnf][vm]
  Tensor3 pending_route;         // [service][vnf][link]
  Tensor3 staged_route;          // [service][vnf][link]

  static Decision zeros(int n_services, int n_vnfs, int n_vms, int n_links) {
    Decision d;
    d.placement.assign(n_vms, 0);
    d.proc_rate = Tensor3(n_services, n_vnfs, n_vms);
    d.pending_route = Tensor3(n_services, n_vnfs, n_links);
    d.staged_route = Tensor3(n_services, n_vnfs, n_links);
    return d;
  }

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct Violation {
  std::string what;
};

// Checks the single-service-per-resource constraints and the capacity caps.
// Reports every breach instead of stopping at the first.
inline std::vector<Violation> feasibility_check(const Decision& d,
                                                const Topology& topo,
                                                const ChainSet& chains) {
  std::vector<Violation> out;
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  auto add = [&out](const std::string& msg) { out.push_back({msg}); };

  if (static_cast<int>(d.placement.size()) != topo.n_vms) {
    add("placement vector size mismatch");
    return out;
  }
  for (VmId n = 0; n < topo.n_vms; ++n)
    if (d.placement[n] < 0 || d.placement[n] >= K)
      add("vm " + std::to_string(n + 1) + ": placement out of range");

  // Per VM: at most one positive processing rate, on the installed VNF,
  // within the processing cap.
  for (VmId n = 0; n < topo.n_vms; ++n) {
    int active = 0;
    for (ServiceId i = 0; i < I; ++i) {
      for (VnfId k = 0; k < K; ++k) {
        double p = d.proc_rate.at(i, k, n);
        if (p == 0.0) continue;
        ++active;
        if (p < 0.0)
          add("vm " + std::to_string(n + 1) + ": negative processing rate");
        if (k != d.placement[n])
          add("vm " + std::to_string(n + 1) +
              ": processing a VNF that is not installed");
        if (p > topo.proc_cap[n])
          add("vm " + std::to_string(n + 1) + ": processing rate " +
              std::to_string(p) + " exceeds cap " +
              std::to_string(topo.proc_cap[n]));
      }
    }
    if (active > 1)
      add("vm " + std::to_string(n + 1) + ": more than one queue processed");
  }

  // Per link: at most one positive rate across both families, within cap.
  const int L = static_cast<int>(topo.links.size());
  for (LinkId l = 0; l < L; ++l) {
    int active = 0;
    double cap = topo.links[l].cap;
    auto check_family = [&](const Tensor3& r, const char* fam) {
      for (ServiceId i = 0; i < I; ++i)
        for (VnfId k = 0; k < K; ++k) {
          double x = r.at(i, k, l);
          if (x == 0.0) continue;
          ++active;
          std::string where = std::string(fam) + " on link [" +
                              std::to_string(topo.links[l].from + 1) + "," +
                              std::to_string(topo.links[l].to + 1) + "]";
          if (x < 0.0) add("negative rate for " + where);
          if (x > cap)
            add("rate " + std::to_string(x) + " exceeds cap " +
                std::to_string(cap) + " for " + where);
        }
    };
    check_family(d.pending_route, "pending transfer");
    check_family(d.staged_route, "staged transfer");
    if (active > 1)
      add("link [" + std::to_string(topo.links[l].from + 1) + "," +
          std::to_string(topo.links[l].to + 1) +
          "]: more than one queue transmitted");
  }
  return out;
}

inline std::string describe(const std::vector<Violation>& vs) {
  std::ostringstream os;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (j) os << "; ";
    os << vs[j].what;
  }
  return os.str();
}

struct StepResult {
  QueueState next;
  bool truncated = false;  // whether any drain was clipped at an empty queue
};

// Advances both backlog families by one slot. Drains are clipped at zero
// before inflows are added; the staged gain of a VNF equals the processing
// rate of its predecessor at the same VM, and completions at chain tails
// leave the platform.
inline StepResult step_queues(const QueueState& state, const Decision& d,
                              const StateSample& s, const Topology& topo,
                              const ChainSet& chains) {
  {
    std::vector<Violation> bad = feasibility_check(d, topo, chains);
    if (!bad.empty())
      throw std::invalid_argument("step_queues: infeasible decision: " +
                                  describe(bad));
  }
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  const int N = topo.n_vms;
  StepResult res;
  res.next = QueueState::zeros(I, K, N);

  for (ServiceId i = 0; i < I; ++i) {
    for (VnfId k = 0; k < K; ++k) {
      if (!chains.in_chain(i, k)) continue;
      for (VmId n = 0; n < N; ++n) {
        double out_flow = d.proc_rate.at(i, k, n);
        for (LinkId l : topo.out_links[n]) out_flow += d.pending_route.at(i, k, l);
        double drained = state.pending.at(i, k, n) - out_flow;
        if (drained < 0.0) {
          if (out_flow > 0.0) res.truncated = true;
          drained = 0.0;
        }
        double in_flow = s.arrivals.at(i, k, n);
        for (LinkId l : topo.in_links[n]) {
          in_flow += d.pending_route.at(i, k, l);
          in_flow += d.staged_route.at(i, k, l);
        }
        res.next.pending.at(i, k, n) = drained + in_flow;
      }
      if (chains.staged_valid(i, k)) {
        const VnfId kp = chains.prev(i, k);
        for (VmId n = 0; n < N; ++n) {
          double out_flow = 0.0;
          for (LinkId l : topo.out_links[n]) out_flow += d.staged_route.at(i, k, l);
          double drained = state.staged.at(i, k, n) - out_flow;
          if (drained < 0.0) {
            if (out_flow > 0.0) res.truncated = true;
            drained = 0.0;
          }
          res.next.staged.at(i, k, n) = drained + d.proc_rate.at(i, kp, n);
        }
      }
    }
  }
  return res;
}

// Quadratic usage cost of one slot's decision under the realized prices.
inline double slot_cost(const Decision& d, const StateSample& s,
                        const Topology& topo, const ChainSet& chains) {
  const int I = chains.num_services();
  const int K = chains.num_vnfs();
  double cost = 0.0;
  for (ServiceId i = 0; i < I; ++i)
    for (VnfId k = 0; k < K; ++k) {
      for (VmId n = 0; n < topo.n_vms; ++n) {
        double p = d.proc_rate.at(i, k, n);
        if (p != 0.0) cost += s.proc_price[n] * p * p;
      }
      for (LinkId l = 0; l < static_cast<LinkId>(topo.links.size()); ++l) {
        double u = d.pending_route.at(i, k, l);
        double v = d.staged_route.at(i, k, l);
        if (u != 0.0) cost += s.route_price[l] * u * u;
        if (v != 0.0) cost += s.route_price[l] * v * v;
      }
    }
  return cost;
}

inline double total_backlog(const QueueState& st) {
  return st.pending.sum() + st.staged.sum();
}

}  // namespace chainsim
