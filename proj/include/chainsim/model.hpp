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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chainsim/util.hpp"

namespace chainsim {

using VmId = int;
using VnfId = int;
using ServiceId = int;
using LinkId = int;

// Dense (service, vnf, vm) array. Also reused with links in the last axis.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2)
      : d0_(d0), d1_(d1), d2_(d2),
        v_(static_cast<std::size_t>(d0) * d1 * d2, 0.0) {}

  double& at(int i, int k, int n) { return v_[idx(i, k, n)]; }
  double at(int i, int k, int n) const { return v_[idx(i, k, n)]; }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }

  double sum() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s;
  }

  void fill(double x) { v_.assign(v_.size(), x); }

  void scale(double c) {
    for (double& x : v_) x *= c;
  }

  const std::vector<double>& raw() const { return v_; }

  friend bool operator==(const Tensor3& a, const Tensor3& b) = default;

 private:
  std::size_t idx(int i, int k, int n) const {
    return (static_cast<std::size_t>(i) * d1_ + k) * d2_ + n;
  }
  int d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> v_;
};

// One directed inter-VM connection. zero_price marks intra-host links whose
// routing price is pinned to the configured floor instead of being sampled.
struct Link {
  VmId from = 0;
  VmId to = 0;
  double cap = 0.0;       // services/slot
  bool zero_price = false;
};

// The VM platform: directed links with per-link transmit caps, per-VM
// processing caps, and an optional VM-to-host assignment.
struct Topology {
  int n_vms = 0;
  std::vector<Link> links;
  std::vector<double> proc_cap;  // per VM, services/slot
  std::vector<int> host_of;      // per VM, -1 when unassigned

  // Derived lookups, rebuilt by finalize().
  std::vector<std::vector<LinkId>> out_links;
  std::vector<std::vector<LinkId>> in_links;
  std::vector<LinkId> link_at;  // n_vms*n_vms -> link id or -1

  static Topology complete(int n) {
    Topology t;
    t.n_vms = n;
    t.proc_cap.assign(n, 0.0);
    t.host_of.assign(n, -1);
    for (VmId a = 0; a < n; ++a)
      for (VmId b = 0; b < n; ++b)
        if (a != b) t.links.push_back({a, b, 0.0, false});
    t.finalize();
    return t;
  }

  void finalize() {
    out_links.assign(n_vms, {});
    in_links.assign(n_vms, {});
    link_at.assign(static_cast<std::size_t>(n_vms) * n_vms, -1);
    for (LinkId l = 0; l < static_cast<LinkId>(links.size()); ++l) {
      const Link& e = links[l];
      out_links[e.from].push_back(l);
      in_links[e.to].push_back(l);
      link_at[static_cast<std::size_t>(e.from) * n_vms + e.to] = l;
    }
  }

  LinkId find_link(VmId a, VmId b) const {
    if (a < 0 || b < 0 || a >= n_vms || b >= n_vms) return -1;
    return link_at[static_cast<std::size_t>(a) * n_vms + b];
  }

  // Maximum over VMs of max(in-degree, out-degree).
  int max_degree() const {
    int d = 0;
    for (VmId n = 0; n < n_vms; ++n) {
      d = std::max(d, static_cast<int>(out_links[n].size()));
      d = std::max(d, static_cast<int>(in_links[n].size()));
    }
    return d;
  }

  double max_link_cap() const {
    double c = 0.0;
    for (const Link& e : links) c = std::max(c, e.cap);
    return c;
  }

  double max_proc_cap() const {
    double c = 0.0;
    for (double p : proc_cap) c = std::max(c, p);
    return c;
  }

  // Draws per-VM and per-link caps once; order is VMs then links.
  void sample_capacities(Rng& rng, double lo, double hi) {
    for (VmId n = 0; n < n_vms; ++n) proc_cap[n] = rng.uniform(lo, hi);
    for (Link& e : links) e.cap = rng.uniform(lo, hi);
  }

  void validate() const {
    if (n_vms <= 0) throw ConfigError("topology: n_vms must be positive");
    if (static_cast<int>(proc_cap.size()) != n_vms)
      throw ConfigError("topology: proc_cap size mismatch");
    for (VmId n = 0; n < n_vms; ++n)
      if (proc_cap[n] <= 0.0)
        throw ConfigError("topology: proc_cap must be positive at vm " +
                          std::to_string(n + 1));
    for (const Link& e : links) {
      if (e.from < 0 || e.from >= n_vms || e.to < 0 || e.to >= n_vms)
        throw ConfigError("topology: link endpoint out of range");
      if (e.from == e.to)
        throw ConfigError("topology: self-link at vm " +
                          std::to_string(e.from + 1));
      if (e.cap <= 0.0)
        throw ConfigError("topology: link cap must be positive on [" +
                          std::to_string(e.from + 1) + "," +
                          std::to_string(e.to + 1) + "]");
    }
    // Co-hosted VMs must be directly connected in both directions.
    for (VmId a = 0; a < n_vms; ++a)
      for (VmId b = 0; b < n_vms; ++b)
        if (a != b && host_of[a] >= 0 && host_of[a] == host_of[b] &&
            find_link(a, b) < 0)
          throw ConfigError("topology: co-hosted vms " + std::to_string(a + 1) +
                            "," + std::to_string(b + 1) + " lack a link");
  }
};

// Flags every intra-host link as zero-price. The sampler then emits the
// configured price floor for them instead of a random draw.
inline Topology expand_colocated(const Topology& topo) {
  Topology out = topo;
  for (Link& e : out.links)
    if (out.host_of[e.from] >= 0 && out.host_of[e.from] == out.host_of[e.to])
      e.zero_price = true;
  out.finalize();
  return out;
}

// An ordered, duplicate-free VNF sequence a service type must traverse.
struct ServiceChain {
  ServiceId id = 0;
  std::vector<VnfId> vnfs;
};

// Chain collection plus the predecessor/successor tables used throughout the
// per-slot decision rules and the queue update.
class ChainSet {
 public:
  ChainSet() = default;

  explicit ChainSet(std::vector<ServiceChain> chains, int n_vnfs = -1)
      : chains_(std::move(chains)) {
    if (chains_.empty()) throw ConfigError("chains: at least one chain required");
    int max_id = -1;
    for (const ServiceChain& c : chains_) {
      if (c.vnfs.empty())
        throw ConfigError("chains: chain " + std::to_string(c.id + 1) +
                          " is empty");
      for (VnfId k : c.vnfs) max_id = std::max(max_id, k);
    }
    n_vnfs_ = n_vnfs >= 0 ? n_vnfs : max_id + 1;
    if (max_id >= n_vnfs_)
      throw ConfigError("chains: vnf id exceeds vnf count");
    const int I = num_services();
    member_.assign(I, std::vector<char>(n_vnfs_, 0));
    prev_.assign(I, std::vector<int>(n_vnfs_, -1));
    next_.assign(I, std::vector<int>(n_vnfs_, -1));
    first_.assign(I, -1);
    last_.assign(I, -1);
    for (int i = 0; i < I; ++i) {
      const std::vector<VnfId>& seq = chains_[i].vnfs;
      for (std::size_t pos = 0; pos < seq.size(); ++pos) {
        VnfId k = seq[pos];
        if (k < 0) throw ConfigError("chains: negative vnf id");
        if (member_[i][k])
          throw ConfigError("chains: duplicate vnf in chain " +
                            std::to_string(i + 1));
        member_[i][k] = 1;
        if (pos > 0) prev_[i][k] = seq[pos - 1];
        if (pos + 1 < seq.size()) next_[i][k] = seq[pos + 1];
      }
      first_[i] = seq.front();
      last_[i] = seq.back();
    }
  }

  int num_services() const { return static_cast<int>(chains_.size()); }
  int num_vnfs() const { return n_vnfs_; }
  const std::vector<ServiceChain>& chains() const { return chains_; }

  bool in_chain(ServiceId i, VnfId k) const { return member_[i][k] != 0; }

  // Predecessor / successor VNF within chain i, or -1 at the chain ends.
  VnfId prev(ServiceId i, VnfId k) const { return prev_[i][k]; }
  VnfId next(ServiceId i, VnfId k) const { return next_[i][k]; }

  VnfId first_vnf(ServiceId i) const { return first_[i]; }
  VnfId last_vnf(ServiceId i) const { return last_[i]; }

  // Whether the staged queue (processed locally, awaiting VNF k downstream)
  // exists for (i,k). Completed services leave the platform, so the VNF after
  // the chain tail has no queue anywhere.
  bool staged_valid(ServiceId i, VnfId k) const {
    return in_chain(i, k) && prev_[i][k] >= 0;
  }

  // Neighbor lookup for explicit queries; throws on unknown (i,k).
  std::pair<std::optional<VnfId>, std::optional<VnfId>> neighbors(
      ServiceId i, VnfId k) const {
    if (i < 0 || i >= num_services() || k < 0 || k >= n_vnfs_ || !member_[i][k])
      throw std::out_of_range("chain_neighbors: vnf " + std::to_string(k + 1) +
                              " not in chain " + std::to_string(i + 1));
    std::optional<VnfId> p, s;
    if (prev_[i][k] >= 0) p = prev_[i][k];
    if (next_[i][k] >= 0) s = next_[i][k];
    return {p, s};
  }

 private:
  std::vector<ServiceChain> chains_;
  int n_vnfs_ = 0;
  std::vector<std::vector<char>> member_;
  std::vector<std::vector<int>> prev_, next_;
  std::vector<int> first_, last_;
};

// One slot's random environment: exogenous arrivals plus per-VM processing
// prices and per-link routing prices.
struct StateSample {
  Tensor3 arrivals;                 // [service][vnf][vm], services/slot
  std::vector<double> proc_price;   // per VM
  std::vector<double> route_price;  // per link id
};

enum class PolicyKind { DualGradient, LearnAndAdapt, MeanPrice };
enum class PlacementMode { PerSlot, TwoTimescale };

inline std::string policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::DualGradient: return "alg1";
    case PolicyKind::LearnAndAdapt: return "alg2";
    case PolicyKind::MeanPrice: return "heu";
  }
  return "?";
}

inline std::optional<PolicyKind> policy_from_name(const std::string& s) {
  if (s == "alg1") return PolicyKind::DualGradient;
  if (s == "alg2") return PolicyKind::LearnAndAdapt;
  if (s == "heu") return PolicyKind::MeanPrice;
  return std::nullopt;
}

struct UniformDist {
  double lo = 0.0;
  double hi = 0.0;
  double mean() const { return 0.5 * (lo + hi); }
  double variance() const { return (hi - lo) * (hi - lo) / 12.0; }
};

// Uniform distribution with a given mean and variance; rejects parameter
// pairs that would force negative support.
inline UniformDist uniform_from_mean_variance(double mean, double variance) {
  if (variance < 0.0) throw ConfigError("variance must be nonnegative");
  double width = std::sqrt(12.0 * variance);
  double lo = mean - 0.5 * width;
  double hi = mean + 0.5 * width;
  if (lo < 0.0)
    throw ConfigError("variance too large for a uniform on positive support");
  return {lo, hi};
}

// All run parameters. Every field has a config-file key.
struct SimConfig {
  double epsilon = 0.1;       // cost/backlog tradeoff stepsize
  int horizon = 10000;        // slots
  int t_delta = 5;            // placement interval, slots
  double theta = kThetaAuto;  // learn-and-adapt bias; auto = from epsilon
  std::uint64_t seed = 1;
  UniformDist price{0.1, 1.0};     // applied to both price families
  double arrival_mean = 14.0;      // total over service types, services/slot
  UniformDist capacity{10.0, 20.0};
  double beta_floor = 1e-6;        // routing price on zero-price links
  PolicyKind policy = PolicyKind::DualGradient;
  PlacementMode placement = PlacementMode::TwoTimescale;
  double tail_fraction = 0.25;     // steady-state averaging window
  double eta_scale = 1.0;          // learning stepsize scale: eta(t) = scale/sqrt(t)
  bool strict_drain = false;       // cap rates at source backlogs

  static constexpr double kThetaAuto = -1.0;

  double resolved_theta() const {
    if (theta == kThetaAuto) return default_theta(epsilon);
    return theta;
  }

  // Bias that trades steady-state backlog against cost; natural log.
  static double default_theta(double eps) {
    double l = std::log(eps);
    return 2.0 * std::sqrt(eps) * l * l;
  }

  double eta(int t) const { return eta_scale / std::sqrt(static_cast<double>(t)); }

  // Arrivals are drawn per service type; the configured mean is the total.
  double arrival_mean_per_service(int n_services) const {
    return arrival_mean / n_services;
  }
  double max_arrival(int n_services) const {
    return 2.0 * arrival_mean_per_service(n_services);
  }

  void validate() const {
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
    if (horizon < 0) throw ConfigError("horizon must be >= 0");
    if (t_delta < 1) throw ConfigError("t_delta must be >= 1");
    if (tail_fraction <= 0.0 || tail_fraction > 1.0)
      throw ConfigError("tail_fraction must be in (0,1]");
    if (price.lo <= 0.0 || price.hi < price.lo)
      throw ConfigError("price bounds must satisfy 0 < lo <= hi");
    if (capacity.lo <= 0.0 || capacity.hi < capacity.lo)
      throw ConfigError("capacity bounds must satisfy 0 < lo <= hi");
    if (arrival_mean < 0.0) throw ConfigError("arrival_mean must be >= 0");
    if (beta_floor <= 0.0) throw ConfigError("beta_floor must be positive");
    if (eta_scale < 0.0) throw ConfigError("eta_scale must be >= 0");
    if (theta != kThetaAuto && theta < 0.0)
      throw ConfigError("theta must be >= 0 or auto");
  }
};

// Draws one i.i.d. state per slot. Per slot the order is fixed: processing
// prices by VM, routing prices by link id, then per service type one total
// arrival plus per-VM split weights. Zero-price links consume their draw and
// emit the floor, so streams stay aligned across host layouts.
class StateSampler {
 public:
  StateSampler(std::uint64_t seed, const Topology& topo, const ChainSet& chains,
               const SimConfig& cfg)
      : rng_(seed), topo_(&topo), chains_(&chains), cfg_(&cfg) {}

  // Continues an existing stream (e.g. after capacity sampling).
  StateSampler(Rng rng, const Topology& topo, const ChainSet& chains,
               const SimConfig& cfg)
      : rng_(rng), topo_(&topo), chains_(&chains), cfg_(&cfg) {}

  StateSample next() {
    const int I = chains_->num_services();
    const int K = chains_->num_vnfs();
    const int N = topo_->n_vms;
    StateSample s;
    s.arrivals = Tensor3(I, K, N);
    s.proc_price.resize(N);
    s.route_price.resize(topo_->links.size());
    for (VmId n = 0; n < N; ++n)
      s.proc_price[n] = rng_.uniform(cfg_->price.lo, cfg_->price.hi);
    for (LinkId l = 0; l < static_cast<LinkId>(topo_->links.size()); ++l) {
      double draw = rng_.uniform(cfg_->price.lo, cfg_->price.hi);
      s.route_price[l] = topo_->links[l].zero_price ? cfg_->beta_floor : draw;
    }
    const double mean_i = cfg_->arrival_mean_per_service(I);
    for (ServiceId i = 0; i < I; ++i) {
      double total = rng_.uniform(0.0, 2.0 * mean_i);
      // New services enter at the chain head, split at random across VMs.
      std::vector<double> w(N);
      double wsum = 0.0;
      for (VmId n = 0; n < N; ++n) {
        w[n] = rng_.uniform();
        wsum += w[n];
      }
      VnfId k0 = chains_->first_vnf(i);
      if (wsum > 0.0)
        for (VmId n = 0; n < N; ++n)
          s.arrivals.at(i, k0, n) = total * w[n] / wsum;
      else
        s.arrivals.at(i, k0, 0) = total;
    }
    return s;
  }

 private:
  Rng rng_;
  const Topology* topo_;
  const ChainSet* chains_;
  const SimConfig* cfg_;
};

}  // namespace chainsim
