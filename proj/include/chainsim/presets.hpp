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

#include <filesystem>
#include <string>
#include <vector>

#include "chainsim/bounds.hpp"
#include "chainsim/config_io.hpp"
#include "chainsim/csv.hpp"
#include "chainsim/sim_engine.hpp"
#include "chainsim/util.hpp"

namespace chainsim {

// The stock experiment: 7 fully connected VMs, two three-stage service
// chains, prices uniform on [0.1,1], caps uniform on [10,20], 14 services/sec
// of arrivals, placement refreshed every 5 slots.
inline Scenario default_scenario() {
  Scenario sc;
  sc.topo = Topology::complete(7);
  sc.chains = ChainSet({{0, {0, 1, 2}}, {1, {2, 0, 1}}});
  sc.cfg = SimConfig{};
  return sc;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig3_time",  "fig4_epsilon",   "fig5_price_variance",
      "fig6_rates", "fig7_cost_size", "fig8_queue_size"};
  return names;
}

inline const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> ps = {PolicyKind::DualGradient,
                                             PolicyKind::LearnAndAdapt,
                                             PolicyKind::MeanPrice};
  return ps;
}

namespace detail {

inline std::string run_file_name(PolicyKind policy, double epsilon,
                                 std::uint64_t seed) {
  return "run_" + policy_name(policy) + "_eps" + format_g9(epsilon) + "_seed" +
         std::to_string(seed) + ".csv";
}

}  // namespace detail

struct SweepRow {
  PolicyKind policy;
  double variance = 0.0;
  SteadyStats stats;
};

// Steady-state behavior of all three policies across price variances at a
// fixed mean. Each point reuses the base seed, so the arrival stream is
// identical across points and only the price spread moves.
inline std::vector<SweepRow> price_variance_sweep(
    const Scenario& base, const std::vector<double>& variances) {
  const double mean = base.cfg.price.mean();
  std::vector<SimConfig> cfgs;
  for (double var : variances) {
    UniformDist dist = uniform_from_mean_variance(mean, var);  // may throw
    for (PolicyKind p : all_policies()) {
      SimConfig cfg = base.cfg;
      cfg.price = dist;
      cfg.policy = p;
      cfgs.push_back(cfg);
    }
  }
  std::vector<SweepRow> rows(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t j) {
    Trace tr = run(cfgs[j], base.topo, base.chains);
    rows[j].policy = cfgs[j].policy;
    rows[j].variance = cfgs[j].price.variance();
    rows[j].stats = steady_state_stats(tr, cfgs[j].tail_fraction);
  });
  return rows;
}

// Sweep grids are harness defaults; override the base via --config.
struct PresetGrids {
  std::vector<double> epsilons = {0.01, 0.05, 0.1, 0.5};
  std::vector<double> variances = {3.3e-5, 3.3e-4, 3.3e-3, 3.3e-2, 8.3e-2};
  std::vector<int> network_sizes = {5, 7, 9, 11};
  std::vector<double> arrival_means = {14.0, 28.0};
};

// Runs one named preset and writes its per-run traces and summary under
// out_dir/<name>/. Returns the files written.
inline std::vector<std::string> run_preset(const std::string& name,
                                           const Scenario& base,
                                           const std::string& out_dir,
                                           const PresetGrids& grids = {}) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / name;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& file, auto&& writer) {
    const std::string path = (dir / file).string();
    writer(path);
    written.push_back(path);
  };

  if (name == "fig3_time") {
    // Per-slot cost and backlog series for the three policies.
    std::vector<Trace> traces(all_policies().size());
    parallel_for(traces.size(), [&](std::size_t j) {
      SimConfig cfg = base.cfg;
      cfg.policy = all_policies()[j];
      traces[j] = run(cfg, base.topo, base.chains);
    });
    CsvTable summary({"policy", "epsilon", "seed", "steady_cost",
                      "steady_backlog"});
    for (const Trace& tr : traces) {
      emit(detail::run_file_name(tr.policy, tr.epsilon, tr.seed),
           [&](const std::string& p) { write_trace_csv_file(p, tr); });
      SteadyStats st = steady_state_stats(tr, base.cfg.tail_fraction);
      summary.add_row({policy_name(tr.policy), format_g9(tr.epsilon),
                       std::to_string(tr.seed), format_g9(st.mean_cost),
                       format_g9(st.mean_backlog)});
    }
    emit("summary.csv",
         [&](const std::string& p) { summary.write_file(p); });
  } else if (name == "fig4_epsilon") {
    // One run per (policy, epsilon) on the shared seed.
    struct Job { PolicyKind policy; double eps; };
    std::vector<Job> jobs;
    for (PolicyKind p : all_policies())
      for (double eps : grids.epsilons) jobs.push_back({p, eps});
    std::vector<Trace> traces(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
      SimConfig cfg = base.cfg;
      cfg.policy = jobs[j].policy;
      cfg.epsilon = jobs[j].eps;
      traces[j] = run(cfg, base.topo, base.chains);
    });
    CsvTable summary({"policy", "epsilon", "steady_cost", "steady_backlog",
                      "backlog_times_epsilon"});
    for (const Trace& tr : traces) {
      emit(detail::run_file_name(tr.policy, tr.epsilon, tr.seed),
           [&](const std::string& p) { write_trace_csv_file(p, tr); });
      SteadyStats st = steady_state_stats(tr, base.cfg.tail_fraction);
      summary.add_row({policy_name(tr.policy), format_g9(tr.epsilon),
                       format_g9(st.mean_cost), format_g9(st.mean_backlog),
                       format_g9(st.mean_backlog * tr.epsilon)});
    }
    emit("summary.csv",
         [&](const std::string& p) { summary.write_file(p); });
  } else if (name == "fig5_price_variance" || name == "fig6_rates") {
    std::vector<SweepRow> rows = price_variance_sweep(base, grids.variances);
    if (name == "fig5_price_variance") {
      CsvTable summary({"variance", "policy", "steady_cost", "steady_backlog"});
      for (const SweepRow& r : rows)
        summary.add_row({format_g9(r.variance), policy_name(r.policy),
                         format_g9(r.stats.mean_cost),
                         format_g9(r.stats.mean_backlog)});
      emit("summary.csv",
           [&](const std::string& p) { summary.write_file(p); });
    } else {
      CsvTable summary({"variance", "policy", "mean_proc_rate",
                        "mean_route_rate"});
      for (const SweepRow& r : rows)
        summary.add_row({format_g9(r.variance), policy_name(r.policy),
                         format_g9(r.stats.mean_proc_rate),
                         format_g9(r.stats.mean_route_rate)});
      emit("summary.csv",
           [&](const std::string& p) { summary.write_file(p); });
    }
  } else if (name == "fig7_cost_size" || name == "fig8_queue_size") {
    struct Job { PolicyKind policy; int n; double arrivals; };
    std::vector<Job> jobs;
    for (int n : grids.network_sizes)
      for (double a : grids.arrival_means)
        for (PolicyKind p : all_policies()) jobs.push_back({p, n, a});
    std::vector<SteadyStats> stats(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
      SimConfig cfg = base.cfg;
      cfg.policy = jobs[j].policy;
      cfg.arrival_mean = jobs[j].arrivals;
      Topology topo = Topology::complete(jobs[j].n);
      stats[j] = steady_state_stats(run(cfg, topo, base.chains),
                                    cfg.tail_fraction);
    });
    const bool cost = name == "fig7_cost_size";
    CsvTable summary({"n_vms", "arrival_mean", "policy",
                      cost ? "steady_cost" : "steady_backlog"});
    for (std::size_t j = 0; j < jobs.size(); ++j)
      summary.add_row({std::to_string(jobs[j].n), format_g9(jobs[j].arrivals),
                       policy_name(jobs[j].policy),
                       format_g9(cost ? stats[j].mean_cost
                                      : stats[j].mean_backlog)});
    emit("summary.csv",
         [&](const std::string& p) { summary.write_file(p); });
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return written;
}

}  // namespace chainsim
