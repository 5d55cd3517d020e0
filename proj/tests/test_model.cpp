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

#include <catch2/catch.hpp>

#include "test_helpers.hpp"

using namespace chainsim;

namespace {

ChainSet two_chains() { return ChainSet({{0, {0, 1, 2}}, {1, {2, 0, 1}}}); }

}  // namespace

TEST_CASE("sampler draws prices in range and arrivals at chain heads only") {
  Topology topo = Topology::complete(7);
  SimConfig cfg;
  {
    Rng rng(9);
    topo.sample_capacities(rng, cfg.capacity.lo, cfg.capacity.hi);
  }
  ChainSet chains = two_chains();
  StateSampler sampler(1, topo, chains, cfg);
  for (int t = 0; t < 200; ++t) {
    StateSample s = sampler.next();
    for (double a : s.proc_price) {
      REQUIRE(a >= 0.1);
      REQUIRE(a <= 1.0);
    }
    for (double b : s.route_price) {
      REQUIRE(b >= 0.1);
      REQUIRE(b <= 1.0);
    }
    for (ServiceId i = 0; i < chains.num_services(); ++i)
      for (VnfId k = 0; k < chains.num_vnfs(); ++k)
        for (VmId n = 0; n < topo.n_vms; ++n) {
          double r = s.arrivals.at(i, k, n);
          REQUIRE(r >= 0.0);
          if (k != chains.first_vnf(i)) REQUIRE(r == 0.0);
        }
  }
}

TEST_CASE("empirical price and arrival means match the configuration") {
  Topology topo = Topology::complete(7);
  SimConfig cfg;
  {
    Rng rng(9);
    topo.sample_capacities(rng, cfg.capacity.lo, cfg.capacity.hi);
  }
  ChainSet chains = two_chains();
  StateSampler sampler(1234, topo, chains, cfg);
  const int draws = 100000;
  std::vector<double> alpha_sum(topo.n_vms, 0.0);
  std::vector<double> beta_sum(topo.links.size(), 0.0);
  double arrival_sum = 0.0;
  for (int t = 0; t < draws; ++t) {
    StateSample s = sampler.next();
    for (VmId n = 0; n < topo.n_vms; ++n) alpha_sum[n] += s.proc_price[n];
    for (std::size_t l = 0; l < beta_sum.size(); ++l)
      beta_sum[l] += s.route_price[l];
    arrival_sum += s.arrivals.sum();
  }
  for (VmId n = 0; n < topo.n_vms; ++n)
    REQUIRE(alpha_sum[n] / draws == Approx(0.55).epsilon(0.02));
  for (std::size_t l = 0; l < beta_sum.size(); ++l)
    REQUIRE(beta_sum[l] / draws == Approx(0.55).epsilon(0.02));
  REQUIRE(arrival_sum / draws == Approx(14.0).epsilon(0.02));
}

TEST_CASE("zero arrival mean yields no arrivals but positive prices") {
  Topology topo = testing::fixed_topology(3, 10, 10);
  ChainSet chains = two_chains();
  SimConfig cfg;
  cfg.arrival_mean = 0.0;
  StateSampler sampler(7, topo, chains, cfg);
  StateSample s = sampler.next();
  REQUIRE(s.arrivals.sum() == 0.0);
  for (double a : s.proc_price) REQUIRE(a > 0.0);
  for (double b : s.route_price) REQUIRE(b > 0.0);
}

TEST_CASE("equal seeds give bitwise-equal sample streams") {
  Topology topo = testing::fixed_topology(5, 10, 10);
  ChainSet chains = two_chains();
  SimConfig cfg;
  StateSampler a(42, topo, chains, cfg);
  StateSampler b(42, topo, chains, cfg);
  for (int t = 0; t < 100; ++t) {
    StateSample sa = a.next();
    StateSample sb = b.next();
    REQUIRE(sa.arrivals == sb.arrivals);
    REQUIRE(sa.proc_price == sb.proc_price);
    REQUIRE(sa.route_price == sb.route_price);
  }
}

TEST_CASE("chain neighbor lookup") {
  ChainSet chains = two_chains();

  SECTION("middle of the first chain") {
    auto [p, s] = chains.neighbors(0, 1);
    REQUIRE(p == 0);
    REQUIRE(s == 2);
  }
  SECTION("head of the permuted chain") {
    auto [p, s] = chains.neighbors(1, 2);
    REQUIRE_FALSE(p.has_value());
    REQUIRE(s == 0);
  }
  SECTION("singleton chain has no neighbors") {
    ChainSet single(std::vector<ServiceChain>{{0, {0}}});
    auto [p, s] = single.neighbors(0, 0);
    REQUIRE_FALSE(p.has_value());
    REQUIRE_FALSE(s.has_value());
  }
  SECTION("unknown pair throws") {
    ChainSet single(std::vector<ServiceChain>{{0, {0}}}, 3);
    REQUIRE_THROWS_AS(single.neighbors(0, 2), std::out_of_range);
  }
}

TEST_CASE("chain validation") {
  REQUIRE_THROWS_AS(ChainSet(std::vector<ServiceChain>{{0, {}}}), ConfigError);
  REQUIRE_THROWS_AS(ChainSet(std::vector<ServiceChain>{{0, {0, 1, 0}}}),
                    ConfigError);
  REQUIRE_THROWS_AS(ChainSet(std::vector<ServiceChain>{}), ConfigError);
}

TEST_CASE("colocation expansion flags intra-host links") {
  SECTION("distinct hosts change nothing") {
    Topology topo = testing::fixed_topology(3, 1, 1);
    topo.host_of = {0, 1, 2};
    Topology out = expand_colocated(topo);
    for (const Link& e : out.links) REQUIRE_FALSE(e.zero_price);
  }
  SECTION("a shared pair flags both directions") {
    Topology topo = testing::fixed_topology(3, 1, 1);
    topo.host_of = {7, 7, 8};
    Topology out = expand_colocated(topo);
    int flagged = 0;
    for (const Link& e : out.links) {
      bool expect = (e.from == 0 && e.to == 1) || (e.from == 1 && e.to == 0);
      REQUIRE(e.zero_price == expect);
      flagged += e.zero_price;
    }
    REQUIRE(flagged == 2);
  }
  SECTION("three co-hosted VMs flag six directed links") {
    Topology topo = testing::fixed_topology(4, 1, 1);
    topo.host_of = {5, 5, 5, 6};
    Topology out = expand_colocated(topo);
    int flagged = 0;
    for (const Link& e : out.links) flagged += e.zero_price;
    REQUIRE(flagged == 6);
  }
}

TEST_CASE("zero-price links sample the price floor") {
  Topology topo = testing::fixed_topology(3, 1, 1);
  topo.host_of = {1, 1, 2};
  topo = expand_colocated(topo);
  ChainSet chains(std::vector<ServiceChain>{{0, {0}}});
  SimConfig cfg;
  StateSampler sampler(3, topo, chains, cfg);
  StateSample s = sampler.next();
  for (LinkId l = 0; l < static_cast<LinkId>(topo.links.size()); ++l) {
    if (topo.links[l].zero_price)
      REQUIRE(s.route_price[l] == cfg.beta_floor);
    else
      REQUIRE(s.route_price[l] >= cfg.price.lo);
  }
}

TEST_CASE("topology invariants") {
  SECTION("self links are rejected") {
    Topology t = testing::fixed_topology(2, 1, 1);
    t.links.push_back({0, 0, 1.0, false});
    t.finalize();
    REQUIRE_THROWS_AS(t.validate(), ConfigError);
  }
  SECTION("nonpositive caps are rejected") {
    Topology t = testing::fixed_topology(2, 1, 1);
    t.proc_cap[1] = 0.0;
    REQUIRE_THROWS_AS(t.validate(), ConfigError);
  }
  SECTION("co-hosted VMs require connectivity") {
    Topology t;
    t.n_vms = 3;
    t.proc_cap.assign(3, 1.0);
    t.host_of = {4, 4, 5};
    t.links = {{0, 2, 1.0, false}, {2, 0, 1.0, false},
               {1, 2, 1.0, false}, {2, 1, 1.0, false}};
    t.finalize();
    REQUIRE_THROWS_AS(t.validate(), ConfigError);
  }
}

TEST_CASE("theta default uses the natural log") {
  double theta = SimConfig::default_theta(0.1);
  REQUIRE(theta == Approx(2.0 * std::sqrt(0.1) * std::pow(std::log(0.1), 2))
                       .epsilon(1e-12));
  REQUIRE(theta == Approx(3.353).epsilon(1e-3));
}
