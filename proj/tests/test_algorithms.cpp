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
using chainsim::testing::fixed_topology;
using chainsim::testing::flat_sample;

namespace {

struct Rig {
  Topology topo = fixed_topology(3, 20.0, 15.0);
  ChainSet chains{{{0, {0, 1, 2}}, {1, {2, 0, 1}}}};
  SimConfig cfg;
  SimContext ctx{&topo, &chains, &cfg};

  QueueState zero_state() const { return QueueState::zeros(2, 3, 3); }
};

bool all_rates_zero(const Decision& d) {
  return d.proc_rate.sum() == 0.0 && d.pending_route.sum() == 0.0 &&
         d.staged_route.sum() == 0.0;
}

}  // namespace

TEST_CASE("dual-gradient policy on empty queues does nothing") {
  Rig rig;
  StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
  Decision d = alg1_decide(rig.zero_state(), s, rig.ctx);
  REQUIRE(all_rates_zero(d));
  for (VnfId k : d.placement) {
    REQUIRE(k >= 0);
    REQUIRE(k < 3);
  }
}

TEST_CASE("a single loaded queue is served at the closed-form rate") {
  Rig rig;
  QueueState st = rig.zero_state();
  st.pending.at(0, 0, 0) = 10.0;
  StateSample s = flat_sample(rig.topo, rig.chains, 0.2, 0.9);
  Decision d = alg1_decide(st, s, rig.ctx);
  REQUIRE(d.placement[0] == 0);
  REQUIRE(d.proc_rate.at(0, 0, 0) ==
          Approx(opt_rate(rig.cfg.epsilon * 10.0, 0.2, 20.0)).epsilon(1e-12));
}

TEST_CASE("policy decisions replay identically on the same inputs") {
  Rig rig;
  Rng rng(6);
  QueueState st = rig.zero_state();
  for (ServiceId i = 0; i < 2; ++i)
    for (VnfId k = 0; k < 3; ++k)
      for (VmId n = 0; n < 3; ++n) {
        if (rig.chains.in_chain(i, k)) st.pending.at(i, k, n) = rng.uniform(0.0, 30.0);
        if (rig.chains.staged_valid(i, k))
          st.staged.at(i, k, n) = rng.uniform(0.0, 30.0);
      }
  StateSample s = flat_sample(rig.topo, rig.chains, 0.0, 0.0);
  for (double& a : s.proc_price) a = rng.uniform(0.1, 1.0);
  for (double& b : s.route_price) b = rng.uniform(0.1, 1.0);
  REQUIRE(alg1_decide(st, s, rig.ctx) == alg1_decide(st, s, rig.ctx));
  REQUIRE(heu_decide(st, s, rig.ctx) == heu_decide(st, s, rig.ctx));
}

TEST_CASE("window placement") {
  Rig rig;

  SECTION("off-boundary calls are contract errors") {
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    MultiplierView view = MultiplierView::scaled_backlog(rig.zero_state(),
                                                         rig.cfg.epsilon);
    REQUIRE_THROWS_AS(twoscale_place(view, s, 3, rig.ctx), std::logic_error);
    REQUIRE_NOTHROW(twoscale_place(view, s, 5, rig.ctx));
  }

  SECTION("the hold pins the installation across a load flip") {
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    QueueState at_anchor = rig.zero_state();
    at_anchor.pending.at(0, 0, 0) = 20.0;  // favors VNF 0 at VM 0
    MultiplierView view0 =
        MultiplierView::scaled_backlog(at_anchor, rig.cfg.epsilon);
    PlacementHold hold = twoscale_place(view0, s, 0, rig.ctx);
    REQUIRE(hold.installed[0] == 0);
    REQUIRE(hold.valid_until == rig.cfg.t_delta);

    QueueState flipped = rig.zero_state();
    flipped.pending.at(0, 1, 0) = 40.0;  // per-slot choice would now be VNF 1
    MultiplierView view1 =
        MultiplierView::scaled_backlog(flipped, rig.cfg.epsilon);
    PriceView prices = rig.ctx.prices(s, false);
    REQUIRE(placement_select(view1, prices, 0, rig.chains, rig.cfg.epsilon) == 1);

    Decision d = alg1_decide(flipped, s, rig.ctx, &hold);
    REQUIRE(d.placement[0] == 0);  // held despite the flip
  }

  SECTION("frozen queues make held and per-slot placement coincide") {
    Rig rr;
    rr.cfg.arrival_mean = 0.0;
    rr.cfg.horizon = 20;
    rr.cfg.t_delta = 5;
    rr.cfg.placement = PlacementMode::TwoTimescale;
    Trace held = run(rr.cfg, rr.topo, rr.chains);
    rr.cfg.placement = PlacementMode::PerSlot;
    Trace per_slot = run(rr.cfg, rr.topo, rr.chains);
    for (std::size_t t = 0; t < held.rows.size(); ++t)
      REQUIRE(held.rows[t].placement == per_slot.rows[t].placement);
  }
}

TEST_CASE("effective multiplier") {
  Rig rig;

  SECTION("no learning and no bias reduces to the scaled backlog") {
    rig.cfg.theta = 0.0;
    QueueState st = rig.zero_state();
    st.pending.at(0, 0, 0) = 7.0;
    st.staged.at(1, 1, 2) = 3.0;
    LearnState learn = LearnState::zeros(2, 3, 3);
    MultiplierView v = effective_multiplier(learn, st, rig.ctx);
    MultiplierView want = MultiplierView::scaled_backlog(st, rig.cfg.epsilon);
    REQUIRE(v.on_pending == want.on_pending);
    REQUIRE(v.on_staged == want.on_staged);
  }
  SECTION("elementwise arithmetic") {
    rig.cfg.theta = 0.5;
    QueueState st = rig.zero_state();
    st.pending.at(0, 0, 0) = 10.0;  // eps * 10 = 1
    LearnState learn = LearnState::zeros(2, 3, 3);
    learn.lambda_pending.at(0, 0, 0) = 3.0;
    MultiplierView v = effective_multiplier(learn, st, rig.ctx);
    REQUIRE(v.on_pending.at(0, 0, 0) == Approx(3.5).epsilon(1e-12));
    // untouched valid entries carry the negative bias
    REQUIRE(v.on_pending.at(0, 1, 0) == Approx(-0.5).epsilon(1e-12));
  }
  SECTION("bias may push entries negative") {
    QueueState st = rig.zero_state();
    LearnState learn = LearnState::zeros(2, 3, 3);
    MultiplierView v = effective_multiplier(learn, st, rig.ctx);
    REQUIRE(v.on_pending.at(0, 0, 0) < 0.0);
  }
}

TEST_CASE("learn-and-adapt decisions") {
  Rig rig;

  SECTION("zero duals and zero bias reproduce the dual-gradient policy") {
    rig.cfg.theta = 0.0;
    Rng rng(8);
    QueueState st = rig.zero_state();
    for (ServiceId i = 0; i < 2; ++i)
      for (VnfId k = 0; k < 3; ++k)
        for (VmId n = 0; n < 3; ++n) {
          if (rig.chains.in_chain(i, k)) st.pending.at(i, k, n) = rng.uniform(0.0, 30.0);
          if (rig.chains.staged_valid(i, k))
            st.staged.at(i, k, n) = rng.uniform(0.0, 30.0);
        }
    StateSample s = flat_sample(rig.topo, rig.chains, 0.0, 0.0);
    for (double& a : s.proc_price) a = rng.uniform(0.1, 1.0);
    for (double& b : s.route_price) b = rng.uniform(0.1, 1.0);
    LearnState learn = LearnState::zeros(2, 3, 3);
    Alg2Decision ad = alg2_decide(st, learn, s, rig.ctx);
    REQUIRE(ad.applied == alg1_decide(st, s, rig.ctx));
  }

  SECTION("a large bias on empty queues suppresses all activity") {
    rig.cfg.theta = 50.0;
    LearnState learn = LearnState::zeros(2, 3, 3);
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    Alg2Decision ad = alg2_decide(rig.zero_state(), learn, s, rig.ctx);
    REQUIRE(all_rates_zero(ad.applied));
  }

  SECTION("the learning allocation ignores the physical backlogs") {
    LearnState learn = LearnState::zeros(2, 3, 3);
    learn.lambda_pending.at(0, 0, 0) = 2.0;
    learn.lambda_staged.at(0, 1, 1) = 1.0;
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    QueueState st1 = rig.zero_state();
    QueueState st2 = rig.zero_state();
    st2.pending.at(0, 0, 0) = 100.0;
    st2.staged.at(1, 1, 2) = 50.0;
    Alg2Decision a = alg2_decide(st1, learn, s, rig.ctx);
    Alg2Decision b = alg2_decide(st2, learn, s, rig.ctx);
    REQUIRE(a.learning == b.learning);
  }
}

TEST_CASE("empirical dual updates") {
  Rig rig;
  const int I = 2, K = 3, N = 3;

  SECTION("no flows and no arrivals leave the duals unchanged") {
    LearnState learn = LearnState::zeros(I, K, N);
    learn.lambda_pending.at(0, 0, 0) = 1.25;
    LearnState before = learn;
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    Decision none = Decision::zeros(I, K, N, 6);
    alg2_update(learn, none, s, rig.ctx);
    REQUIRE(learn.lambda_pending == before.lambda_pending);
    REQUIRE(learn.lambda_staged == before.lambda_staged);
    REQUIRE(learn.t == 2);
  }

  SECTION("a lone arrival raises its dual by eta times the rate") {
    LearnState learn = LearnState::zeros(I, K, N);
    REQUIRE(rig.cfg.eta(1) == 1.0);
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    s.arrivals.at(0, 0, 1) = 4.0;
    Decision none = Decision::zeros(I, K, N, 6);
    alg2_update(learn, none, s, rig.ctx);
    REQUIRE(learn.lambda_pending.at(0, 0, 1) == 4.0);
    REQUIRE(learn.lambda_pending.sum() == 4.0);
  }

  SECTION("updates project back to zero from below") {
    LearnState learn = LearnState::zeros(I, K, N);
    learn.lambda_pending.at(0, 0, 0) = 0.5;
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    Decision d = Decision::zeros(I, K, N, 6);
    d.proc_rate.at(0, 0, 0) = 3.0;  // outflow larger than the dual
    alg2_update(learn, d, s, rig.ctx);
    REQUIRE(learn.lambda_pending.at(0, 0, 0) == 0.0);
  }

  SECTION("duals stay nonnegative and settle as the stepsize decays") {
    SimConfig cfg;
    cfg.arrival_mean = 6.0;
    SimContext ctx{&rig.topo, &rig.chains, &cfg};
    StateSampler sampler(21, rig.topo, rig.chains, cfg);
    QueueState st = QueueState::zeros(I, K, N);
    LearnState learn = LearnState::zeros(I, K, N);
    const double flow_bound = 2.0 * rig.topo.max_degree() *
                                  rig.topo.max_link_cap() +
                              cfg.max_arrival(I) + rig.topo.max_proc_cap();
    for (int t = 0; t < 300; ++t) {
      StateSample s = sampler.next();
      Alg2Decision ad = alg2_decide(st, learn, s, ctx);
      LearnState before = learn;
      double eta = cfg.eta(learn.t);
      alg2_update(learn, ad.learning, s, ctx);
      double max_change = 0.0;
      for (std::size_t j = 0; j < learn.lambda_pending.raw().size(); ++j) {
        REQUIRE(learn.lambda_pending.raw()[j] >= 0.0);
        REQUIRE(learn.lambda_staged.raw()[j] >= 0.0);
        max_change = std::max(
            max_change, std::abs(learn.lambda_pending.raw()[j] -
                                 before.lambda_pending.raw()[j]));
        max_change = std::max(
            max_change, std::abs(learn.lambda_staged.raw()[j] -
                                 before.lambda_staged.raw()[j]));
      }
      REQUIRE(max_change <= eta * flow_bound + 1e-12);
      st = step_queues(st, ad.applied, s, rig.topo, rig.chains).next;
    }
  }
}

TEST_CASE("mean-price benchmark") {
  Rig rig;

  SECTION("degenerate prices make it identical to the dual-gradient policy") {
    rig.cfg.price = {0.55, 0.55};
    Rng rng(14);
    QueueState st = rig.zero_state();
    for (ServiceId i = 0; i < 2; ++i)
      for (VnfId k = 0; k < 3; ++k)
        for (VmId n = 0; n < 3; ++n) {
          if (rig.chains.in_chain(i, k)) st.pending.at(i, k, n) = rng.uniform(0.0, 30.0);
          if (rig.chains.staged_valid(i, k))
            st.staged.at(i, k, n) = rng.uniform(0.0, 30.0);
        }
    StateSample s = flat_sample(rig.topo, rig.chains, 0.55, 0.55);
    REQUIRE(heu_decide(st, s, rig.ctx) == alg1_decide(st, s, rig.ctx));
  }

  SECTION("price differences steer only the price-aware policy") {
    // equal backlog differences over two outgoing links with very different
    // prices: the dual-gradient policy takes the cheap link, the benchmark
    // falls back to the lowest link index
    Rig rr;
    QueueState st = rr.zero_state();
    st.pending.at(0, 0, 0) = 30.0;
    StateSample s = flat_sample(rr.topo, rr.chains, 1.0, 1.0);
    LinkId cheap = rr.topo.find_link(0, 2);
    LinkId expensive = rr.topo.find_link(0, 1);
    s.route_price[cheap] = 0.1;
    s.route_price[expensive] = 1.0;
    // suppress the processing alternative at VM 0
    s.proc_price[0] = 1.0;
    st.staged.at(0, 1, 0) = 30.0;  // successor queue kills the process delta

    Decision aware = alg1_decide(st, s, rr.ctx);
    REQUIRE(aware.pending_route.at(0, 0, cheap) > 0.0);
    REQUIRE(aware.pending_route.at(0, 0, expensive) == 0.0);

    Decision blind = heu_decide(st, s, rr.ctx);
    REQUIRE(blind.pending_route.at(0, 0, expensive) > 0.0);
  }

  SECTION("zero queues mean zero rates") {
    StateSample s = flat_sample(rig.topo, rig.chains, 0.5, 0.5);
    REQUIRE(all_rates_zero(heu_decide(rig.zero_state(), s, rig.ctx)));
  }
}

TEST_CASE("every policy emits feasible decisions over a long random run") {
  for (PolicyKind p : {PolicyKind::DualGradient, PolicyKind::LearnAndAdapt,
                       PolicyKind::MeanPrice}) {
    SimConfig cfg;
    cfg.policy = p;
    cfg.horizon = 10000;
    cfg.seed = 3;
    Topology topo = Topology::complete(7);
    ChainSet chains({{0, {0, 1, 2}}, {1, {2, 0, 1}}});
    // the engine rejects any infeasible decision, so completing the run is
    // the assertion
    Trace tr = run(cfg, topo, chains);
    REQUIRE(tr.rows.size() == 10000);
    for (const TraceRow& row : tr.rows) {
      REQUIRE(std::isfinite(row.cost));
      REQUIRE(std::isfinite(row.backlog));
    }
  }
}
