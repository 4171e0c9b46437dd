#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "semcom/errors.hpp"
#include "semcom/offload.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using namespace semcom::offload;

namespace {

EncoderProfile three_layer_profile() {
    EncoderProfile p;
    p.layers = {{10.0, 100.0}, {20.0, 50.0}, {30.0, 25.0}};
    p.input_bytes = 200.0;
    return p;
}

OffloadState state_with(int split, double end_cap, double edge_cap) {
    OffloadState s;
    s.split_point = split;
    s.end_capacity = end_cap;
    s.edge_capacity = edge_cap;
    return s;
}

EnvConfig frozen_env(EncoderProfile profile) {
    EnvConfig cfg;
    cfg.profile = std::move(profile);
    cfg.snr_levels = {10.0};
    cfg.end_capacities = {50.0};
    cfg.edge_capacities = {400.0};
    cfg.complexity_scales = {1.0};
    cfg.frozen = true;
    return cfg;
}

} // namespace

TEST_CASE("encode_latency decomposes into local, transmit and edge terms") {
    const EncoderProfile p = three_layer_profile();
    const double link = 50.0;

    const LatencyBreakdown s0 = encode_latency(p, 0, state_with(0, 10.0, 100.0), link);
    CHECK(s0.local_ms == 0.0);
    CHECK(s0.tx_ms == doctest::Approx(4.0).epsilon(1e-15));   // raw input crosses
    CHECK(s0.edge_ms == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(s0.total_ms == doctest::Approx(4.6).epsilon(1e-15));

    const LatencyBreakdown s1 = encode_latency(p, 1, state_with(1, 10.0, 100.0), link);
    CHECK(s1.local_ms == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s1.tx_ms == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s1.edge_ms == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s1.total_ms == doctest::Approx(3.5).epsilon(1e-15));

    const LatencyBreakdown s2 = encode_latency(p, 2, state_with(2, 10.0, 100.0), link);
    CHECK(s2.total_ms == doctest::Approx(4.3).epsilon(1e-15));

    const LatencyBreakdown s3 = encode_latency(p, 3, state_with(3, 10.0, 100.0), link);
    CHECK(s3.edge_ms == 0.0);
    CHECK(s3.tx_ms == doctest::Approx(0.5).epsilon(1e-15));   // final payload
    CHECK(s3.total_ms == doctest::Approx(6.5).epsilon(1e-15));

    CHECK_THROWS_AS(encode_latency(p, -1, state_with(-1, 10.0, 100.0), link),
                    ValidationError);
    CHECK_THROWS_AS(encode_latency(p, 4, state_with(4, 10.0, 100.0), link),
                    ValidationError);
    CHECK_THROWS_AS(encode_latency(p, 1, state_with(1, 0.0, 100.0), link), ValidationError);
}

TEST_CASE("profile validation rejects empty or non-positive layers") {
    EncoderProfile empty;
    empty.layers.clear();
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    EncoderProfile bad = three_layer_profile();
    bad.layers[1].flops = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = three_layer_profile();
    bad.input_bytes = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("feature_distortion matches the closed-form Gaussian KL") {
    const std::vector<double> sent = {-1.0, 1.0};
    const std::vector<double> received = {0.0, 2.0};
    // Same unit variance, mean shift 1: KL = 1/2.
    CHECK(feature_distortion(sent, received) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(feature_distortion(sent, sent) == doctest::Approx(0.0).epsilon(1e-12));

    // Pure variance change: KL = log(sigma_s/sigma_r) + sigma_r^2/(2 sigma_s^2) - 1/2.
    const std::vector<double> wide = {-2.0, 2.0};
    const double expected = std::log(1.0 / 2.0) + 4.0 / 2.0 - 0.5;
    CHECK(feature_distortion(sent, wide) == doctest::Approx(expected).epsilon(1e-12));

    // Zero-variance vectors are floored rather than dividing by zero.
    const std::vector<double> flat = {1.0, 1.0, 1.0};
    CHECK(std::isfinite(feature_distortion(flat, flat)));

    const std::vector<double> one = {1.0};
    const std::vector<double> three = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(feature_distortion(one, one), ValidationError);
    CHECK_THROWS_AS(feature_distortion(sent, three), ValidationError);
}

TEST_CASE("the feasibility gate has a closed boundary") {
    CHECK(feasibility_gate(0.25, 0.25) == GateVerdict::Feasible);
    CHECK(feasibility_gate(0.2500001, 0.25) == GateVerdict::Retransmit);
    CHECK(feasibility_gate(0.0, 0.25) == GateVerdict::Feasible);
    CHECK_THROWS_AS(feasibility_gate(-0.1, 0.25), ValidationError);
}

TEST_CASE("QTable lookups default to zero and ties keep the stay action") {
    QTable q;
    const StateKey s{2, 0, 1, 0, 1};
    CHECK(q.get(s, 0) == 0.0);
    CHECK(q.greedy_delta(s) == 0);

    q.set(s, -1, 1.0);
    CHECK(q.greedy_delta(s) == -1);
    q.set(s, +1, 1.0); // equal value: the earlier-scanned -1 wins over +1
    CHECK(q.greedy_delta(s) == -1);
    q.set(s, 0, 1.0);  // stay is scanned first, so a full tie stays
    CHECK(q.greedy_delta(s) == 0);
    q.set(s, +1, 2.0);
    CHECK(q.greedy_delta(s) == +1);

    std::ostringstream os;
    q.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.rfind("split,snr,end_cap,edge_cap,complexity,action,value\n", 0) == 0);
    CHECK(csv.find("2,0,1,0,1,1,2\n") != std::string::npos);
}

TEST_CASE("link rate follows the log2 capacity curve") {
    OffloadEnv env(frozen_env(three_layer_profile()));
    CHECK(env.link_rate(0.0) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(env.link_rate(10.0) == doctest::Approx(40.0 * std::log2(11.0)).epsilon(1e-12));
    CHECK(env.link_rate(-5.0) < env.link_rate(0.0));
}

TEST_CASE("data complexity scales every byte crossing the link") {
    EnvConfig cfg = frozen_env(three_layer_profile());
    cfg.complexity_scales = {1.0, 2.0};
    OffloadEnv env(cfg);

    OffloadState s = env.realize(StateKey{0, 0, 0, 0, 0});
    OffloadState s2 = env.realize(StateKey{0, 0, 0, 0, 1});
    CHECK(env.latency_at(s2).tx_ms == doctest::Approx(2.0 * env.latency_at(s).tx_ms));
    CHECK(env.latency_at(s2).local_ms == env.latency_at(s).local_ms);
}

TEST_CASE("frozen environments repeat conditions and rewards exactly") {
    OffloadEnv env(frozen_env(three_layer_profile()));
    auto rng = make_rng(1, 0);
    OffloadState s = env.initial_state(rng);
    CHECK(env.reward_at(s) == env.reward_at(s));
    const auto [next, reward] = env.step(s, +1, rng);
    CHECK(next.snr_db == s.snr_db);
    CHECK(next.end_capacity == s.end_capacity);
    CHECK(next.data_complexity == s.data_complexity);
    CHECK(next.split_point == s.split_point + 1);
    CHECK(reward == env.reward_at(next));
    CHECK_THROWS_AS(env.step(s, 2, rng), ValidationError);
}

TEST_CASE("realize and discretize are inverse on bucket indices") {
    EnvConfig cfg = frozen_env(three_layer_profile());
    cfg.snr_levels = {-5.0, 0.0, 10.0};
    cfg.end_capacities = {40.0, 120.0};
    cfg.complexity_scales = {1.0, 2.0};
    OffloadEnv env(cfg);
    const StateKey key{2, 1, 1, 0, 1};
    CHECK(env.discretize(env.realize(key)) == key);

    OffloadState off = env.realize(key);
    off.snr_db = 3.33;
    CHECK_THROWS_AS(env.discretize(off), ValidationError);
}

TEST_CASE("Q-learning finds the exhaustive best split in a frozen environment") {
    for (int layers : {2, 5}) {
        EncoderProfile p;
        for (int l = 0; l < layers; ++l) {
            p.layers.push_back({80.0 * (l + 1), 3000.0 / (l + 1)});
        }
        p.input_bytes = 4000.0;
        OffloadEnv env(frozen_env(std::move(p)));

        RlConfig rl;
        rl.episodes = 250;
        auto rng = make_rng(11, 0);
        const QTable q = train_policy(env, rl, rng);

        const StateKey conditions{0, 0, 0, 0, 0};
        const int target = best_split(env, conditions);
        for (int start = 0; start <= env.num_layers(); ++start) {
            CHECK(greedy_split(q, env, conditions, start) == target);
        }
    }
}

TEST_CASE("best_split prefers the smaller split on exact ties") {
    EncoderProfile p;
    p.layers = {{1.0, 64.0}, {1.0, 64.0}};
    p.input_bytes = 64.0;
    EnvConfig cfg = frozen_env(std::move(p));
    cfg.end_capacities = {100.0};
    cfg.edge_capacities = {100.0};
    OffloadEnv env(cfg);
    CHECK(best_split(env, StateKey{0, 0, 0, 0, 0}) == 0);
}

TEST_CASE("policy training is reproducible from the seed") {
    OffloadEnv env(frozen_env(three_layer_profile()));
    RlConfig rl;
    rl.episodes = 40;
    auto r1 = make_rng(5, 0);
    auto r2 = make_rng(5, 0);
    std::ostringstream a, b;
    train_policy(env, rl, r1).write_csv(a);
    train_policy(env, rl, r2).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().size() > 60);
}
