#include "semcom/offload.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "semcom/csv.hpp"
#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

namespace semcom::offload {

void EncoderProfile::validate() const {
    if (layers.empty()) {
        throw ValidationError("encoder profile needs at least one layer");
    }
    if (input_bytes <= 0.0) {
        throw ValidationError("encoder input size must be positive");
    }
    for (const EncoderLayer& l : layers) {
        if (l.flops <= 0.0 || l.output_bytes <= 0.0) {
            throw ValidationError("encoder layer costs must be positive");
        }
    }
}

LatencyBreakdown encode_latency(const EncoderProfile& profile, int split_point,
                                const OffloadState& state, double link_rate) {
    profile.validate();
    if (split_point < 0 || split_point > profile.num_layers()) {
        throw ValidationError("split point outside [0, L]");
    }
    if (state.end_capacity <= 0.0 || state.edge_capacity <= 0.0 || link_rate <= 0.0) {
        throw ValidationError("capacities and link rate must be positive");
    }
    LatencyBreakdown lb;
    for (int l = 0; l < profile.num_layers(); ++l) {
        const double ms_local = profile.layers[static_cast<size_t>(l)].flops / state.end_capacity;
        const double ms_edge = profile.layers[static_cast<size_t>(l)].flops / state.edge_capacity;
        if (l < split_point) {
            lb.local_ms += ms_local;
        } else {
            lb.edge_ms += ms_edge;
        }
    }
    const double tx_bytes =
        split_point == 0 ? profile.input_bytes
                         : profile.layers[static_cast<size_t>(split_point - 1)].output_bytes;
    lb.tx_ms = tx_bytes / link_rate;
    lb.total_ms = lb.local_ms + lb.tx_ms + lb.edge_ms;
    return lb;
}

double feature_distortion(std::span<const double> sent, std::span<const double> received) {
    if (sent.size() != received.size() || sent.size() < 2) {
        throw ValidationError("feature vectors must share a length >= 2");
    }
    constexpr double kVarFloor = 1e-12;
    const auto n = static_cast<double>(sent.size());
    auto fit = [n](std::span<const double> v) {
        double mean = 0.0;
        for (double x : v) {
            mean += x;
        }
        mean /= n;
        double var = 0.0;
        for (double x : v) {
            var += (x - mean) * (x - mean);
        }
        var /= n;
        if (var < kVarFloor) {
            std::cerr << "warning: zero-variance feature fit floored at " << kVarFloor << "\n";
            var = kVarFloor;
        }
        return std::pair<double, double>(mean, var);
    };
    const auto [mu_s, var_s] = fit(sent);
    const auto [mu_r, var_r] = fit(received);
    return 0.5 * std::log(var_s / var_r) +
           (var_r + (mu_r - mu_s) * (mu_r - mu_s)) / (2.0 * var_s) - 0.5;
}

GateVerdict feasibility_gate(double distortion, double threshold) {
    if (distortion < 0.0) {
        throw ValidationError("distortion must be non-negative");
    }
    return distortion <= threshold ? GateVerdict::Feasible : GateVerdict::Retransmit;
}

double QTable::get(const StateKey& s, int delta) const {
    const auto it = q_.find({s, delta});
    return it == q_.end() ? 0.0 : it->second;
}

void QTable::set(const StateKey& s, int delta, double value) {
    q_[{s, delta}] = value;
}

int QTable::greedy_delta(const StateKey& s) const {
    int best = kActions[0];
    double best_v = get(s, best);
    for (int i = 1; i < 3; ++i) {
        const double v = get(s, kActions[i]);
        if (v > best_v) {
            best_v = v;
            best = kActions[i];
        }
    }
    return best;
}

void QTable::write_csv(std::ostream& os) const {
    os << "split,snr,end_cap,edge_cap,complexity,action,value\n";
    for (const auto& [key, value] : q_) {
        const StateKey& s = key.first;
        os << s.split << "," << s.snr << "," << s.end_cap << "," << s.edge_cap << ","
           << s.complexity << "," << key.second << "," << format_double(value) << "\n";
    }
}

void EnvConfig::validate() const {
    profile.validate();
    if (base_link_rate <= 0.0 || latency_scale <= 0.0 || kappa < 0.0 ||
        distortion_threshold < 0.0 || feature_dim < 2) {
        throw ValidationError("invalid offload environment parameters");
    }
    if (snr_levels.empty() || end_capacities.empty() || edge_capacities.empty() ||
        complexity_scales.empty()) {
        throw ValidationError("environment level lists must be non-empty");
    }
    auto in_range = [](int idx, size_t n) { return idx >= 0 && idx < static_cast<int>(n); };
    if (!in_range(init.snr, snr_levels.size()) || !in_range(init.end_cap, end_capacities.size()) ||
        !in_range(init.edge_cap, edge_capacities.size()) ||
        !in_range(init.complexity, complexity_scales.size()) || init.split < 0 ||
        init.split > profile.num_layers()) {
        throw ValidationError("initial state indices out of range");
    }
}

OffloadEnv::OffloadEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

namespace {

int index_of(double value, const std::vector<double>& levels, const char* what) {
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == value) {
            return static_cast<int>(i);
        }
    }
    throw ValidationError(std::string("state value is not one of the configured ") + what);
}

uint64_t state_code(const StateKey& k) {
    // Packs the small bucket indices into one stream id.
    return (static_cast<uint64_t>(k.split) << 32) ^ (static_cast<uint64_t>(k.snr) << 24) ^
           (static_cast<uint64_t>(k.end_cap) << 16) ^ (static_cast<uint64_t>(k.edge_cap) << 8) ^
           static_cast<uint64_t>(k.complexity);
}

} // namespace

StateKey OffloadEnv::discretize(const OffloadState& s) const {
    StateKey k;
    k.split = s.split_point;
    k.snr = index_of(s.snr_db, cfg_.snr_levels, "snr levels");
    k.end_cap = index_of(s.end_capacity, cfg_.end_capacities, "device capacities");
    k.edge_cap = index_of(s.edge_capacity, cfg_.edge_capacities, "edge capacities");
    k.complexity = s.data_complexity;
    if (k.complexity < 0 || k.complexity >= static_cast<int>(cfg_.complexity_scales.size())) {
        throw ValidationError("complexity bucket out of range");
    }
    return k;
}

OffloadState OffloadEnv::realize(const StateKey& key) const {
    OffloadState s;
    s.split_point = key.split;
    s.snr_db = cfg_.snr_levels.at(static_cast<size_t>(key.snr));
    s.end_capacity = cfg_.end_capacities.at(static_cast<size_t>(key.end_cap));
    s.edge_capacity = cfg_.edge_capacities.at(static_cast<size_t>(key.edge_cap));
    s.data_complexity = key.complexity;
    return s;
}

double OffloadEnv::link_rate(double snr_db) const {
    return cfg_.base_link_rate * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
}

LatencyBreakdown OffloadEnv::latency_at(const OffloadState& s) const {
    const double scale = cfg_.complexity_scales.at(static_cast<size_t>(s.data_complexity));
    EncoderProfile scaled = cfg_.profile;
    scaled.input_bytes *= scale;
    for (EncoderLayer& l : scaled.layers) {
        l.output_bytes *= scale;
    }
    return encode_latency(scaled, s.split_point, s, link_rate(s.snr_db));
}

double OffloadEnv::distortion_at(const StateKey& key) const {
    if (key.split >= num_layers()) {
        return 0.0; // fully local: only the digital payload crosses the link
    }
    const uint64_t code = state_code(key);
    std::vector<double> sent(static_cast<size_t>(cfg_.feature_dim));
    auto feat_rng = make_rng(cfg_.env_seed, code * 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double power = 0.0;
    for (double& v : sent) {
        v = gauss(feat_rng);
        power += v * v;
    }
    power /= static_cast<double>(sent.size());
    const double snr_db = cfg_.snr_levels.at(static_cast<size_t>(key.snr));
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    std::vector<double> received = sent;
    auto noise_rng = make_rng(cfg_.env_seed, code * 2 + 1);
    for (double& v : received) {
        v += sigma * gauss(noise_rng);
    }
    return feature_distortion(sent, received);
}

double OffloadEnv::reward_at(const OffloadState& s) const {
    const LatencyBreakdown lb = latency_at(s);
    const double distortion = distortion_at(discretize(s));
    const bool feasible =
        feasibility_gate(distortion, cfg_.distortion_threshold) == GateVerdict::Feasible;
    return -(lb.total_ms / cfg_.latency_scale) - (feasible ? 0.0 : cfg_.kappa);
}

OffloadState OffloadEnv::initial_state(std::mt19937_64& rng) const {
    StateKey key = cfg_.init;
    if (!cfg_.frozen) {
        auto draw = [&rng](size_t n) {
            return static_cast<int>(std::uniform_int_distribution<size_t>(0, n - 1)(rng));
        };
        key.snr = draw(cfg_.snr_levels.size());
        key.end_cap = draw(cfg_.end_capacities.size());
        key.edge_cap = draw(cfg_.edge_capacities.size());
        key.complexity = draw(cfg_.complexity_scales.size());
    }
    return realize(key);
}

std::pair<OffloadState, double> OffloadEnv::step(const OffloadState& s, int delta,
                                                 std::mt19937_64& rng) const {
    if (delta < -1 || delta > 1) {
        throw ValidationError("split action must be in {-1, 0, +1}");
    }
    OffloadState executed = s;
    executed.split_point = std::clamp(s.split_point + delta, 0, num_layers());
    const double reward = reward_at(executed);
    OffloadState next = executed;
    if (!cfg_.frozen) {
        auto draw = [&rng](size_t n) {
            return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
        };
        next.snr_db = cfg_.snr_levels[draw(cfg_.snr_levels.size())];
        next.end_capacity = cfg_.end_capacities[draw(cfg_.end_capacities.size())];
        next.edge_capacity = cfg_.edge_capacities[draw(cfg_.edge_capacities.size())];
        next.data_complexity = static_cast<int>(draw(cfg_.complexity_scales.size()));
    }
    return {next, reward};
}

QTable train_policy(const OffloadEnv& env, const RlConfig& rl, std::mt19937_64& rng) {
    if (rl.episodes < 0 || rl.steps_per_episode < 1) {
        throw ValidationError("invalid RL configuration");
    }
    QTable q;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> action_pick(0, 2);
    std::uniform_int_distribution<int> split_pick(0, env.num_layers());
    for (int ep = 0; ep < rl.episodes; ++ep) {
        OffloadState s = env.initial_state(rng);
        s.split_point = split_pick(rng);
        for (int step = 0; step < rl.steps_per_episode; ++step) {
            const StateKey key = env.discretize(s);
            const int delta =
                unit(rng) < rl.epsilon ? kActions[action_pick(rng)] : q.greedy_delta(key);
            const auto [next, reward] = env.step(s, delta, rng);
            const StateKey next_key = env.discretize(next);
            double best_next = q.get(next_key, kActions[0]);
            for (int i = 1; i < 3; ++i) {
                best_next = std::max(best_next, q.get(next_key, kActions[i]));
            }
            const double old = q.get(key, delta);
            q.set(key, delta, old + rl.lr * (reward + rl.gamma * best_next - old));
            s = next;
        }
    }
    return q;
}

int greedy_split(const QTable& q, const OffloadEnv& env, const StateKey& conditions,
                 int start_split) {
    StateKey key = conditions;
    key.split = std::clamp(start_split, 0, env.num_layers());
    for (int guard = 0; guard <= env.num_layers() + 1; ++guard) {
        const int delta = q.greedy_delta(key);
        const int next = std::clamp(key.split + delta, 0, env.num_layers());
        if (next == key.split) {
            return key.split;
        }
        key.split = next;
    }
    return key.split;
}

int best_split(const OffloadEnv& env, const StateKey& conditions) {
    int best = 0;
    double best_r = -std::numeric_limits<double>::infinity();
    for (int split = 0; split <= env.num_layers(); ++split) {
        StateKey key = conditions;
        key.split = split;
        const double r = env.reward_at(env.realize(key));
        if (r > best_r) {
            best_r = r;
            best = split;
        }
    }
    return best;
}

} // namespace semcom::offload
