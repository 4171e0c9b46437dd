#pragma once

// Adaptive split-point offloading for the semantic encoder: a layerwise
// latency model over a device/edge partition, a Gaussian-KL feature
// distortion gate, a small synthetic environment whose channel and compute
// conditions drift, and a tabular Q-learning agent issuing relative split
// adjustments.

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace semcom::offload {

struct EncoderLayer {
    double flops = 1.0;        // compute cost units
    double output_bytes = 1.0; // feature size produced by this layer
};

/// Layer list plus the raw input size, which is what crosses the link when
/// nothing runs on the device (split = 0).
struct EncoderProfile {
    std::vector<EncoderLayer> layers;
    double input_bytes = 1.0;

    int num_layers() const { return static_cast<int>(layers.size()); }
    void validate() const;
};

struct OffloadState {
    int split_point = 0; // layers 1..split run on the device
    double snr_db = 0.0;
    double end_capacity = 1.0;  // device compute units per ms
    double edge_capacity = 1.0; // edge compute units per ms
    int data_complexity = 0;    // bucket index scaling transmitted sizes
};

struct LatencyBreakdown {
    double local_ms = 0.0;
    double tx_ms = 0.0;
    double edge_ms = 0.0;
    double total_ms = 0.0;
};

/// local = sum of flops up to the split over end_capacity; tx = bytes
/// crossing the link over link_rate (raw input at split 0, the final
/// payload at split L); edge = remaining flops over edge_capacity.
LatencyBreakdown encode_latency(const EncoderProfile& profile, int split_point,
                                const OffloadState& state, double link_rate);

/// Fits a univariate Gaussian to each vector (population variance) and
/// returns the closed-form KL(received || sent). A zero-variance fit is
/// floored at a small epsilon with a warning.
double feature_distortion(std::span<const double> sent, std::span<const double> received);

enum class GateVerdict { Feasible, Retransmit };

/// Feasible iff distortion <= threshold (closed boundary).
GateVerdict feasibility_gate(double distortion, double threshold);

/// Discretized state identity used as the Q-table key. Environment draws
/// come from finite level lists, so bucketing is an exact index lookup.
struct StateKey {
    int split = 0;
    int snr = 0;
    int end_cap = 0;
    int edge_cap = 0;
    int complexity = 0;
    auto operator<=>(const StateKey&) const = default;
};

inline constexpr int kActions[3] = {0, -1, +1};

class QTable {
public:
    double get(const StateKey& s, int delta) const;
    void set(const StateKey& s, int delta, double value);
    /// Argmax over actions, scanning {0, -1, +1} and keeping strict
    /// improvements, so an unseen state yields "stay".
    int greedy_delta(const StateKey& s) const;
    size_t size() const { return q_.size(); }
    /// Columns: split, snr, end_cap, edge_cap, complexity, action, value.
    void write_csv(std::ostream& os) const;

private:
    std::map<std::pair<StateKey, int>, double> q_;
};

struct EnvConfig {
    EncoderProfile profile;
    double base_link_rate = 40.0;    // bytes/ms at unit spectral efficiency
    double latency_scale = 100.0;    // reward normalizer
    double kappa = 1.0;              // gate-failure penalty weight
    double distortion_threshold = 0.25;
    int feature_dim = 64;
    uint64_t env_seed = 0;           // keys the per-state feature draws

    // Level lists the drifting process draws from; state buckets index
    // into these.
    std::vector<double> snr_levels = {-5.0, 0.0, 10.0};
    std::vector<double> end_capacities = {40.0, 120.0};
    std::vector<double> edge_capacities = {800.0};
    std::vector<double> complexity_scales = {1.0, 2.0};

    bool frozen = false;
    // Bucket indices of the fixed conditions when frozen (also the initial
    // conditions when drifting).
    StateKey init{0, 0, 0, 0, 0};

    void validate() const;
};

/// Deterministic environment: the reward of occupying a state is a pure
/// function of (config, state), with gate features drawn from streams
/// keyed by the discretized state, so a frozen environment repeats rewards
/// exactly.
class OffloadEnv {
public:
    explicit OffloadEnv(EnvConfig cfg);

    const EnvConfig& config() const { return cfg_; }
    int num_layers() const { return cfg_.profile.num_layers(); }

    StateKey discretize(const OffloadState& s) const;
    OffloadState realize(const StateKey& key) const;

    double link_rate(double snr_db) const;
    LatencyBreakdown latency_at(const OffloadState& s) const;
    double distortion_at(const StateKey& key) const;
    /// reward = -(total_ms / latency_scale) - kappa when the gate fails.
    double reward_at(const OffloadState& s) const;

    OffloadState initial_state(std::mt19937_64& rng) const;
    /// Applies the clamped split move, scores the resulting state, then
    /// drifts the channel/compute conditions (unless frozen).
    std::pair<OffloadState, double> step(const OffloadState& s, int delta,
                                         std::mt19937_64& rng) const;

private:
    EnvConfig cfg_;
};

struct RlConfig {
    int episodes = 300;
    int steps_per_episode = 40;
    double lr = 0.2;
    double gamma = 0.9;
    double epsilon = 0.25;
};

/// Tabular Q-learning with epsilon-greedy exploration; episode starts draw
/// a uniform random split.
QTable train_policy(const OffloadEnv& env, const RlConfig& rl, std::mt19937_64& rng);

/// Follows greedy deltas from the given split under fixed conditions until
/// a fixpoint (or a cycle guard) is hit; returns the resting split.
int greedy_split(const QTable& q, const OffloadEnv& env, const StateKey& conditions,
                 int start_split);

/// Exhaustive sweep over all splits under fixed conditions; ties keep the
/// smaller split.
int best_split(const OffloadEnv& env, const StateKey& conditions);

} // namespace semcom::offload
