#pragma once

// Federated training of the cluster-wide general-phase denoiser: clients
// train personalized copies on private data and upload only parameter
// vectors plus scalar metadata; the edge aggregates them under a
// configurable weighting/clipping policy, optionally in a two-level
// cluster hierarchy.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "semcom/diffusion.hpp"
#include "semcom/schedule.hpp"

namespace semcom::federated {

struct ClientUpdate {
    int client_id = 0;
    std::vector<double> params;
    size_t num_samples = 1;
    double local_loss = 0.0;
};

enum class WeightingMode { Uniform, SampleSize, AdaptiveInverseLoss };

struct AggregationPolicy {
    WeightingMode mode = WeightingMode::Uniform;
    std::optional<double> clip_norm;  // L2 bound on each client's delta
    bool normalize = true;            // scale weights to sum 1
    double loss_epsilon = 1e-9;       // loss floor for inverse-loss weights
};

struct ClusterState {
    std::vector<double> params;
    int round = 0;
    std::vector<double> loss_history;
};

/// Weighted combination of client parameters. Clients are processed in
/// client_id order so results do not depend on input order. When clip_norm
/// is set, each client's delta from cluster_params is L2-clipped and the
/// result is cluster_params plus the weighted deltas; cluster_params is
/// otherwise unused.
std::vector<double> aggregate(const std::vector<ClientUpdate>& updates,
                              const AggregationPolicy& policy,
                              std::span<const double> cluster_params = {});

struct HierarchicalResult {
    std::map<int, std::vector<double>> cluster_params;
    std::vector<double> global_params;
};

/// Level 1 applies the policy inside each cluster; level 2 combines the
/// cluster results weighted by their sample totals. Clusters listed in
/// cluster_ids but holding no clients are skipped with a warning;
/// cluster_ids may be empty, in which case the clusters are exactly those
/// appearing in the assignment map. Every update's client must be assigned.
HierarchicalResult hierarchical_aggregate(const std::vector<ClientUpdate>& updates,
                                          const std::map<int, int>& cluster_assignments,
                                          const AggregationPolicy& policy,
                                          std::span<const double> cluster_params = {},
                                          const std::vector<int>& cluster_ids = {});

/// A federated participant: private dataset plus its personalized model,
/// which persists (and keeps training) across rounds.
struct Client {
    int client_id = 0;
    std::vector<diffusion::TrainExample> dataset;
    diffusion::DenoiserModel personal;
};

struct RoundOptions {
    int steps_per_round = 50;
    int batch_size = 8;
    double lr = 1e-3;
    // Sampled-timestep range for the cluster objective. Zeros select the
    // general denoising phase [T - 650 + 1, T] automatically.
    int t_min = 0;
    int t_max = 0;
};

/// Held-out mixed evaluation set with a pinned RNG stream, so every round
/// and every model is scored on identical (t, eps) draws.
struct EvalContext {
    std::vector<diffusion::TrainExample> held_out;
    uint64_t eval_seed = 0;
    int repeats = 4;
};

double evaluate(const diffusion::DenoiserModel& model, const EvalContext& eval,
                const RoundOptions& opts, const NoiseSchedule& sched);

struct RoundRecord {
    int round = 0;
    double cluster_eval_loss = 0.0;
    std::vector<std::pair<int, double>> client_eval_losses;
    std::vector<int> excluded;
};

/// One federated round: every client continues training its personalized
/// model on the general-phase objective, uploads the result, and the
/// cluster aggregates. A client whose training diverges is rolled back and
/// excluded from the round with a warning. With steps_per_round = 0 no
/// training or aggregation happens (the round counter still advances so
/// histories stay sequential). Per-client training seeds are drawn from
/// rng in client_id order.
RoundRecord fl_round(std::vector<Client>& clients, ClusterState& cluster,
                     const AggregationPolicy& policy, const RoundOptions& opts,
                     const EvalContext& eval, const NoiseSchedule& sched,
                     std::mt19937_64& rng);

/// Rows: round, client_id or "cluster", loss.
void write_loss_csv(const std::vector<RoundRecord>& records, std::ostream& os);

} // namespace semcom::federated
