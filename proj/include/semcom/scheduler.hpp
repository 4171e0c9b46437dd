#pragma once

// Multi-user decoding-offload admission: users request a number of edge
// denoising steps from a candidate option set; admitted requests share an
// edge batch whose latency is affine in batch size, which couples the
// users' utilities. Provides the exact enumeration oracle and a sequential
// greedy solver with a repair pass.

#include <map>
#include <utility>
#include <vector>

namespace semcom::scheduler {

struct BatchLatencyModel {
    double base_ms = 10.0;
    double per_item_ms = 2.0;
};

/// base + per_item * b for b >= 1; an empty batch costs nothing.
double batch_latency(const BatchLatencyModel& model, int b);

struct OffloadRequest {
    int user_id = 0;
    // Candidate offloaded-step counts -> quality score in [0,1]; option 0
    // (stay local) must be present.
    std::map<int, double> quality;
    double local_per_step_ms = 1.0;
    double edge_per_step_ms = 0.2;

    void validate() const;
};

struct Assignment {
    std::map<int, int> granted; // user_id -> offloaded steps (0 = rejected)
};

struct TradeoffMetric {
    double lambda = 0.0; // utility penalty per ms
    int total_steps = 1000;
};

/// Sum over users of quality(k_u) minus lambda times the user's latency:
/// admitted users pay the shared batch latency plus their own edge step
/// time; all users pay local time for the steps they keep.
double utility(const Assignment& a, const std::vector<OffloadRequest>& requests,
               const BatchLatencyModel& model, const TradeoffMetric& metric);

inline constexpr long long kDefaultEnumerationCap = 100000;

/// Exhaustive search over all option combinations (users in user_id order,
/// options ascending), keeping the first maximizer, which makes the
/// tie-break lexicographic. Refuses instances whose search space exceeds
/// the cap.
std::pair<Assignment, double> brute_force_assign(const std::vector<OffloadRequest>& requests,
                                                 const TradeoffMetric& metric,
                                                 const BatchLatencyModel& model,
                                                 long long enumeration_cap = kDefaultEnumerationCap);

/// Users are processed in descending max-quality-gain order, each choosing
/// the option that maximizes utility given the assignment so far; one
/// backward repair pass then re-optimizes every user holding the others
/// fixed. The result is floored at the best of the all-zero assignment and
/// every single-user-only admission.
std::pair<Assignment, double> sequential_assign(const std::vector<OffloadRequest>& requests,
                                                const TradeoffMetric& metric,
                                                const BatchLatencyModel& model);

} // namespace semcom::scheduler
