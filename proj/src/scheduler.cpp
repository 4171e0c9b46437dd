#include "semcom/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "semcom/errors.hpp"

namespace semcom::scheduler {

namespace {

constexpr int kMaxOffloadOption = 650;

} // namespace

double batch_latency(const BatchLatencyModel& model, int b) {
    if (model.base_ms < 0.0 || model.per_item_ms <= 0.0) {
        throw ValidationError("batch model needs base_ms >= 0 and per_item_ms > 0");
    }
    if (b < 0) {
        throw ValidationError("batch size must be non-negative");
    }
    if (b == 0) {
        return 0.0;
    }
    return model.base_ms + model.per_item_ms * b;
}

void OffloadRequest::validate() const {
    if (!quality.count(0)) {
        throw ValidationError("request must include the stay-local option 0");
    }
    if (local_per_step_ms <= 0.0 || edge_per_step_ms <= 0.0) {
        throw ValidationError("per-step costs must be positive");
    }
    for (const auto& [steps, q] : quality) {
        if (steps < 0 || steps > kMaxOffloadOption) {
            throw ValidationError("candidate option outside [0, 650]");
        }
        if (q < 0.0 || q > 1.0 || !std::isfinite(q)) {
            throw ValidationError("quality scores must lie in [0,1]");
        }
    }
}

double utility(const Assignment& a, const std::vector<OffloadRequest>& requests,
               const BatchLatencyModel& model, const TradeoffMetric& metric) {
    if (metric.lambda < 0.0 || metric.total_steps < 1) {
        throw ValidationError("metric needs lambda >= 0 and total_steps >= 1");
    }
    int admitted = 0;
    for (const OffloadRequest& r : requests) {
        r.validate();
        const auto it = a.granted.find(r.user_id);
        if (it == a.granted.end()) {
            throw ValidationError("assignment missing user " + std::to_string(r.user_id));
        }
        if (!r.quality.count(it->second)) {
            throw ValidationError("granted steps are not a candidate option for user " +
                                  std::to_string(r.user_id));
        }
        if (it->second > 0) {
            ++admitted;
        }
    }
    const double shared = batch_latency(model, admitted);
    double total = 0.0;
    for (const OffloadRequest& r : requests) {
        const int k = a.granted.at(r.user_id);
        double latency = static_cast<double>(metric.total_steps - k) * r.local_per_step_ms;
        if (k > 0) {
            latency += shared + static_cast<double>(k) * r.edge_per_step_ms;
        }
        total += r.quality.at(k) - metric.lambda * latency;
    }
    return total;
}

namespace {

std::vector<size_t> sorted_by_user_id(const std::vector<OffloadRequest>& requests) {
    std::vector<size_t> order(requests.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return requests[a].user_id < requests[b].user_id;
    });
    return order;
}

std::vector<int> option_list(const OffloadRequest& r) {
    std::vector<int> opts;
    opts.reserve(r.quality.size());
    for (const auto& [steps, q] : r.quality) {
        opts.push_back(steps);
    }
    return opts; // std::map iteration is ascending already
}

} // namespace

std::pair<Assignment, double> brute_force_assign(const std::vector<OffloadRequest>& requests,
                                                 const TradeoffMetric& metric,
                                                 const BatchLatencyModel& model,
                                                 long long enumeration_cap) {
    if (requests.empty()) {
        throw ValidationError("no requests to assign");
    }
    long long combos = 1;
    for (const OffloadRequest& r : requests) {
        r.validate();
        combos *= static_cast<long long>(r.quality.size());
        if (combos > enumeration_cap) {
            throw ValidationError(
                "search space exceeds the enumeration cap; use sequential_assign");
        }
    }
    const std::vector<size_t> order = sorted_by_user_id(requests);
    std::vector<std::vector<int>> options(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
        options[i] = option_list(requests[order[i]]);
    }

    std::vector<size_t> cursor(order.size(), 0);
    Assignment best;
    double best_u = -std::numeric_limits<double>::infinity();
    bool done = false;
    while (!done) {
        Assignment cand;
        for (size_t i = 0; i < order.size(); ++i) {
            cand.granted[requests[order[i]].user_id] = options[i][cursor[i]];
        }
        const double u = utility(cand, requests, model, metric);
        if (u > best_u) {
            best_u = u;
            best = cand;
        }
        // Odometer increment, last user fastest, so candidates appear in
        // lexicographic order over the user_id-sorted option vector.
        size_t pos = order.size();
        while (pos > 0) {
            --pos;
            if (++cursor[pos] < options[pos].size()) {
                break;
            }
            cursor[pos] = 0;
            if (pos == 0) {
                done = true;
            }
        }
    }
    return {best, best_u};
}

std::pair<Assignment, double> sequential_assign(const std::vector<OffloadRequest>& requests,
                                                const TradeoffMetric& metric,
                                                const BatchLatencyModel& model) {
    if (requests.empty()) {
        throw ValidationError("no requests to assign");
    }
    for (const OffloadRequest& r : requests) {
        r.validate();
    }

    // Descending potential quality gain over staying local; user_id breaks
    // ties.
    std::vector<size_t> order(requests.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    auto gain = [&](size_t i) {
        const OffloadRequest& r = requests[i];
        double best = 0.0;
        for (const auto& [steps, q] : r.quality) {
            best = std::max(best, q - r.quality.at(0));
        }
        return best;
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double ga = gain(a), gb = gain(b);
        if (ga != gb) {
            return ga > gb;
        }
        return requests[a].user_id < requests[b].user_id;
    });

    Assignment current;
    for (const OffloadRequest& r : requests) {
        current.granted[r.user_id] = 0;
    }

    auto optimize_user = [&](size_t idx) {
        const OffloadRequest& r = requests[idx];
        int best_k = current.granted.at(r.user_id);
        Assignment probe = current;
        probe.granted[r.user_id] = best_k;
        double best_u = utility(probe, requests, model, metric);
        for (const auto& [steps, q] : r.quality) {
            probe.granted[r.user_id] = steps;
            const double u = utility(probe, requests, model, metric);
            if (u > best_u) {
                best_u = u;
                best_k = steps;
            }
        }
        current.granted[r.user_id] = best_k;
    };

    for (size_t idx : order) {
        optimize_user(idx);
    }
    for (size_t idx : order) {
        optimize_user(idx); // repair pass
    }

    double best_u = utility(current, requests, model, metric);
    Assignment best = current;

    // Floor the result at the trivial assignments the solver must never
    // lose to: everyone local, and each single-user-only admission.
    Assignment zero;
    for (const OffloadRequest& r : requests) {
        zero.granted[r.user_id] = 0;
    }
    const double zero_u = utility(zero, requests, model, metric);
    if (zero_u > best_u) {
        best_u = zero_u;
        best = zero;
    }
    for (const OffloadRequest& r : requests) {
        for (const auto& [steps, q] : r.quality) {
            Assignment solo = zero;
            solo.granted[r.user_id] = steps;
            const double u = utility(solo, requests, model, metric);
            if (u > best_u) {
                best_u = u;
                best = solo;
            }
        }
    }
    return {best, best_u};
}

} // namespace semcom::scheduler
