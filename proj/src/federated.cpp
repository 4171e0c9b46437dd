#include "semcom/federated.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>

#include "semcom/csv.hpp"
#include "semcom/errors.hpp"
#include "semcom/kernels.hpp"
#include "semcom/rng.hpp"

namespace semcom::federated {

namespace {

std::vector<size_t> order_by_client_id(const std::vector<ClientUpdate>& updates) {
    std::vector<size_t> order(updates.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return updates[a].client_id < updates[b].client_id;
    });
    return order;
}

std::vector<double> compute_weights(const std::vector<ClientUpdate>& updates,
                                    const std::vector<size_t>& order,
                                    const AggregationPolicy& policy) {
    std::vector<double> w(order.size(), 0.0);
    for (size_t k = 0; k < order.size(); ++k) {
        const ClientUpdate& u = updates[order[k]];
        switch (policy.mode) {
            case WeightingMode::Uniform:
                w[k] = 1.0;
                break;
            case WeightingMode::SampleSize:
                if (u.num_samples < 1) {
                    throw ValidationError("client update needs num_samples >= 1");
                }
                w[k] = static_cast<double>(u.num_samples);
                break;
            case WeightingMode::AdaptiveInverseLoss: {
                if (!std::isfinite(u.local_loss) || u.local_loss < 0.0) {
                    throw ValidationError("client loss must be finite and non-negative");
                }
                w[k] = 1.0 / std::max(u.local_loss, policy.loss_epsilon);
                break;
            }
        }
    }
    if (policy.normalize) {
        double total = 0.0;
        for (double v : w) {
            total += v;
        }
        for (double& v : w) {
            v /= total;
        }
    }
    return w;
}

} // namespace

std::vector<double> aggregate(const std::vector<ClientUpdate>& updates,
                              const AggregationPolicy& policy,
                              std::span<const double> cluster_params) {
    if (updates.empty()) {
        throw ValidationError("aggregate requires at least one update");
    }
    const size_t dim = updates.front().params.size();
    for (const ClientUpdate& u : updates) {
        if (u.params.size() != dim) {
            throw ValidationError("client parameter vectors have mismatched lengths");
        }
    }
    if (policy.clip_norm) {
        if (*policy.clip_norm <= 0.0) {
            throw ValidationError("clip_norm must be positive");
        }
        if (cluster_params.size() != dim) {
            throw ValidationError("clipping needs current cluster params of matching length");
        }
    }

    const std::vector<size_t> order = order_by_client_id(updates);
    const std::vector<double> w = compute_weights(updates, order, policy);

    std::vector<double> result;
    if (policy.clip_norm) {
        result.assign(cluster_params.begin(), cluster_params.end());
        std::vector<double> delta(dim);
        for (size_t k = 0; k < order.size(); ++k) {
            const ClientUpdate& u = updates[order[k]];
            for (size_t i = 0; i < dim; ++i) {
                delta[i] = u.params[i] - cluster_params[i];
            }
            const double norm = std::sqrt(kern::sumsq(delta));
            const double scale = norm > *policy.clip_norm ? *policy.clip_norm / norm : 1.0;
            kern::axpy(w[k] * scale, delta, result);
        }
    } else {
        result.assign(dim, 0.0);
        for (size_t k = 0; k < order.size(); ++k) {
            kern::axpy(w[k], updates[order[k]].params, result);
        }
    }
    return result;
}

HierarchicalResult hierarchical_aggregate(const std::vector<ClientUpdate>& updates,
                                          const std::map<int, int>& cluster_assignments,
                                          const AggregationPolicy& policy,
                                          std::span<const double> cluster_params,
                                          const std::vector<int>& cluster_ids) {
    std::map<int, std::vector<ClientUpdate>> by_cluster;
    std::map<int, size_t> samples_by_cluster;
    for (const ClientUpdate& u : updates) {
        auto it = cluster_assignments.find(u.client_id);
        if (it == cluster_assignments.end()) {
            throw ValidationError("client " + std::to_string(u.client_id) +
                                  " has no cluster assignment");
        }
        by_cluster[it->second].push_back(u);
        samples_by_cluster[it->second] += u.num_samples;
    }
    for (int cid : cluster_ids) {
        if (!by_cluster.count(cid)) {
            std::cerr << "warning: cluster " << cid << " has no client updates; skipped\n";
        }
    }
    if (by_cluster.empty()) {
        throw ValidationError("hierarchical aggregation requires at least one populated cluster");
    }

    HierarchicalResult out;
    double total_samples = 0.0;
    for (const auto& [cid, members] : by_cluster) {
        out.cluster_params.emplace(cid, aggregate(members, policy, cluster_params));
        total_samples += static_cast<double>(samples_by_cluster[cid]);
    }
    const size_t dim = out.cluster_params.begin()->second.size();
    out.global_params.assign(dim, 0.0);
    for (const auto& [cid, params] : out.cluster_params) {
        const double weight = static_cast<double>(samples_by_cluster[cid]) / total_samples;
        kern::axpy(weight, params, out.global_params);
    }
    return out;
}

namespace {

void resolve_t_range(const RoundOptions& opts, const NoiseSchedule& sched, int& t_min,
                     int& t_max) {
    t_min = opts.t_min > 0 ? opts.t_min
                           : std::max(1, sched.T - diffusion::kMaxOffloadSteps + 1);
    t_max = opts.t_max > 0 ? opts.t_max : sched.T;
}

} // namespace

double evaluate(const diffusion::DenoiserModel& model, const EvalContext& eval,
                const RoundOptions& opts, const NoiseSchedule& sched) {
    if (eval.held_out.empty() || eval.repeats < 1) {
        throw ValidationError("evaluation needs a non-empty held-out set and repeats >= 1");
    }
    diffusion::TrainConfig cfg;
    resolve_t_range(opts, sched, cfg.t_min, cfg.t_max);
    auto rng = make_rng(eval.eval_seed, 0);
    diffusion::Workspace ws;
    double total = 0.0;
    for (int r = 0; r < eval.repeats; ++r) {
        total += diffusion::eval_loss(model, eval.held_out, sched, rng, cfg, ws);
    }
    return total / eval.repeats;
}

RoundRecord fl_round(std::vector<Client>& clients, ClusterState& cluster,
                     const AggregationPolicy& policy, const RoundOptions& opts,
                     const EvalContext& eval, const NoiseSchedule& sched,
                     std::mt19937_64& rng) {
    if (clients.empty()) {
        throw ValidationError("fl_round requires at least one client");
    }
    if (opts.steps_per_round < 0 || opts.batch_size < 1) {
        throw ValidationError("invalid round options");
    }

    std::vector<size_t> order(clients.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return clients[a].client_id < clients[b].client_id;
    });

    diffusion::TrainConfig tcfg;
    tcfg.lr = opts.lr;
    resolve_t_range(opts, sched, tcfg.t_min, tcfg.t_max);

    RoundRecord rec;
    std::vector<ClientUpdate> updates;
    diffusion::Workspace ws;

    for (size_t idx : order) {
        Client& c = clients[idx];
        if (c.dataset.empty()) {
            throw ValidationError("client " + std::to_string(c.client_id) +
                                  " has an empty dataset");
        }
        const uint64_t client_seed = rng();
        if (opts.steps_per_round == 0) {
            continue;
        }
        auto train_rng = std::mt19937_64(client_seed);
        const std::vector<double> snapshot = c.personal.params();
        std::deque<double> recent;
        bool diverged = false;
        std::vector<diffusion::TrainExample> batch;
        std::uniform_int_distribution<size_t> pick(0, c.dataset.size() - 1);
        try {
            for (int step = 0; step < opts.steps_per_round; ++step) {
                batch.clear();
                for (int b = 0; b < opts.batch_size; ++b) {
                    batch.push_back(c.dataset[pick(train_rng)]);
                }
                const double loss =
                    diffusion::train_step(c.personal, batch, sched, train_rng, tcfg, ws);
                recent.push_back(loss);
                if (recent.size() > 10) {
                    recent.pop_front();
                }
            }
        } catch (const DivergenceError&) {
            diverged = true;
        }
        if (diverged) {
            c.personal.params() = snapshot;
            rec.excluded.push_back(c.client_id);
            std::cerr << "warning: client " << c.client_id
                      << " diverged this round; rolled back and excluded\n";
            continue;
        }
        ClientUpdate u;
        u.client_id = c.client_id;
        u.params = c.personal.params();
        u.num_samples = c.dataset.size();
        double mean_recent = 0.0;
        for (double v : recent) {
            mean_recent += v;
        }
        u.local_loss = recent.empty() ? 0.0 : mean_recent / static_cast<double>(recent.size());
        updates.push_back(std::move(u));
    }

    if (!updates.empty()) {
        cluster.params = aggregate(updates, policy, cluster.params);
    }
    cluster.round += 1;

    rec.round = cluster.round;
    diffusion::DenoiserModel cluster_model(clients.front().personal.arch());
    if (cluster.params.size() != cluster_model.params().size()) {
        throw ValidationError("cluster params length does not match client arch");
    }
    cluster_model.params() = cluster.params;
    rec.cluster_eval_loss = evaluate(cluster_model, eval, opts, sched);
    for (size_t idx : order) {
        rec.client_eval_losses.emplace_back(
            clients[idx].client_id,
            evaluate(clients[idx].personal, eval, opts, sched));
    }
    cluster.loss_history.push_back(rec.cluster_eval_loss);
    return rec;
}

void write_loss_csv(const std::vector<RoundRecord>& records, std::ostream& os) {
    os << "round,client_id,loss\n";
    for (const RoundRecord& r : records) {
        os << r.round << ",cluster," << format_double(r.cluster_eval_loss) << "\n";
        for (const auto& [id, loss] : r.client_eval_losses) {
            os << r.round << "," << id << "," << format_double(loss) << "\n";
        }
    }
}

} // namespace semcom::federated
