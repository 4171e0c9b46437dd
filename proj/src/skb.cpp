#include "semcom/skb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <httplib.h>

#include "semcom/errors.hpp"

namespace semcom::skb {

const char* role_name(Role r) {
    switch (r) {
        case Role::Proponent: return "Proponent";
        case Role::Responder: return "Responder";
        case Role::Advisor: return "Advisor";
    }
    return "?";
}

const char* pool_name(PoolId id) {
    switch (id) {
        case PoolId::DecomposerDialogue: return "decomposer-dialogue";
        case PoolId::RepresentationDialogue: return "representation-dialogue";
        case PoolId::TaskDetails: return "task-details";
        case PoolId::UserInfo: return "user-info";
        case PoolId::Feedback: return "feedback";
    }
    return "?";
}

void write_jsonl(const DebateTranscript& transcript, std::ostream& os) {
    for (const DebateRecord& r : transcript.records) {
        const json line = {{"round", r.round},
                           {"role", role_name(r.role)},
                           {"payload", r.payload},
                           {"accepted", r.accepted}};
        os << line.dump() << "\n";
    }
}

void MemoryStore::append(PoolId pool, const std::string& kind, json payload) {
    auto& p = pools_[static_cast<size_t>(pool)];
    p.push_back(MemoryRecord{next_timestamp_++, kind, std::move(payload)});
}

const std::vector<MemoryRecord>& MemoryStore::pool(PoolId id) const {
    return pools_[static_cast<size_t>(id)];
}

std::vector<MemoryRecord> MemoryStore::query(PoolId id, const std::string& kind, uint64_t t_lo,
                                             uint64_t t_hi) const {
    std::vector<MemoryRecord> out;
    for (const MemoryRecord& r : pool(id)) {
        if (!kind.empty() && r.kind != kind) {
            continue;
        }
        if (r.timestamp < t_lo || r.timestamp > t_hi) {
            continue;
        }
        out.push_back(r);
    }
    return out;
}

void record_feedback(MemoryStore& pools, const std::string& kind, json payload) {
    if (kind != "environmental" && kind != "user_judgment") {
        throw ValidationError("feedback kind must be environmental or user_judgment");
    }
    pools.append(PoolId::Feedback, kind, std::move(payload));
}

double advisor_link_rate(const MemoryStore& pools, const CommSnapshot& snapshot) {
    double sum = 0.0;
    int n = 0;
    for (const MemoryRecord& r : pools.pool(PoolId::Feedback)) {
        if (r.kind != "environmental" || !r.payload.contains("measured_rate")) {
            continue;
        }
        sum += r.payload.at("measured_rate").get<double>();
        n += 1;
    }
    return n > 0 ? sum / n : snapshot.link_rate;
}

namespace {

// Kahn topological sort; the ready queue preserves input order so the
// result is deterministic. Throws on duplicate names, unknown dependencies
// and cycles.
std::vector<size_t> topo_order(const std::vector<SubtaskSpec>& subs) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < subs.size(); ++i) {
        if (!index.emplace(subs[i].name, i).second) {
            throw ValidationError("duplicate subtask name: " + subs[i].name);
        }
    }
    std::vector<int> indeg(subs.size(), 0);
    std::vector<std::vector<size_t>> dependents(subs.size());
    for (size_t i = 0; i < subs.size(); ++i) {
        for (const std::string& dep : subs[i].depends_on) {
            const auto it = index.find(dep);
            if (it == index.end()) {
                throw ValidationError("unknown dependency '" + dep + "' of " + subs[i].name);
            }
            dependents[it->second].push_back(i);
            indeg[i] += 1;
        }
    }
    std::deque<size_t> ready;
    for (size_t i = 0; i < subs.size(); ++i) {
        if (indeg[i] == 0) {
            ready.push_back(i);
        }
    }
    std::vector<size_t> order;
    while (!ready.empty()) {
        const size_t i = ready.front();
        ready.pop_front();
        order.push_back(i);
        for (size_t j : dependents[i]) {
            if (--indeg[j] == 0) {
                ready.push_back(j);
            }
        }
    }
    if (order.size() != subs.size()) {
        throw ValidationError("subtask dependencies contain a cycle");
    }
    return order;
}

void validate_task(const TaskSpec& task) {
    if (task.subtasks.empty()) {
        throw ValidationError("task has no subtasks");
    }
    if (task.latency_budget_ms <= 0.0 || task.comm_snapshot.link_rate <= 0.0) {
        throw ValidationError("task needs a positive budget and link rate");
    }
    for (const SubtaskSpec& s : task.subtasks) {
        if (s.detail_level < 1) {
            throw ValidationError("detail_level must be >= 1 for " + s.name);
        }
        if (s.payload_estimate <= 0.0) {
            throw ValidationError("payload_estimate must be positive for " + s.name);
        }
    }
}

json plan_to_json(const SubtaskPlan& plan) {
    json arr = json::array();
    for (const PlannedSubtask& p : plan.items) {
        arr.push_back(json::array({p.name, p.detail_level}));
    }
    return arr;
}

SubtaskPlan plan_from_json(const json& arr) {
    SubtaskPlan plan;
    for (const json& item : arr) {
        plan.items.push_back(PlannedSubtask{item.at(0).get<std::string>(),
                                            item.at(1).get<int>()});
    }
    return plan;
}

double plan_time_ms(const SubtaskPlan& plan, const std::map<std::string, double>& payloads,
                    double rate) {
    double bytes = 0.0;
    for (const PlannedSubtask& p : plan.items) {
        bytes += payloads.at(p.name) * p.detail_level;
    }
    return bytes / rate;
}

json advisor_context(const MemoryStore& pools, double fallback_rate) {
    json rates = json::array();
    for (const MemoryRecord& r : pools.pool(PoolId::Feedback)) {
        if (r.kind == "environmental" && r.payload.contains("measured_rate")) {
            rates.push_back(r.payload.at("measured_rate").get<double>());
        }
    }
    return {{"environmental_rates", rates}, {"fallback_rate", fallback_rate}};
}

void push_record(DebateTranscript& transcript, MemoryStore& pools, PoolId pool, int round,
                 Role role, json payload, bool accepted) {
    transcript.records.push_back(DebateRecord{round, role, payload, accepted});
    pools.append(pool, "debate",
                 json{{"round", round},
                      {"role", role_name(role)},
                      {"payload", std::move(payload)},
                      {"accepted", accepted}});
}

} // namespace

AgentResponse RuleBasedBackend::respond(const AgentRequest& request) {
    const json& ctx = request.context;
    if (request.role == Role::Advisor) {
        const json& rates = ctx.at("environmental_rates");
        double sum = 0.0;
        for (const json& r : rates) {
            sum += r.get<double>();
        }
        const double rate =
            rates.empty() ? ctx.at("fallback_rate").get<double>() : sum / rates.size();
        return {json{{"link_rate", rate}}};
    }

    if (request.tier == 1) {
        if (request.role == Role::Proponent) {
            if (ctx.contains("suggestion")) {
                return {json{{"plan", ctx.at("suggestion")}}};
            }
            json plan = json::array();
            for (const json& s : ctx.at("subtasks")) {
                plan.push_back(json::array(
                    {s.at("name").get<std::string>(), s.at("max_detail").get<int>()}));
            }
            return {json{{"plan", plan}}};
        }
        // Responder: enforce the transmission budget over the proposal.
        const double budget = ctx.at("budget_ms").get<double>();
        const double rate = ctx.at("link_rate").get<double>();
        const double cap_bytes = budget * rate;
        std::vector<std::string> names;
        std::map<std::string, double> payload;
        std::map<std::string, int> max_detail;
        double min_bytes = 0.0;
        for (const json& s : ctx.at("subtasks")) {
            const auto name = s.at("name").get<std::string>();
            names.push_back(name);
            payload[name] = s.at("payload_bytes").get<double>();
            max_detail[name] = s.at("max_detail").get<int>();
            min_bytes += payload[name];
        }
        if (min_bytes > cap_bytes) {
            return {json{{"verdict", "infeasible"},
                         {"deficit_ms", min_bytes / rate - budget}}};
        }
        double proposed_bytes = 0.0;
        for (const json& item : ctx.at("plan")) {
            proposed_bytes +=
                payload.at(item.at(0).get<std::string>()) * item.at(1).get<int>();
        }
        if (proposed_bytes <= cap_bytes) {
            return {json{{"verdict", "accept"}}};
        }
        // Reduce detail to the lexicographically maximal feasible vector:
        // walk the plan order, granting each subtask the highest level that
        // still leaves room for the minimum completion of the rest.
        double remaining_min = min_bytes;
        double used = 0.0;
        json revised = json::array();
        for (const std::string& name : names) {
            remaining_min -= payload.at(name);
            const double room = cap_bytes - used - remaining_min;
            const int level = std::clamp(static_cast<int>(std::floor(room / payload.at(name))),
                                         1, max_detail.at(name));
            used += payload.at(name) * level;
            revised.push_back(json::array({name, level}));
        }
        return {json{{"verdict", "revise"}, {"plan", revised}}};
    }

    if (request.tier == 2) {
        const json& catalog = ctx.at("catalog");
        auto better = [&](const std::string& a, const std::string& b) {
            // true when a beats b: higher accuracy, then smaller size, then
            // name order.
            const double acc_a = catalog.at(a).at("accuracy").get<double>();
            const double acc_b = catalog.at(b).at("accuracy").get<double>();
            if (acc_a != acc_b) {
                return acc_a > acc_b;
            }
            const double sz_a = catalog.at(a).at("size_bytes").get<double>();
            const double sz_b = catalog.at(b).at("size_bytes").get<double>();
            if (sz_a != sz_b) {
                return sz_a < sz_b;
            }
            return a < b;
        };
        if (request.role == Role::Proponent) {
            if (ctx.contains("suggestion")) {
                return {json{{"choice", ctx.at("suggestion")}}};
            }
            std::string best;
            for (auto it = catalog.begin(); it != catalog.end(); ++it) {
                if (best.empty() || better(it.key(), best)) {
                    best = it.key();
                }
            }
            return {json{{"choice", best}}};
        }
        // Responder: feasibility filter.
        const double budget = ctx.at("budget_ms").get<double>();
        const double rate = ctx.at("link_rate").get<double>();
        auto feasible = [&](const std::string& name) {
            return catalog.at(name).at("size_bytes").get<double>() / rate <= budget;
        };
        if (feasible(ctx.at("choice").get<std::string>())) {
            return {json{{"verdict", "accept"}}};
        }
        std::string best;
        double cheapest = std::numeric_limits<double>::infinity();
        for (auto it = catalog.begin(); it != catalog.end(); ++it) {
            cheapest = std::min(cheapest, it.value().at("size_bytes").get<double>());
            if (!feasible(it.key())) {
                continue;
            }
            if (best.empty() || better(it.key(), best)) {
                best = it.key();
            }
        }
        if (best.empty()) {
            return {json{{"verdict", "infeasible"},
                         {"overshoot_ms", cheapest / rate - budget}}};
        }
        return {json{{"verdict", "revise"}, {"choice", best}}};
    }
    throw ValidationError("unknown agent tier");
}

std::pair<SubtaskPlan, DebateTranscript> decompose(const TaskSpec& task, AgentBackend& backend,
                                                   MemoryStore& pools, int max_rounds) {
    validate_task(task);
    if (max_rounds < 2) {
        throw ValidationError("debate needs at least two rounds available");
    }
    const std::vector<size_t> order = topo_order(task.subtasks);

    json subtask_ctx = json::array();
    std::map<std::string, double> payloads;
    std::map<std::string, int> max_levels;
    for (size_t i : order) {
        const SubtaskSpec& s = task.subtasks[i];
        subtask_ctx.push_back(json{{"name", s.name},
                                   {"max_detail", s.detail_level},
                                   {"payload_bytes", s.payload_estimate}});
        payloads[s.name] = s.payload_estimate;
        max_levels[s.name] = s.detail_level;
    }

    DebateTranscript transcript;
    const PoolId pool = PoolId::DecomposerDialogue;

    const AgentResponse advisor = backend.respond(
        {Role::Advisor, 1, advisor_context(pools, task.comm_snapshot.link_rate)});
    const double rate = advisor.proposal.at("link_rate").get<double>();

    json suggestion;
    SubtaskPlan accepted_plan;
    bool accepted = false;
    for (int round = 1; round <= max_rounds && !accepted; ++round) {
        json prop_ctx = {{"subtasks", subtask_ctx},
                         {"budget_ms", task.latency_budget_ms},
                         {"link_rate", rate}};
        if (!suggestion.is_null()) {
            prop_ctx["suggestion"] = suggestion;
        }
        const AgentResponse proposal = backend.respond({Role::Proponent, 1, prop_ctx});
        push_record(transcript, pools, pool, round, Role::Proponent, proposal.proposal, false);
        if (round == 1) {
            push_record(transcript, pools, pool, round, Role::Advisor, advisor.proposal, false);
        }

        const json resp_ctx = {{"plan", proposal.proposal.at("plan")},
                               {"subtasks", subtask_ctx},
                               {"budget_ms", task.latency_budget_ms},
                               {"link_rate", rate}};
        const AgentResponse verdict = backend.respond({Role::Responder, 1, resp_ctx});
        const auto kind = verdict.proposal.at("verdict").get<std::string>();
        if (kind == "infeasible") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        false);
            throw InfeasibleError("decomposition infeasible even at minimum detail",
                                  verdict.proposal.at("deficit_ms").get<double>());
        }
        if (kind == "accept") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        true);
            accepted_plan = plan_from_json(proposal.proposal.at("plan"));
            accepted = true;
        } else if (kind == "revise") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        false);
            suggestion = verdict.proposal.at("plan");
        } else {
            throw ValidationError("unknown responder verdict: " + kind);
        }
    }
    if (!accepted) {
        throw ValidationError("debate exceeded the round limit without acceptance");
    }

    // Guard the result regardless of which backend produced it.
    if (accepted_plan.items.size() != task.subtasks.size()) {
        throw ValidationError("accepted plan does not cover all subtasks");
    }
    for (size_t k = 0; k < order.size(); ++k) {
        const PlannedSubtask& p = accepted_plan.items[k];
        if (p.name != task.subtasks[order[k]].name) {
            throw ValidationError("accepted plan is not in topological order");
        }
        if (p.detail_level < 1 || p.detail_level > max_levels.at(p.name)) {
            throw ValidationError("accepted plan has an out-of-range detail level");
        }
    }
    if (plan_time_ms(accepted_plan, payloads, rate) > task.latency_budget_ms * (1.0 + 1e-12)) {
        throw ValidationError("accepted plan exceeds the latency budget");
    }

    pools.append(PoolId::TaskDetails, "plan",
                 json{{"task_id", task.task_id}, {"plan", plan_to_json(accepted_plan)}});
    return {accepted_plan, transcript};
}

std::pair<std::string, DebateTranscript> select_representation(
    const std::string& subtask_name, const RepresentationCatalog& catalog,
    const CommSnapshot& comm, double budget_ms, AgentBackend& backend, MemoryStore& pools,
    int max_rounds) {
    if (catalog.empty()) {
        throw ValidationError("representation catalog is empty");
    }
    if (budget_ms <= 0.0 || comm.link_rate <= 0.0) {
        throw ValidationError("selection needs a positive budget and link rate");
    }
    for (const auto& [name, info] : catalog) {
        if (info.accuracy_score <= 0.0 || info.accuracy_score > 1.0 || info.size_bytes <= 0.0) {
            throw ValidationError("catalog entry '" + name + "' has invalid score or size");
        }
    }
    if (max_rounds < 2) {
        throw ValidationError("debate needs at least two rounds available");
    }

    json catalog_ctx = json::object();
    for (const auto& [name, info] : catalog) {
        catalog_ctx[name] = {{"accuracy", info.accuracy_score},
                             {"size_bytes", info.size_bytes}};
    }

    DebateTranscript transcript;
    const PoolId pool = PoolId::RepresentationDialogue;

    const AgentResponse advisor =
        backend.respond({Role::Advisor, 2, advisor_context(pools, comm.link_rate)});

    json suggestion;
    std::string accepted_choice;
    bool accepted = false;
    for (int round = 1; round <= max_rounds && !accepted; ++round) {
        json prop_ctx = {{"subtask", subtask_name}, {"catalog", catalog_ctx}};
        if (!suggestion.is_null()) {
            prop_ctx["suggestion"] = suggestion;
        }
        const AgentResponse proposal = backend.respond({Role::Proponent, 2, prop_ctx});
        push_record(transcript, pools, pool, round, Role::Proponent, proposal.proposal, false);
        if (round == 1) {
            push_record(transcript, pools, pool, round, Role::Advisor, advisor.proposal, false);
        }

        const json resp_ctx = {{"choice", proposal.proposal.at("choice")},
                               {"catalog", catalog_ctx},
                               {"budget_ms", budget_ms},
                               {"link_rate", comm.link_rate}};
        const AgentResponse verdict = backend.respond({Role::Responder, 2, resp_ctx});
        const auto kind = verdict.proposal.at("verdict").get<std::string>();
        if (kind == "infeasible") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        false);
            throw InfeasibleError("no representation fits the transmission budget",
                                  verdict.proposal.at("overshoot_ms").get<double>());
        }
        if (kind == "accept") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        true);
            accepted_choice = proposal.proposal.at("choice").get<std::string>();
            accepted = true;
        } else if (kind == "revise") {
            push_record(transcript, pools, pool, round, Role::Responder, verdict.proposal,
                        false);
            suggestion = verdict.proposal.at("choice");
        } else {
            throw ValidationError("unknown responder verdict: " + kind);
        }
    }
    if (!accepted) {
        throw ValidationError("debate exceeded the round limit without acceptance");
    }

    const auto it = catalog.find(accepted_choice);
    if (it == catalog.end()) {
        throw ValidationError("accepted representation is not in the catalog");
    }
    if (it->second.size_bytes / comm.link_rate > budget_ms * (1.0 + 1e-12)) {
        throw ValidationError("accepted representation exceeds the budget");
    }
    return {accepted_choice, transcript};
}

void TranslateRegistry::register_path(const std::string& from, const std::string& to, Fn fn) {
    if (from.empty() || to.empty() || !fn) {
        throw ValidationError("translation registration needs names and a function");
    }
    paths_[{from, to}] = std::move(fn);
}

bool TranslateRegistry::has_path(const std::string& from, const std::string& to) const {
    return from == to || paths_.count({from, to}) > 0;
}

PayloadData TranslateRegistry::translate(const std::string& from, const std::string& to,
                                         const PayloadData& payload) const {
    if (from == to) {
        return payload;
    }
    const auto it = paths_.find({from, to});
    if (it == paths_.end()) {
        throw NoPathError(from, to);
    }
    return it->second(payload);
}

TranslateRegistry default_registry() {
    TranslateRegistry reg;
    reg.register_path("segmentation_mask", "bounding_boxes", [](const PayloadData& payload) {
        const auto* mask = std::get_if<BinaryMask>(&payload);
        if (mask == nullptr) {
            throw ValidationError("segmentation_mask payload must be a binary mask");
        }
        codec::SceneSemantics semantics;
        semantics.scene_id = "translated";
        semantics.boxes = codec::mask_to_boxes(*mask);
        return PayloadData{semantics};
    });
    return reg;
}

HttpBackend::HttpBackend(std::string host, int port, std::string path, int timeout_seconds)
    : host_(std::move(host)), port_(port), path_(std::move(path)),
      timeout_seconds_(timeout_seconds) {}

AgentResponse HttpBackend::respond(const AgentRequest& request) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    const json body = {{"role", role_name(request.role)},
                       {"tier", request.tier},
                       {"context", request.context}};
    const auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
        throw ValidationError("agent backend unreachable at " + host_ + ":" +
                              std::to_string(port_));
    }
    if (res->status != 200) {
        throw ValidationError("agent backend returned HTTP " + std::to_string(res->status));
    }
    try {
        return {json::parse(res->body)};
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("agent backend sent malformed JSON: ") + e.what());
    }
}

} // namespace semcom::skb
