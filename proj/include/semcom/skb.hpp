#pragma once

// Shared knowledge base: a three-tier multi-agent protocol in which a
// Proponent proposes, a Responder enforces feasibility, and an Advisor
// supplies pooled link statistics. Tier 1 decomposes tasks into detail-
// leveled subtask plans, tier 2 picks semantic representations under a
// transmission budget, and tier 3 is a translation registry between
// representations. Dialogue and feedback live in five append-only memory
// pools. Agent behavior is pluggable: the deterministic rule-based backend
// is the default; an HTTP backend speaks the same request/response schema.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semcom/codec.hpp"
#include "semcom/image.hpp"

namespace semcom::skb {

using json = nlohmann::json;

struct CommSnapshot {
    double link_rate = 1.0; // bytes per ms
    double snr_db = 0.0;
};

struct SubtaskSpec {
    std::string name;
    std::vector<std::string> depends_on;
    int detail_level = 1;          // maximum selectable level
    double payload_estimate = 1.0; // bytes transmitted per detail level
};

struct TaskSpec {
    std::string task_id;
    std::vector<SubtaskSpec> subtasks;
    double latency_budget_ms = 0.0;
    CommSnapshot comm_snapshot;
};

struct PlannedSubtask {
    std::string name;
    int detail_level = 1;
    bool operator==(const PlannedSubtask&) const = default;
};

struct SubtaskPlan {
    std::vector<PlannedSubtask> items; // topologically ordered
    bool operator==(const SubtaskPlan&) const = default;
};

struct RepresentationInfo {
    double accuracy_score = 0.0; // in [0,1]
    double size_bytes = 0.0;
};
using RepresentationCatalog = std::map<std::string, RepresentationInfo>;

enum class Role { Proponent, Responder, Advisor };
const char* role_name(Role r);

struct DebateRecord {
    int round = 0;
    Role role = Role::Proponent;
    json payload;
    bool accepted = false;
};

struct DebateTranscript {
    std::vector<DebateRecord> records;
};

/// One JSON object per line: {"round", "role", "payload", "accepted"}.
void write_jsonl(const DebateTranscript& transcript, std::ostream& os);

enum class PoolId {
    DecomposerDialogue,
    RepresentationDialogue,
    TaskDetails,
    UserInfo,
    Feedback
};
inline constexpr int kPoolCount = 5;
const char* pool_name(PoolId id);

struct MemoryRecord {
    uint64_t timestamp = 0; // logical, strictly increasing per store
    std::string kind;
    json payload;
};

/// Exactly five append-only pools sharing a logical clock. Records are
/// never mutated or deleted.
class MemoryStore {
public:
    void append(PoolId pool, const std::string& kind, json payload);
    const std::vector<MemoryRecord>& pool(PoolId id) const;
    std::vector<MemoryRecord> query(PoolId id, const std::string& kind, uint64_t t_lo = 0,
                                    uint64_t t_hi = UINT64_MAX) const;
    size_t total_records() const { return next_timestamp_; }

private:
    std::vector<MemoryRecord> pools_[kPoolCount];
    uint64_t next_timestamp_ = 0;
};

/// kind must be "environmental" or "user_judgment".
void record_feedback(MemoryStore& pools, const std::string& kind, json payload);

/// Mean of the "measured_rate" values across environmental feedback
/// records; falls back to the snapshot rate when none exist.
double advisor_link_rate(const MemoryStore& pools, const CommSnapshot& snapshot);

struct AgentRequest {
    Role role = Role::Proponent;
    int tier = 1;
    json context;
};

struct AgentResponse {
    json proposal;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual AgentResponse respond(const AgentRequest& request) = 0;
};

/// Deterministic rules: the Proponent maximizes detail/accuracy (echoing a
/// suggestion when one is present), the Responder enforces the budget and
/// revises to the lexicographically maximal feasible alternative, the
/// Advisor reports the pooled link rate.
class RuleBasedBackend : public AgentBackend {
public:
    AgentResponse respond(const AgentRequest& request) override;
};

/// Speaks the same contract over HTTP: POST {role, tier, context} to the
/// configured path, expects the proposal JSON back.
class HttpBackend : public AgentBackend {
public:
    HttpBackend(std::string host, int port, std::string path = "/agent",
                int timeout_seconds = 5);
    AgentResponse respond(const AgentRequest& request) override;

private:
    std::string host_;
    int port_;
    std::string path_;
    int timeout_seconds_;
};

/// Tier 1. The Proponent opens with the maximal-detail topological plan;
/// the Advisor contributes the pooled link rate (which sets the effective
/// rate for feasibility); the Responder accepts or revises detail levels
/// downward until the estimated transmission time fits the budget. The
/// debate (at most max_rounds rounds) is appended to the decomposer
/// dialogue pool. Throws InfeasibleError with the time deficit when even
/// minimum detail overshoots, ValidationError on cyclic dependencies.
std::pair<SubtaskPlan, DebateTranscript> decompose(const TaskSpec& task, AgentBackend& backend,
                                                   MemoryStore& pools, int max_rounds = 3);

/// Tier 2. Argmax accuracy subject to size_bytes / link_rate <= budget_ms
/// with ties broken by smaller size then name; the snapshot's link rate
/// governs the constraint. Transcript goes to the representation dialogue
/// pool. Throws InfeasibleError (with the cheapest option's overshoot)
/// when nothing fits.
std::pair<std::string, DebateTranscript> select_representation(
    const std::string& subtask_name, const RepresentationCatalog& catalog,
    const CommSnapshot& comm, double budget_ms, AgentBackend& backend, MemoryStore& pools,
    int max_rounds = 3);

using PayloadData = std::variant<BinaryMask, codec::SceneSemantics, std::string>;

/// Tier 3: registered point-to-point conversions between named
/// representations. from == to is always the identity.
class TranslateRegistry {
public:
    using Fn = std::function<PayloadData(const PayloadData&)>;

    void register_path(const std::string& from, const std::string& to, Fn fn);
    bool has_path(const std::string& from, const std::string& to) const;
    PayloadData translate(const std::string& from, const std::string& to,
                          const PayloadData& payload) const;

private:
    std::map<std::pair<std::string, std::string>, Fn> paths_;
};

/// Registry preloaded with segmentation_mask -> bounding_boxes via
/// connected-component analysis.
TranslateRegistry default_registry();

} // namespace semcom::skb
