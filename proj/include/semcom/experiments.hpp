#pragma once

// Experiment drivers behind the CLI subcommands: model preparation with
// checkpoint reuse, the multi-user case-study grid, federated training
// curves, scheduler benchmark instances, encoder-offload policy training
// and evaluation, and a small SVG line-chart renderer for the emitted
// CSVs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "semcom/diffusion.hpp"
#include "semcom/federated.hpp"
#include "semcom/harness.hpp"
#include "semcom/offload.hpp"

namespace semcom::experiments {

struct MetricsRow {
    uint64_t seed = 0;
    int user = 0;
    double snr_db = 0.0;
    int offload_steps = 0;
    double iou_mean = 0.0;
    double psnr_db = 0.0;
    double latency_ms_modeled = 0.0;
};

struct TrainedModels {
    diffusion::DenoiserModel cluster;            // general phase, mixed data
    std::vector<diffusion::DenoiserModel> users; // full range, own background
};

/// Trains the cluster model on mixed-background data over the general
/// denoising phase and one personalized model per user on its own
/// background over the full timestep range. Writes checkpoints when a
/// checkpoint directory is configured.
TrainedModels train_models(const harness::ScenarioConfig& cfg);

/// Loads checkpoints when they all exist, otherwise trains (or fails when
/// train_if_missing is off).
TrainedModels prepare_models(const harness::ScenarioConfig& cfg);

/// One grid cell: digital semantics transport, split sampling across the
/// analog channel, brightness equalization against the user's background,
/// detection metrics and the batch-model latency.
MetricsRow evaluate_cell(const harness::ScenarioConfig& cfg, const TrainedModels& models,
                         const NoiseSchedule& sched, uint64_t seed, int user, double snr_db,
                         int offload_steps);

/// Full seed x user x snr x offload grid; seeds fan out across threads and
/// the rows merge back in grid order.
std::vector<MetricsRow> run_case_study(const harness::ScenarioConfig& cfg,
                                       const TrainedModels& models);

void write_case_study_csv(const std::vector<MetricsRow>& rows, std::ostream& os);

/// Per-user federated clients sharing one initialization; emits the
/// round-0 (pre-training) evaluation followed by fl_rounds round records.
std::vector<federated::RoundRecord> run_fl_experiment(const harness::ScenarioConfig& cfg);

struct SchedulerRow {
    int instance = 0;
    double brute_utility = 0.0;
    double sequential_utility = 0.0;
    double gap_percent = 0.0;
    bool over_cap = false; // brute force refused; sequential-only row
};

std::vector<SchedulerRow> run_scheduler_experiment(const harness::ScenarioConfig& cfg);
void write_scheduler_csv(const std::vector<SchedulerRow>& rows, std::ostream& os);

struct OffloadEvalRow {
    int draw = 0;
    double learned_ms = 0.0;   // mean per-step encode latency under the policy
    double all_local_ms = 0.0; // static split L
    double all_edge_ms = 0.0;  // static split 0
};

struct OffloadExperiment {
    offload::QTable qtable;
    std::vector<OffloadEvalRow> rows;
};

/// Trains the split-point policy on the configured (drifting) environment,
/// then replays evaluation episodes where the greedy policy and the two
/// static extremes face identical condition sequences.
OffloadExperiment run_offload_experiment(const harness::ScenarioConfig& cfg);
void write_offload_csv(const std::vector<OffloadEvalRow>& rows, std::ostream& os);

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Deterministic standalone SVG line chart: fixed canvas, one polyline per
/// series, axis ticks and a legend.
void write_line_chart_svg(const std::vector<ChartSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::ostream& os);

/// Renders one of the known result CSVs (case study, federated losses,
/// scheduler gaps, offload evaluation) as a line chart; the schema is
/// recognized by its header row.
void plot_csv(std::istream& csv, const std::string& title, std::ostream& svg);

} // namespace semcom::experiments
