#pragma once

// Scenario configuration, synthetic scene generation (the stand-in for
// traffic footage: textured backgrounds with bright rectangles), the
// threshold detector closing the semantic loop, and the evaluation
// metrics.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcom/codec.hpp"
#include "semcom/diffusion.hpp"
#include "semcom/image.hpp"
#include "semcom/offload.hpp"
#include "semcom/scheduler.hpp"

namespace semcom::harness {

/// Six-layer demo encoder for the split-point environment: feature sizes
/// shrink layer by layer while per-layer compute grows, so the best split
/// moves with channel and device conditions.
offload::EnvConfig default_offload_env();

struct ScenarioConfig {
    // Experiment identity
    uint64_t seed = 1;                      // master seed (train/scheduler/offload)
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; // case-study grid

    // Scene synthesis
    int num_users = 3;
    std::vector<int> background_ids = {0, 1, 2}; // one per user
    int image_size = 16;
    int box_count_min = 1;
    int box_count_max = 3;
    double box_intensity = 0.9;
    double contrast_threshold = 0.35;

    // Diffusion / training
    int total_steps = 1000; // schedule T
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int k_max = 4;
    int hidden1 = 96;
    int hidden2 = 96;
    int train_steps = 2000;
    int batch_size = 16;
    double learning_rate = 0.1;
    int train_scenes = 48; // dataset size per background

    // Case study
    std::vector<double> snr_db = {0.0, 10.0, 20.0};
    std::vector<int> offload_options = {0, 350, 650};

    // Federated training
    int fl_rounds = 30;
    int fl_steps_per_round = 40;
    int fl_batch_size = 8;
    int fl_eval_scenes = 12;
    std::string fl_weighting = "uniform"; // uniform | sample_size | adaptive_inverse_loss
    double fl_clip_norm = 0.0;            // 0 disables clipping

    // Scheduler
    double lambda = 2e-4;
    double batch_base_ms = 10.0;
    double batch_per_item_ms = 2.0;
    double local_per_step_ms = 1.0;
    double edge_per_step_ms = 0.2;
    int scheduler_instances = 100;
    int scheduler_users = 3;

    // Encoder offloading
    offload::EnvConfig offload_env = default_offload_env();
    int offload_episodes = 400;
    int offload_eval_draws = 20;
    int offload_eval_steps = 40;

    // Model storage
    std::string checkpoint_dir;
    bool train_if_missing = true;

    void validate() const;
};

/// Reads a JSON document; keys not present keep their defaults. Unknown
/// keys are rejected to catch typos.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const nlohmann::json& j);

struct SyntheticScene {
    Image image;
    codec::SceneSemantics semantics;
    int background_id = 0;
};

/// Deterministic per-background texture, values within [0.05, 0.35].
Image background_texture(int background_id, int image_size);

/// Draws box_count (uniform in the configured range) non-overlapping
/// pixel-aligned rectangles of 3..6 px a side at the configured intensity
/// over the background. Box coordinates are recorded normalized, so they
/// are exact multiples of 1/image_size.
SyntheticScene generate_scene(std::mt19937_64& rng, int background_id, int image_size,
                              int box_count_min, int box_count_max,
                              double box_intensity = 0.9);

/// Renders semantics onto the background (the ground-truth image a perfect
/// decoder would produce).
Image render_scene(const codec::SceneSemantics& semantics, int background_id, int image_size,
                   double box_intensity = 0.9);

/// Subtracts the known background texture, thresholds the difference and
/// extracts one box per connected component.
std::vector<codec::BoundingBox> detect_boxes(const Image& image, int background_id,
                                             double contrast_threshold);

/// Greedy best-pair IoU matching; the sum of matched IoUs is divided by
/// max(#expected, #detected). Two empty sets score 1.
double iou_mean(const std::vector<codec::BoundingBox>& expected,
                const std::vector<codec::BoundingBox>& detected);

/// Peak signal-to-noise ratio with MAX = 1; +inf for identical images.
double psnr_db(const Image& a, const Image& b);

/// Per-background training sets: x0 = rendered scene, conditioning = the
/// quantized boxes. Scene i of background b draws from a seed derived from
/// (seed, b, i), so datasets are independent of iteration order.
std::vector<diffusion::TrainExample> make_dataset(uint64_t seed, int background_id,
                                                  int scenes, const ScenarioConfig& cfg);

/// Mixed-background held-out set for federated evaluation.
std::vector<diffusion::TrainExample> make_mixed_dataset(uint64_t seed,
                                                        const std::vector<int>& background_ids,
                                                        int scenes_per_background,
                                                        const ScenarioConfig& cfg);

} // namespace semcom::harness
