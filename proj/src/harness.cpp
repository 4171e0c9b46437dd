#include "semcom/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

namespace semcom::harness {

using nlohmann::json;

offload::EnvConfig default_offload_env() {
    offload::EnvConfig env;
    env.profile.input_bytes = 8000.0;
    env.profile.layers = {{200.0, 4000.0}, {400.0, 2000.0}, {800.0, 1000.0},
                          {1600.0, 400.0}, {3200.0, 150.0}, {6400.0, 30.0}};
    return env;
}

void ScenarioConfig::validate() const {
    if (seeds.empty()) {
        throw ValidationError("config needs a non-empty seeds list");
    }
    if (num_users < 1 || static_cast<int>(background_ids.size()) != num_users) {
        throw ValidationError("background_ids must list one background per user");
    }
    if (image_size < 8) {
        throw ValidationError("image_size must be at least 8");
    }
    if (box_count_min < 0 || box_count_max < box_count_min || box_count_max > k_max) {
        throw ValidationError("box count range must fit within [0, k_max]");
    }
    if (total_steps < 2 || beta_start <= 0.0 || beta_end >= 1.0 || beta_end < beta_start) {
        throw ValidationError("invalid diffusion schedule parameters");
    }
    if (train_steps < 0 || batch_size < 1 || learning_rate <= 0.0 || train_scenes < 1) {
        throw ValidationError("invalid training parameters");
    }
    for (int k : offload_options) {
        if (k < 0 || k > diffusion::kMaxOffloadSteps || k >= total_steps) {
            throw ValidationError("offload options must lie in [0, 650] and below T");
        }
    }
    if (fl_weighting != "uniform" && fl_weighting != "sample_size" &&
        fl_weighting != "adaptive_inverse_loss") {
        throw ValidationError("unknown fl_weighting mode: " + fl_weighting);
    }
    if (lambda < 0.0 || scheduler_instances < 0 || scheduler_users < 1) {
        throw ValidationError("invalid scheduler parameters");
    }
}

namespace {

// Rejects unknown keys so config typos fail loudly instead of silently
// running with defaults.
class KeyReader {
public:
    explicit KeyReader(const json& j) : j_(j) {}

    template <typename T>
    void read(const char* key, T& slot) {
        seen_.insert(key);
        if (j_.contains(key)) {
            slot = j_.at(key).get<T>();
        }
    }

    void allow(const char* key) { seen_.insert(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ValidationError("unknown config key: " + it.key());
            }
        }
    }

private:
    const json& j_;
    std::set<std::string> seen_;
};

} // namespace

ScenarioConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("config root must be a JSON object");
    }
    ScenarioConfig c;
    KeyReader r(j);
    r.read("seed", c.seed);
    r.read("seeds", c.seeds);
    r.read("num_users", c.num_users);
    r.read("background_ids", c.background_ids);
    r.read("image_size", c.image_size);
    r.read("box_count_min", c.box_count_min);
    r.read("box_count_max", c.box_count_max);
    r.read("box_intensity", c.box_intensity);
    r.read("contrast_threshold", c.contrast_threshold);
    r.read("total_steps", c.total_steps);
    r.read("beta_start", c.beta_start);
    r.read("beta_end", c.beta_end);
    r.read("k_max", c.k_max);
    r.read("hidden1", c.hidden1);
    r.read("hidden2", c.hidden2);
    r.read("train_steps", c.train_steps);
    r.read("batch_size", c.batch_size);
    r.read("learning_rate", c.learning_rate);
    r.read("train_scenes", c.train_scenes);
    r.read("snr_db", c.snr_db);
    r.read("offload_options", c.offload_options);
    r.read("fl_rounds", c.fl_rounds);
    r.read("fl_steps_per_round", c.fl_steps_per_round);
    r.read("fl_batch_size", c.fl_batch_size);
    r.read("fl_eval_scenes", c.fl_eval_scenes);
    r.read("fl_weighting", c.fl_weighting);
    r.read("fl_clip_norm", c.fl_clip_norm);
    r.read("lambda", c.lambda);
    r.read("batch_base_ms", c.batch_base_ms);
    r.read("batch_per_item_ms", c.batch_per_item_ms);
    r.read("local_per_step_ms", c.local_per_step_ms);
    r.read("edge_per_step_ms", c.edge_per_step_ms);
    r.read("scheduler_instances", c.scheduler_instances);
    r.read("scheduler_users", c.scheduler_users);
    r.read("offload_episodes", c.offload_episodes);
    r.read("offload_eval_draws", c.offload_eval_draws);
    r.read("offload_eval_steps", c.offload_eval_steps);
    r.read("checkpoint_dir", c.checkpoint_dir);
    r.read("train_if_missing", c.train_if_missing);

    // Offload environment block (nested object with its own defaults).
    r.allow("offload_env");
    if (j.contains("offload_env")) {
        const json& e = j.at("offload_env");
        KeyReader er(e);
        offload::EnvConfig& env = c.offload_env;
        er.read("input_bytes", env.profile.input_bytes);
        std::vector<double> flops, out_bytes;
        er.read("layer_flops", flops);
        er.read("layer_output_bytes", out_bytes);
        if (!flops.empty()) {
            if (flops.size() != out_bytes.size()) {
                throw ValidationError("layer_flops and layer_output_bytes lengths differ");
            }
            env.profile.layers.clear();
            for (size_t i = 0; i < flops.size(); ++i) {
                env.profile.layers.push_back({flops[i], out_bytes[i]});
            }
        }
        er.read("base_link_rate", env.base_link_rate);
        er.read("latency_scale", env.latency_scale);
        er.read("kappa", env.kappa);
        er.read("distortion_threshold", env.distortion_threshold);
        er.read("feature_dim", env.feature_dim);
        er.read("snr_levels", env.snr_levels);
        er.read("end_capacities", env.end_capacities);
        er.read("edge_capacities", env.edge_capacities);
        er.read("complexity_scales", env.complexity_scales);
        er.read("frozen", env.frozen);
        er.finish();
    }
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ValidationError("cannot open config file: " + path);
    }
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

Image background_texture(int background_id, int image_size) {
    if (background_id < 0) {
        throw ValidationError("background_id must be non-negative");
    }
    Image bg(image_size, image_size);
    const double lo = 0.05;
    const double hi = 0.35;
    const double span = hi - lo;
    const double denom = static_cast<double>(image_size - 1);
    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            double v = 0.0;
            switch (background_id % 3) {
                case 0: v = lo + span * (static_cast<double>(x) / denom); break;
                case 1: v = lo + span * (static_cast<double>(y) / denom); break;
                default:
                    v = lo + 0.5 * span * (1.0 + std::sin(2.0 * std::numbers::pi *
                                                          (x + 2.0 * y) / denom));
                    break;
            }
            bg.at(x, y) = v;
        }
    }
    return bg;
}

namespace {

struct PixelBox {
    int x0, y0, w, h; // inclusive origin, pixel extents

    bool overlaps_with_gap(const PixelBox& o) const {
        // Require at least one empty pixel between boxes.
        return x0 - 1 < o.x0 + o.w && o.x0 - 1 < x0 + w && y0 - 1 < o.y0 + o.h &&
               o.y0 - 1 < y0 + h;
    }
};

} // namespace

SyntheticScene generate_scene(std::mt19937_64& rng, int background_id, int image_size,
                              int box_count_min, int box_count_max, double box_intensity) {
    if (box_count_min < 0 || box_count_max < box_count_min) {
        throw ValidationError("invalid box count range");
    }
    SyntheticScene scene;
    scene.background_id = background_id;
    scene.image = background_texture(background_id, image_size);
    std::uniform_int_distribution<int> count_dist(box_count_min, box_count_max);
    const int count = count_dist(rng);

    std::vector<PixelBox> placed;
    for (int b = 0; b < count; ++b) {
        bool ok = false;
        for (int attempt = 0; attempt < 60 && !ok; ++attempt) {
            int max_side = 6;
            if (attempt >= 15) max_side = 5;
            if (attempt >= 30) max_side = 4;
            if (attempt >= 45) max_side = 3;
            std::uniform_int_distribution<int> side(3, max_side);
            PixelBox pb{};
            pb.w = side(rng);
            pb.h = side(rng);
            pb.x0 = std::uniform_int_distribution<int>(0, image_size - pb.w)(rng);
            pb.y0 = std::uniform_int_distribution<int>(0, image_size - pb.h)(rng);
            ok = true;
            for (const PixelBox& other : placed) {
                if (pb.overlaps_with_gap(other)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                placed.push_back(pb);
            }
        }
        if (!ok) {
            throw ValidationError("could not place a non-overlapping box after 60 attempts");
        }
    }

    for (const PixelBox& pb : placed) {
        codec::BoundingBox box;
        box.x_min = static_cast<double>(pb.x0) / image_size;
        box.y_min = static_cast<double>(pb.y0) / image_size;
        box.x_max = static_cast<double>(pb.x0 + pb.w) / image_size;
        box.y_max = static_cast<double>(pb.y0 + pb.h) / image_size;
        scene.semantics.boxes.push_back(box);
    }
    std::sort(scene.semantics.boxes.begin(), scene.semantics.boxes.end(),
              [](const codec::BoundingBox& a, const codec::BoundingBox& b) {
                  if (a.y_min != b.y_min) return a.y_min < b.y_min;
                  return a.x_min < b.x_min;
              });
    for (const PixelBox& pb : placed) {
        for (int y = pb.y0; y < pb.y0 + pb.h; ++y) {
            for (int x = pb.x0; x < pb.x0 + pb.w; ++x) {
                scene.image.at(x, y) = box_intensity;
            }
        }
    }
    return scene;
}

Image render_scene(const codec::SceneSemantics& semantics, int background_id, int image_size,
                   double box_intensity) {
    Image img = background_texture(background_id, image_size);
    for (const codec::BoundingBox& b : semantics.boxes) {
        b.validate();
        const int x0 = static_cast<int>(std::lround(b.x_min * image_size));
        const int y0 = static_cast<int>(std::lround(b.y_min * image_size));
        const int x1 = static_cast<int>(std::lround(b.x_max * image_size));
        const int y1 = static_cast<int>(std::lround(b.y_max * image_size));
        for (int y = std::max(0, y0); y < std::min(image_size, y1); ++y) {
            for (int x = std::max(0, x0); x < std::min(image_size, x1); ++x) {
                img.at(x, y) = box_intensity;
            }
        }
    }
    return img;
}

std::vector<codec::BoundingBox> detect_boxes(const Image& image, int background_id,
                                             double contrast_threshold) {
    const Image bg = background_texture(background_id, image.width);
    if (!image.same_shape(bg)) {
        throw ValidationError("detector expects a square image matching the background");
    }
    BinaryMask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            mask.at(x, y) = image.at(x, y) - bg.at(x, y) >= contrast_threshold ? 1 : 0;
        }
    }
    return codec::mask_to_boxes(mask);
}

double iou_mean(const std::vector<codec::BoundingBox>& expected,
                const std::vector<codec::BoundingBox>& detected) {
    if (expected.empty() && detected.empty()) {
        return 1.0;
    }
    std::vector<bool> used_e(expected.size(), false);
    std::vector<bool> used_d(detected.size(), false);
    double total = 0.0;
    while (true) {
        double best = 0.0;
        size_t bi = 0, bj = 0;
        bool found = false;
        for (size_t i = 0; i < expected.size(); ++i) {
            if (used_e[i]) continue;
            for (size_t j = 0; j < detected.size(); ++j) {
                if (used_d[j]) continue;
                const double v = codec::iou(expected[i], detected[j]);
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found) {
            break;
        }
        used_e[bi] = true;
        used_d[bj] = true;
        total += best;
    }
    return total / static_cast<double>(std::max(expected.size(), detected.size()));
}

double psnr_db(const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        throw ValidationError("PSNR requires images of identical shape");
    }
    double mse = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.pixels.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

std::vector<diffusion::TrainExample> make_dataset(uint64_t seed, int background_id,
                                                  int scenes, const ScenarioConfig& cfg) {
    std::vector<diffusion::TrainExample> out;
    out.reserve(static_cast<size_t>(scenes));
    for (int i = 0; i < scenes; ++i) {
        auto rng = make_rng(seed, (static_cast<uint64_t>(background_id) << 32) |
                                      static_cast<uint64_t>(i));
        SyntheticScene s = generate_scene(rng, background_id, cfg.image_size,
                                          cfg.box_count_min, cfg.box_count_max,
                                          cfg.box_intensity);
        diffusion::TrainExample ex;
        ex.x0 = std::move(s.image);
        ex.cond = diffusion::Conditioning::from_boxes(s.semantics.boxes, cfg.k_max);
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<diffusion::TrainExample> make_mixed_dataset(uint64_t seed,
                                                        const std::vector<int>& background_ids,
                                                        int scenes_per_background,
                                                        const ScenarioConfig& cfg) {
    std::vector<diffusion::TrainExample> out;
    for (int bg : background_ids) {
        auto part = make_dataset(seed, bg, scenes_per_background, cfg);
        for (auto& ex : part) {
            out.push_back(std::move(ex));
        }
    }
    return out;
}

} // namespace semcom::harness
