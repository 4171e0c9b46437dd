#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <doctest.h>
#include <json.hpp>

#include "semcom/errors.hpp"
#include "semcom/harness.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using namespace semcom::harness;

TEST_CASE("background textures are deterministic and stay in range") {
    const Image a = background_texture(0, 16);
    const Image b = background_texture(0, 16);
    CHECK(a.pixels == b.pixels);
    for (int id : {0, 1, 2, 3, 7}) {
        const Image t = background_texture(id, 16);
        for (double v : t.pixels) {
            CHECK(v >= 0.05);
            CHECK(v <= 0.35);
        }
    }
    CHECK(background_texture(0, 16).pixels != background_texture(1, 16).pixels);
    CHECK_THROWS_AS(background_texture(-1, 16), ValidationError);
}

TEST_CASE("generated scenes hold disjoint pixel-aligned boxes") {
    auto rng = make_rng(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const SyntheticScene scene = generate_scene(rng, trial % 3, 16, 1, 3);
        const auto& boxes = scene.semantics.boxes;
        REQUIRE(boxes.size() >= 1);
        REQUIRE(boxes.size() <= 3);
        for (const auto& b : boxes) {
            b.validate();
            for (double c : {b.x_min, b.y_min, b.x_max, b.y_max}) {
                CHECK(std::abs(c * 16.0 - std::round(c * 16.0)) < 1e-12);
            }
            const double side_x = (b.x_max - b.x_min) * 16.0;
            CHECK(side_x >= 3.0 - 1e-12);
            CHECK(side_x <= 6.0 + 1e-12);
        }
        for (size_t i = 0; i < boxes.size(); ++i) {
            for (size_t j = i + 1; j < boxes.size(); ++j) {
                CHECK(codec::iou(boxes[i], boxes[j]) == 0.0);
            }
        }
        // Boxes are listed in reading order.
        for (size_t i = 1; i < boxes.size(); ++i) {
            const bool ordered = boxes[i - 1].y_min < boxes[i].y_min ||
                                 (boxes[i - 1].y_min == boxes[i].y_min &&
                                  boxes[i - 1].x_min <= boxes[i].x_min);
            CHECK(ordered);
        }
        CHECK(scene.image.pixels ==
              render_scene(scene.semantics, scene.background_id, 16).pixels);
    }
}

TEST_CASE("the detector closes the loop on clean renders") {
    auto rng = make_rng(32, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const SyntheticScene scene = generate_scene(rng, trial % 3, 16, 1, 3);
        const auto detected = detect_boxes(scene.image, scene.background_id, 0.35);
        REQUIRE(detected.size() == scene.semantics.boxes.size());
        CHECK(iou_mean(scene.semantics.boxes, detected) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(detect_boxes(background_texture(1, 16), 1, 0.35).empty());
}

TEST_CASE("iou_mean penalizes count mismatches") {
    const codec::BoundingBox a{0.0, 0.0, 0.25, 0.25};
    const codec::BoundingBox far{0.5, 0.5, 0.75, 0.75};
    CHECK(iou_mean({}, {}) == 1.0);
    CHECK(iou_mean({a}, {}) == 0.0);
    CHECK(iou_mean({}, {a}) == 0.0);
    CHECK(iou_mean({a}, {a}) == 1.0);
    CHECK(iou_mean({a}, {a, far}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(iou_mean({a, far}, {far, a}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psnr matches the closed form") {
    const Image a(8, 8, 0.2);
    CHECK(psnr_db(a, a) == std::numeric_limits<double>::infinity());
    const Image b(8, 8, 0.3);
    CHECK(psnr_db(a, b) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(psnr_db(a, Image(4, 4)), ValidationError);
}

TEST_CASE("datasets derive from seeds, not iteration order") {
    ScenarioConfig cfg;
    cfg.train_scenes = 6;
    const auto d1 = make_dataset(5, 1, 6, cfg);
    const auto d2 = make_dataset(5, 1, 6, cfg);
    REQUIRE(d1.size() == 6);
    for (size_t i = 0; i < d1.size(); ++i) {
        CHECK(d1[i].x0.pixels == d2[i].x0.pixels);
        CHECK(d1[i].cond.values == d2[i].cond.values);
    }
    // A prefix of a larger dataset is the dataset of fewer scenes.
    const auto d3 = make_dataset(5, 1, 3, cfg);
    for (size_t i = 0; i < d3.size(); ++i) {
        CHECK(d3[i].x0.pixels == d1[i].x0.pixels);
    }
    const auto other_bg = make_dataset(5, 2, 6, cfg);
    CHECK(other_bg[0].x0.pixels != d1[0].x0.pixels);

    const auto mixed = make_mixed_dataset(5, {0, 1, 2}, 4, cfg);
    CHECK(mixed.size() == 12);

    // Conditioning slots carry what a receiver would decode from the bits.
    for (const auto& ex : d1) {
        const auto& v = ex.cond.values;
        for (size_t slot = 0; slot < static_cast<size_t>(cfg.k_max); ++slot) {
            const double flag = v[slot * 5 + 4];
            CHECK((flag == 0.0 || flag == 1.0));
            if (flag == 1.0) {
                for (int c = 0; c < 4; ++c) {
                    const double coord = v[slot * 5 + static_cast<size_t>(c)];
                    const double cell = coord / codec::kResolution - 0.5;
                    CHECK(std::abs(cell - std::round(cell)) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("config parsing keeps defaults and rejects unknown keys") {
    const nlohmann::json j = {{"seed", 9},
                              {"train_steps", 50},
                              {"fl_weighting", "sample_size"},
                              {"offload_env", {{"base_link_rate", 80.0}}}};
    const ScenarioConfig cfg = config_from_json(j);
    CHECK(cfg.seed == 9);
    CHECK(cfg.train_steps == 50);
    CHECK(cfg.fl_weighting == "sample_size");
    CHECK(cfg.offload_env.base_link_rate == 80.0);
    CHECK(cfg.image_size == 16);
    CHECK(cfg.num_users == 3);
    CHECK(cfg.offload_env.profile.num_layers() == 6);

    CHECK_THROWS_AS(config_from_json({{"train_stepz", 50}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"offload_env", {{"kappa2", 1.0}}}}),
                    ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"num_users", 2}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"fl_weighting", "mean"}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"offload_options", {700}}}), ValidationError);
}

TEST_CASE("config files load through the same validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "semcom_cfg_test";
    fs::create_directories(dir);
    const fs::path good = dir / "good.json";
    {
        std::ofstream f(good);
        f << R"({"seed": 3, "scheduler_instances": 7})";
    }
    const ScenarioConfig cfg = load_config(good.string());
    CHECK(cfg.seed == 3);
    CHECK(cfg.scheduler_instances == 7);

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream f(bad);
        f << "{not json";
    }
    CHECK_THROWS_AS(load_config(bad.string()), ValidationError);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("the demo encoder profile narrows features while compute grows") {
    const offload::EnvConfig env = default_offload_env();
    CHECK_NOTHROW(env.validate());
    REQUIRE(env.profile.num_layers() == 6);
    for (int l = 1; l < env.profile.num_layers(); ++l) {
        CHECK(env.profile.layers[static_cast<size_t>(l)].flops >
              env.profile.layers[static_cast<size_t>(l - 1)].flops);
        CHECK(env.profile.layers[static_cast<size_t>(l)].output_bytes <
              env.profile.layers[static_cast<size_t>(l - 1)].output_bytes);
    }
}
