#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <doctest.h>

#include "semcom/channel.hpp"
#include "semcom/diffusion.hpp"
#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using namespace semcom::diffusion;

namespace {

DenoiserArch small_arch() {
    DenoiserArch a;
    a.image_w = 8;
    a.image_h = 8;
    a.k_max = 2;
    a.hidden1 = 32;
    a.hidden2 = 32;
    return a;
}

double max_abs_diff(const Image& a, const Image& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
    }
    return m;
}

std::vector<TrainExample> zero_image_batch(const DenoiserArch& arch, int n) {
    std::vector<TrainExample> batch;
    for (int i = 0; i < n; ++i) {
        batch.push_back({Image(arch.image_w, arch.image_h, 0.0), Conditioning::zeros(arch.k_max)});
    }
    return batch;
}

} // namespace

TEST_CASE("linear schedule hits its endpoints and stays monotone") {
    const NoiseSchedule s = make_schedule();
    REQUIRE(s.T == 1000);
    CHECK(s.beta(1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta(1000) == doctest::Approx(0.02).epsilon(1e-15));
    for (int t = 2; t <= s.T; ++t) {
        CHECK(s.beta(t) > s.beta(t - 1));
        CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    }
    CHECK(s.alpha_bar(0) == 1.0);
}

TEST_CASE("alpha_bar is the exact running product of alphas") {
    const NoiseSchedule s = make_schedule(500, 2e-4, 0.015);
    double prod = 1.0;
    for (int t = 1; t <= s.T; ++t) {
        CHECK(s.alpha(t) == 1.0 - s.beta(t));
        prod *= s.alpha(t);
        CHECK(s.alpha_bar(t) == prod);
    }
}

TEST_CASE("forward_diffuse applies the closed-form marginal") {
    const NoiseSchedule s = make_schedule();
    Image x0(2, 2);
    x0.pixels = {0.1, 0.5, -0.3, 1.0};
    Image eps(2, 2);
    eps.pixels = {1.0, -2.0, 0.5, 0.0};
    const int t = 333;
    const Image xt = forward_diffuse(x0, t, eps, s);
    const double a = std::sqrt(s.alpha_bar(t));
    const double b = std::sqrt(1.0 - s.alpha_bar(t));
    for (size_t i = 0; i < 4; ++i) {
        CHECK(xt.pixels[i] ==
              doctest::Approx(a * x0.pixels[i] + b * eps.pixels[i]).epsilon(1e-14));
    }
}

TEST_CASE("forward marginal variance matches abar*Var(x0) + (1 - abar)") {
    const NoiseSchedule s = make_schedule();
    auto rng = make_rng(21, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution sign(0.5);
    const int t = 400;
    const int n = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        Image x0(1, 1, sign(rng) ? 2.0 : -2.0);
        Image eps(1, 1, normal(rng));
        const double v = forward_diffuse(x0, t, eps, s).pixels[0];
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double expected = 4.0 * s.alpha_bar(t) + (1.0 - s.alpha_bar(t));
    CHECK(var == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("parameter layout is contiguous and ordered") {
    const DenoiserArch a = small_arch();
    const ParamLayout l = layout_of(a);
    const size_t in = static_cast<size_t>(a.input_dim());
    const size_t h1 = static_cast<size_t>(a.hidden1);
    const size_t h2 = static_cast<size_t>(a.hidden2);
    const size_t out = static_cast<size_t>(a.image_dim());
    CHECK(l.w1 == 0);
    CHECK(l.b1 == l.w1 + h1 * in);
    CHECK(l.w2 == l.b1 + h1);
    CHECK(l.b2 == l.w2 + h2 * h1);
    CHECK(l.w3 == l.b2 + h2);
    CHECK(l.b3 == l.w3 + out * h2);
    CHECK(l.s == l.b3 + out);
    CHECK(l.a == l.s + out * out);
    CHECK(l.u == l.a + static_cast<size_t>(a.embed_dim));
    CHECK(l.v == l.u + out * static_cast<size_t>(a.cond_dim() + 1));
    CHECK(l.b == l.v + out);
    CHECK(l.total == l.b + static_cast<size_t>(a.embed_dim));
    CHECK(l.total == a.param_count());
}

TEST_CASE("conditioning slots hold dequantized coordinates plus a flag") {
    std::vector<codec::BoundingBox> boxes = {{0.25, 0.25, 0.5, 0.75}};
    const Conditioning c = Conditioning::from_boxes(boxes, 3);
    REQUIRE(c.values.size() == 15);
    const codec::BoundingBox d = codec::dequantize_box(codec::quantize_box(boxes[0]));
    CHECK(c.values[0] == d.x_min);
    CHECK(c.values[1] == d.y_min);
    CHECK(c.values[2] == d.x_max);
    CHECK(c.values[3] == d.y_max);
    CHECK(c.values[4] == 1.0);
    for (size_t i = 5; i < 15; ++i) CHECK(c.values[i] == 0.0);

    CHECK(Conditioning::zeros(4).values == std::vector<double>(20, 0.0));
    std::vector<codec::BoundingBox> too_many(4, boxes[0]);
    CHECK_THROWS_AS(Conditioning::from_boxes(too_many, 3), ValidationError);
}

TEST_CASE("default and randomly initialized models predict zero noise") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    Workspace ws;
    ws.resize(a);
    std::vector<double> x(static_cast<size_t>(a.image_dim()));
    for (size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>(i) - 2.0;
    std::vector<double> eps(x.size(), 7.0);

    std::vector<codec::BoundingBox> boxes = {{0.1, 0.1, 0.5, 0.5}};
    const Conditioning cond = Conditioning::from_boxes(boxes, a.k_max);
    for (const DenoiserModel& m :
         {DenoiserModel(a), DenoiserModel::random_init(a, 77)}) {
        m.predict(x, 512, s, cond, eps, ws);
        for (double v : eps) CHECK(v == 0.0);
    }

    const DenoiserModel r = DenoiserModel::random_init(a, 77);
    double wnorm = 0.0;
    for (size_t i = layout_of(a).w1; i < layout_of(a).b1; ++i) {
        wnorm += r.params()[i] * r.params()[i];
    }
    CHECK(wnorm > 0.0);
}

TEST_CASE("an all-zero predictor scores loss 1 on unit noise") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel zero(a);
    const auto batch = zero_image_batch(a, 64);
    Workspace ws;
    ws.resize(a);
    auto rng = make_rng(5, 0);
    const double loss = eval_loss(zero, batch, s, rng, TrainConfig{}, ws);
    CHECK(loss == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("a scaled skip reproduces the noise exactly at a fixed timestep") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const int t = 600;
    DenoiserModel m(a);
    const ParamLayout l = layout_of(a);
    const double c = 1.0 / std::sqrt(1.0 - s.alpha_bar(t));
    const size_t dim = static_cast<size_t>(a.image_dim());
    for (size_t i = 0; i < dim; ++i) {
        m.params()[l.s + i * dim + i] = c;
    }
    const auto batch = zero_image_batch(a, 16);
    Workspace ws;
    ws.resize(a);
    auto rng = make_rng(5, 1);
    TrainConfig cfg;
    cfg.t_min = t;
    cfg.t_max = t;
    const double loss = eval_loss(m, batch, s, rng, cfg, ws);
    CHECK(loss <= 1e-18);
}

TEST_CASE("train_step reduces the loss on a small conditioned dataset") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    std::vector<TrainExample> data;
    for (int i = 0; i < 8; ++i) {
        Image x0(a.image_w, a.image_h, 0.1);
        const int x_lo = i % 4, y_lo = i / 4 + 1;
        for (int y = y_lo; y < y_lo + 3; ++y) {
            for (int x = x_lo; x < x_lo + 3; ++x) {
                x0.at(x, y) = 0.9;
            }
        }
        std::vector<codec::BoundingBox> boxes = {{x_lo / 8.0, y_lo / 8.0,
                                                  (x_lo + 3) / 8.0, (y_lo + 3) / 8.0}};
        data.push_back({x0, Conditioning::from_boxes(boxes, a.k_max)});
    }
    DenoiserModel m = DenoiserModel::random_init(a, 3);
    Workspace ws;
    ws.resize(a);
    TrainConfig cfg;
    cfg.lr = 0.05;

    auto eval_rng = make_rng(5, 2);
    const double before = eval_loss(m, data, s, eval_rng, cfg, ws);
    auto rng = make_rng(5, 3);
    for (int step = 0; step < 400; ++step) {
        train_step(m, data, s, rng, cfg, ws);
    }
    eval_rng = make_rng(5, 2);
    const double after = eval_loss(m, data, s, eval_rng, cfg, ws);
    CHECK(before == doctest::Approx(1.0).epsilon(0.2));
    CHECK(after < 0.5 * before);
}

TEST_CASE("non-finite training loss raises DivergenceError") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    DenoiserModel m(a);
    for (double& p : m.params()) p = 1e200;
    const auto batch = zero_image_batch(a, 4);
    Workspace ws;
    ws.resize(a);
    auto rng = make_rng(5, 4);
    CHECK_THROWS_AS(train_step(m, batch, s, rng, TrainConfig{}, ws), DivergenceError);
}

TEST_CASE("reverse_step at t=1 is deterministic and matches the posterior mean") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel zero(a);
    Image x(a.image_w, a.image_h);
    for (size_t i = 0; i < x.size(); ++i) x.pixels[i] = 0.01 * static_cast<double>(i) - 0.3;
    auto rng = make_rng(5, 5);
    const Image out = reverse_step(zero, x, 1, Conditioning::zeros(a.k_max), rng, s);
    const double inv = 1.0 / std::sqrt(s.alpha(1));
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(out.pixels[i] == doctest::Approx(x.pixels[i] * inv).epsilon(1e-13));
    }
}

TEST_CASE("reverse_step injects variance beta_t for t > 1") {
    DenoiserArch a = small_arch();
    a.image_w = 2;
    a.image_h = 2;
    const NoiseSchedule s = make_schedule();
    const DenoiserModel zero(a);
    const Image x(2, 2, 0.5);
    const int t = 500;
    auto rng = make_rng(5, 6);
    double sum = 0.0, sumsq = 0.0;
    const int draws = 4000;
    for (int i = 0; i < draws; ++i) {
        const Image out = reverse_step(zero, x, t, Conditioning::zeros(a.k_max), rng, s);
        for (double v : out.pixels) {
            sum += v;
            sumsq += v * v;
        }
    }
    const double n = 4.0 * draws;
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5 / std::sqrt(s.alpha(t))).epsilon(1e-3));
    CHECK(var == doctest::Approx(s.beta(t)).epsilon(0.05));
}

TEST_CASE("sampling is reproducible from the seed") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel m = DenoiserModel::random_init(a, 11);
    const Conditioning cond = Conditioning::zeros(a.k_max);
    const Image s1 = sample(m, cond, 123, s);
    const Image s2 = sample(m, cond, 123, s);
    CHECK(max_abs_diff(s1, s2) == 0.0);
    const Image s3 = sample(m, cond, 124, s);
    CHECK(max_abs_diff(s1, s3) > 0.0);
}

TEST_CASE("split sampling composes to the full chain without a channel") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel m = DenoiserModel::random_init(a, 19);
    std::vector<codec::BoundingBox> boxes = {{0.25, 0.25, 0.625, 0.75}};
    const Conditioning cond = Conditioning::from_boxes(boxes, a.k_max);
    const Image full = sample(m, cond, 321, s);
    for (int k : {0, 350, 650}) {
        const Image split = split_sample(m, m, cond, SplitPlan{k}, 321, s);
        CHECK(max_abs_diff(full, split) <= 1e-12);
    }
}

TEST_CASE("an infinite-SNR channel hop leaves split sampling unchanged") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel m = DenoiserModel::random_init(a, 23);
    const Conditioning cond = Conditioning::zeros(a.k_max);
    const Image plain = split_sample(m, m, cond, SplitPlan{350}, 55, s);
    channel::ChannelConfig ch;
    ch.seed = 99;
    const Image hopped = split_sample(m, m, cond, SplitPlan{350}, 55, s, ch);
    CHECK(max_abs_diff(plain, hopped) <= 1e-12);
}

TEST_CASE("a noisy channel hop changes the outcome and stays finite") {
    const DenoiserArch a = small_arch();
    const NoiseSchedule s = make_schedule();
    const DenoiserModel m = DenoiserModel::random_init(a, 23);
    const Conditioning cond = Conditioning::zeros(a.k_max);
    const Image plain = split_sample(m, m, cond, SplitPlan{350}, 55, s);
    channel::ChannelConfig ch;
    ch.snr_db = 0.0;
    ch.seed = 99;
    const Image noisy = split_sample(m, m, cond, SplitPlan{350}, 55, s, ch);
    CHECK(max_abs_diff(plain, noisy) > 0.0);
    for (double v : noisy.pixels) CHECK(std::isfinite(v));
}

TEST_CASE("split plans outside [0, min(650, T)] are rejected") {
    CHECK_THROWS_AS(SplitPlan{-1}.validate(1000), ValidationError);
    CHECK_THROWS_AS(SplitPlan{651}.validate(1000), ValidationError);
    CHECK_THROWS_AS(SplitPlan{500}.validate(400), ValidationError);
    CHECK_NOTHROW(SplitPlan{650}.validate(1000));
    CHECK_NOTHROW(SplitPlan{0}.validate(1000));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const DenoiserArch a = small_arch();
    DenoiserModel m = DenoiserModel::random_init(a, 31);
    m.params()[7] = -0.123456789123456789;

    const fs::path dir = fs::temp_directory_path() / "semcom_ckpt_test";
    fs::create_directories(dir);
    const std::string path = (dir / "model.bin").string();
    save_checkpoint(m, path);
    const DenoiserModel loaded = load_checkpoint(path);
    CHECK(loaded.arch() == a);
    CHECK(loaded.params() == m.params());

    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.bin").string()), ValidationError);
    fs::remove_all(dir);
}
