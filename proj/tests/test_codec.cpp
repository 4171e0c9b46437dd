#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "semcom/codec.hpp"
#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using namespace semcom::codec;

namespace {

BoundingBox box(double x0, double y0, double x1, double y1) {
    return BoundingBox{x0, y0, x1, y1};
}

// Independent component labeling: BFS flood fill over the 4-neighborhood,
// tracking tight pixel bounds per component.
std::vector<BoundingBox> flood_fill_boxes(const BinaryMask& mask) {
    std::vector<uint8_t> seen(mask.cells.size(), 0);
    std::vector<BoundingBox> out;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const size_t idx = static_cast<size_t>(y) * mask.width + x;
            if (!mask.cells[idx] || seen[idx]) continue;
            int lo_x = x, hi_x = x, lo_y = y, hi_y = y;
            std::vector<std::pair<int, int>> stack{{x, y}};
            seen[idx] = 1;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                lo_x = std::min(lo_x, cx);
                hi_x = std::max(hi_x, cx);
                lo_y = std::min(lo_y, cy);
                hi_y = std::max(hi_y, cy);
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= mask.width || ny[k] < 0 || ny[k] >= mask.height)
                        continue;
                    const size_t nidx = static_cast<size_t>(ny[k]) * mask.width + nx[k];
                    if (!mask.cells[nidx] || seen[nidx]) continue;
                    seen[nidx] = 1;
                    stack.emplace_back(nx[k], ny[k]);
                }
            }
            out.push_back(BoundingBox{static_cast<double>(lo_x) / mask.width,
                                      static_cast<double>(lo_y) / mask.height,
                                      static_cast<double>(hi_x + 1) / mask.width,
                                      static_cast<double>(hi_y + 1) / mask.height});
        }
    }
    std::sort(out.begin(), out.end(), [](const BoundingBox& a, const BoundingBox& b) {
        return a.y_min != b.y_min ? a.y_min < b.y_min : a.x_min < b.x_min;
    });
    return out;
}

} // namespace

TEST_CASE("quantize_box maps coordinates to 5-bit cell indices") {
    const QuantizedBox q = quantize_box(box(0.0, 0.25, 0.5, 1.0));
    CHECK(q.idx[0] == 0);
    CHECK(q.idx[1] == 8);
    CHECK(q.idx[2] == 16);
    CHECK(q.idx[3] == 31); // floor(1.0 / res) = 32 clamps to the top cell
}

TEST_CASE("dequantize_box returns cell midpoints") {
    QuantizedBox q;
    q.idx = {0, 8, 16, 31};
    const BoundingBox b = dequantize_box(q);
    CHECK(b.x_min == doctest::Approx(0.015625).epsilon(1e-15));
    CHECK(b.y_min == doctest::Approx(0.265625).epsilon(1e-15));
    CHECK(b.x_max == doctest::Approx(0.515625).epsilon(1e-15));
    CHECK(b.y_max == doctest::Approx(0.984375).epsilon(1e-15));
}

TEST_CASE("quantization round trip stays within half a cell") {
    auto rng = make_rng(42, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double c[4] = {u(rng), u(rng), u(rng), u(rng)};
        std::sort(c, c + 4);
        if (c[0] == c[2] || c[1] == c[3]) continue;
        const BoundingBox b = box(c[0], c[1], c[2], c[3]);
        const BoundingBox r = dequantize_box(quantize_box(b));
        CHECK(std::abs(r.x_min - b.x_min) <= 0.015625);
        CHECK(std::abs(r.y_min - b.y_min) <= 0.015625);
        CHECK(std::abs(r.x_max - b.x_max) <= 0.015625);
        CHECK(std::abs(r.y_max - b.y_max) <= 0.015625);
    }
}

TEST_CASE("degenerate and out-of-range boxes are rejected") {
    CHECK_THROWS_AS(box(0.2, 0.2, 0.2, 0.5).validate(), ValidationError);
    CHECK_THROWS_AS(box(0.2, 0.2, 1.2, 0.5).validate(), ValidationError);
    CHECK_THROWS_AS(box(-0.1, 0.2, 0.4, 0.5).validate(), ValidationError);
    CHECK_NOTHROW(box(0.0, 0.0, 1.0, 1.0).validate());
}

TEST_CASE("encode_scene emits 20 bits per box, MSB first") {
    SceneSemantics s;
    s.scene_id = "t";
    s.boxes.push_back(box(0.0, 0.0, 0.5, 0.5)); // indices 0, 0, 16, 16

    const BitString bits = encode_scene(s);
    REQUIRE(bits.size() == 20);
    const uint8_t expected[20] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                  1, 0, 0, 0, 0, 1, 0, 0, 0, 0};
    for (size_t i = 0; i < 20; ++i) {
        CHECK(bits[i] == expected[i]);
    }

    s.boxes.push_back(box(0.25, 0.25, 0.75, 0.75));
    CHECK(encode_scene(s).size() == 40);
    CHECK(encode_scene(SceneSemantics{"empty", {}}).size() == 0);
}

TEST_CASE("decode_scene inverts encode_scene up to quantization") {
    SceneSemantics s;
    s.scene_id = "rt";
    s.boxes.push_back(box(0.125, 0.0625, 0.875, 0.9375));
    s.boxes.push_back(box(0.33, 0.41, 0.52, 0.77));

    const SceneSemantics d = decode_scene(encode_scene(s), "rt");
    REQUIRE(d.boxes.size() == s.boxes.size());
    CHECK(d.scene_id == "rt");
    for (size_t i = 0; i < s.boxes.size(); ++i) {
        const BoundingBox e = dequantize_box(quantize_box(s.boxes[i]));
        CHECK(d.boxes[i].x_min == e.x_min);
        CHECK(d.boxes[i].y_min == e.y_min);
        CHECK(d.boxes[i].x_max == e.x_max);
        CHECK(d.boxes[i].y_max == e.y_max);
    }

    BitString bad;
    for (int i = 0; i < 21; ++i) bad.push_back(false);
    CHECK_THROWS_AS(decode_scene(bad, "bad"), ValidationError);
}

TEST_CASE("BitString byte serialization round-trips with padding") {
    BitString bits;
    for (int i = 0; i < 21; ++i) bits.push_back(i % 3 == 0);
    const std::vector<uint8_t> bytes = bits.to_bytes();
    CHECK(bytes.size() == 3);
    CHECK(BitString::from_bytes(bytes, 21) == bits);
    CHECK_THROWS_AS(BitString::from_bytes(bytes, 25), ValidationError);
}

TEST_CASE("iou matches hand-computed overlaps") {
    const BoundingBox a = box(0.0, 0.0, 0.2, 0.2);
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(iou(a, box(0.5, 0.5, 0.7, 0.7)) == 0.0);
    // intersection 0.01, union 0.07
    CHECK(iou(a, box(0.1, 0.1, 0.3, 0.3)) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    // shared edge only
    CHECK(iou(a, box(0.2, 0.0, 0.4, 0.2)) == 0.0);
}

TEST_CASE("mask_to_boxes hand fixtures") {
    BinaryMask empty(8, 8);
    CHECK(mask_to_boxes(empty).empty());

    BinaryMask full(4, 4);
    std::fill(full.cells.begin(), full.cells.end(), 1);
    const auto one = mask_to_boxes(full);
    REQUIRE(one.size() == 1);
    CHECK(one[0].x_min == 0.0);
    CHECK(one[0].y_min == 0.0);
    CHECK(one[0].x_max == 1.0);
    CHECK(one[0].y_max == 1.0);

    // Diagonal neighbors are separate components under 4-connectivity.
    BinaryMask diag(4, 4);
    diag.at(0, 0) = 1;
    diag.at(1, 1) = 1;
    CHECK(mask_to_boxes(diag).size() == 2);

    // An L-shape is one component with the tight bounds of the whole shape.
    BinaryMask ell(8, 8);
    for (int y = 1; y <= 4; ++y) ell.at(2, y) = 1;
    for (int x = 2; x <= 5; ++x) ell.at(x, 4) = 1;
    const auto lbox = mask_to_boxes(ell);
    REQUIRE(lbox.size() == 1);
    CHECK(lbox[0].x_min == doctest::Approx(2.0 / 8));
    CHECK(lbox[0].y_min == doctest::Approx(1.0 / 8));
    CHECK(lbox[0].x_max == doctest::Approx(6.0 / 8));
    CHECK(lbox[0].y_max == doctest::Approx(5.0 / 8));
}

TEST_CASE("mask_to_boxes agrees with an independent flood fill") {
    auto rng = make_rng(7, 1);
    std::bernoulli_distribution fg(0.3);
    for (int trial = 0; trial < 60; ++trial) {
        BinaryMask mask(32, 32);
        for (auto& c : mask.cells) c = fg(rng) ? 1 : 0;
        const auto got = mask_to_boxes(mask);
        const auto want = flood_fill_boxes(mask);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].x_min == want[i].x_min);
            CHECK(got[i].y_min == want[i].y_min);
            CHECK(got[i].x_max == want[i].x_max);
            CHECK(got[i].y_max == want[i].y_max);
        }
    }
}

TEST_CASE("brightness_equalize shifts the mean onto the reference") {
    Image img(4, 4);
    Image ref(4, 4);
    for (size_t i = 0; i < img.size(); ++i) {
        img.pixels[i] = 0.1 * static_cast<double>(i);
        ref.pixels[i] = 0.5;
    }
    const Image out = brightness_equalize(img, ref);
    double mean = 0.0;
    for (double v : out.pixels) mean += v;
    mean /= static_cast<double>(out.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-12));
    // Zero-mean structure is preserved exactly.
    CHECK(out.pixels[5] - out.pixels[3] == doctest::Approx(0.2).epsilon(1e-12));
}
