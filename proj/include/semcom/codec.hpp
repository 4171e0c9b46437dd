#pragma once

// Semantic representation layer: normalized bounding boxes, 5-bit uniform
// quantization (resolution 0.03125), bit-level scene serialization, IoU
// scoring, connected-component mask-to-box translation and brightness
// equalization.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semcom/image.hpp"

namespace semcom::codec {

inline constexpr int kBitsPerCoord = 5;
inline constexpr int kIndexMax = 31;             // 2^5 - 1
inline constexpr double kResolution = 0.03125;   // quantization cell width
inline constexpr int kBitsPerBox = 4 * kBitsPerCoord;

/// Axis-aligned box with coordinates normalized to [0,1].
/// Degenerate (zero-area) boxes are rejected.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    void validate() const;
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Four 5-bit cell indices in coordinate order (x_min, y_min, x_max, y_max).
struct QuantizedBox {
    std::array<uint8_t, 4> idx{};
    void validate() const;
};

/// Per-scene semantic payload: an ordered list of vehicle boxes.
struct SceneSemantics {
    std::string scene_id;
    std::vector<BoundingBox> boxes;
};

/// Bit sequence, most-significant-bit-first within each 5-bit index.
/// Byte serialization zero-pads to a byte boundary; the pad length is the
/// caller's responsibility to record (the harness keeps it in its frame
/// header).
class BitString {
public:
    BitString() = default;
    explicit BitString(std::vector<uint8_t> bits) : bits_(std::move(bits)) {}

    void push_back(bool bit) { bits_.push_back(bit ? 1 : 0); }
    size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    uint8_t operator[](size_t i) const { return bits_[i]; }
    bool operator==(const BitString& other) const { return bits_ == other.bits_; }

    std::vector<uint8_t> to_bytes() const;
    static BitString from_bytes(const std::vector<uint8_t>& bytes, size_t bit_count);

private:
    std::vector<uint8_t> bits_; // one bit per element, values 0/1
};

// index_k = min(floor(v_k / 0.03125), 31)
QuantizedBox quantize_box(const BoundingBox& b);

// v_k = (index_k + 0.5) * 0.03125 (cell midpoint); round-trip error <= 0.015625
BoundingBox dequantize_box(const QuantizedBox& q);

// 20 bits per box, boxes in list order, coordinates in (x_min, y_min,
// x_max, y_max) order, MSB first.
BitString encode_scene(const SceneSemantics& s);
SceneSemantics decode_scene(const BitString& bits, const std::string& scene_id);

// area(a ∩ b) / area(a ∪ b); 0 when disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

// One box per 4-connected foreground component, tight pixel bounds
// normalized by the grid dimensions, sorted by (y_min, x_min).
std::vector<BoundingBox> mask_to_boxes(const BinaryMask& mask);

// output = img - mean(img) + mean(ref)
Image brightness_equalize(const Image& img, const Image& ref);

} // namespace semcom::codec
