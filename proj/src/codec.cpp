#include "semcom/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semcom/errors.hpp"
#include "semcom/kernels.hpp"

namespace semcom::codec {

void BoundingBox::validate() const {
    const double vals[] = {x_min, y_min, x_max, y_max};
    for (double v : vals) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("bounding box coordinate out of [0,1]");
        }
    }
    if (x_max <= x_min || y_max <= y_min) {
        throw ValidationError("bounding box has non-positive extent");
    }
}

void QuantizedBox::validate() const {
    for (uint8_t v : idx) {
        if (v > kIndexMax) {
            throw ValidationError("quantized index exceeds 5-bit range");
        }
    }
}

std::vector<uint8_t> BitString::to_bytes() const {
    std::vector<uint8_t> bytes((bits_.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) {
            bytes[i / 8] |= static_cast<uint8_t>(1u << (7 - i % 8));
        }
    }
    return bytes;
}

BitString BitString::from_bytes(const std::vector<uint8_t>& bytes, size_t bit_count) {
    if (bit_count > bytes.size() * 8) {
        throw ValidationError("bit count exceeds available bytes");
    }
    std::vector<uint8_t> bits(bit_count);
    for (size_t i = 0; i < bit_count; ++i) {
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    }
    return BitString(std::move(bits));
}

QuantizedBox quantize_box(const BoundingBox& b) {
    b.validate();
    QuantizedBox q;
    const double vals[] = {b.x_min, b.y_min, b.x_max, b.y_max};
    for (int k = 0; k < 4; ++k) {
        const auto cell = static_cast<int64_t>(std::floor(vals[k] / kResolution));
        q.idx[static_cast<size_t>(k)] =
            static_cast<uint8_t>(std::min<int64_t>(cell, kIndexMax));
    }
    return q;
}

BoundingBox dequantize_box(const QuantizedBox& q) {
    q.validate();
    BoundingBox b;
    b.x_min = (q.idx[0] + 0.5) * kResolution;
    b.y_min = (q.idx[1] + 0.5) * kResolution;
    b.x_max = (q.idx[2] + 0.5) * kResolution;
    b.y_max = (q.idx[3] + 0.5) * kResolution;
    return b;
}

namespace {

void push_index(BitString& bits, uint8_t idx) {
    for (int bit = kBitsPerCoord - 1; bit >= 0; --bit) {
        bits.push_back((idx >> bit) & 1u);
    }
}

uint8_t read_index(const BitString& bits, size_t offset) {
    uint8_t idx = 0;
    for (int bit = 0; bit < kBitsPerCoord; ++bit) {
        idx = static_cast<uint8_t>((idx << 1) | bits[offset + static_cast<size_t>(bit)]);
    }
    return idx;
}

} // namespace

BitString encode_scene(const SceneSemantics& s) {
    BitString bits;
    for (const auto& box : s.boxes) {
        const QuantizedBox q = quantize_box(box);
        for (uint8_t idx : q.idx) {
            push_index(bits, idx);
        }
    }
    return bits;
}

SceneSemantics decode_scene(const BitString& bits, const std::string& scene_id) {
    if (bits.size() % kBitsPerBox != 0) {
        throw ValidationError("scene bit length is not a multiple of 20");
    }
    SceneSemantics s;
    s.scene_id = scene_id;
    const size_t count = bits.size() / kBitsPerBox;
    s.boxes.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        QuantizedBox q;
        for (int k = 0; k < 4; ++k) {
            q.idx[static_cast<size_t>(k)] =
                read_index(bits, i * kBitsPerBox +
                                     static_cast<size_t>(k) * kBitsPerCoord);
        }
        s.boxes.push_back(dequantize_box(q));
    }
    return s;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    a.validate();
    b.validate();
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    if (inter <= 0.0) {
        return 0.0;
    }
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

namespace {

// Union-find over provisional component labels.
struct LabelSet {
    std::vector<int> parent;

    int make() {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }

    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
        }
    }
};

} // namespace

std::vector<BoundingBox> mask_to_boxes(const BinaryMask& mask) {
    // Two-pass labeling: assign provisional labels scanning row-major,
    // merging with the left and upper neighbors, then resolve equivalences.
    std::vector<int> labels(static_cast<size_t>(mask.width) * static_cast<size_t>(mask.height), -1);
    LabelSet ls;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            const int left = (x > 0 && mask.at(x - 1, y))
                                 ? labels[static_cast<size_t>(y) * static_cast<size_t>(mask.width) + static_cast<size_t>(x - 1)]
                                 : -1;
            const int up = (y > 0 && mask.at(x, y - 1))
                               ? labels[static_cast<size_t>(y - 1) * static_cast<size_t>(mask.width) + static_cast<size_t>(x)]
                               : -1;
            int lab;
            if (left < 0 && up < 0) {
                lab = ls.make();
            } else if (left >= 0 && up >= 0) {
                ls.unite(left, up);
                lab = ls.find(left);
            } else {
                lab = std::max(left, up);
            }
            labels[static_cast<size_t>(y) * static_cast<size_t>(mask.width) + static_cast<size_t>(x)] = lab;
        }
    }

    struct Extent {
        int x_lo, y_lo, x_hi, y_hi;
    };
    std::vector<Extent> extents(ls.parent.size(), {mask.width, mask.height, -1, -1});
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            int lab = labels[static_cast<size_t>(y) * static_cast<size_t>(mask.width) + static_cast<size_t>(x)];
            if (lab < 0) {
                continue;
            }
            lab = ls.find(lab);
            Extent& e = extents[static_cast<size_t>(lab)];
            e.x_lo = std::min(e.x_lo, x);
            e.y_lo = std::min(e.y_lo, y);
            e.x_hi = std::max(e.x_hi, x);
            e.y_hi = std::max(e.y_hi, y);
        }
    }

    std::vector<BoundingBox> boxes;
    for (size_t lab = 0; lab < extents.size(); ++lab) {
        if (ls.find(static_cast<int>(lab)) != static_cast<int>(lab)) {
            continue;
        }
        const Extent& e = extents[lab];
        if (e.x_hi < 0) {
            continue;
        }
        BoundingBox b;
        b.x_min = static_cast<double>(e.x_lo) / mask.width;
        b.y_min = static_cast<double>(e.y_lo) / mask.height;
        b.x_max = static_cast<double>(e.x_hi + 1) / mask.width;
        b.y_max = static_cast<double>(e.y_hi + 1) / mask.height;
        boxes.push_back(b);
    }
    std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
        if (a.y_min != b.y_min) {
            return a.y_min < b.y_min;
        }
        return a.x_min < b.x_min;
    });
    return boxes;
}

Image brightness_equalize(const Image& img, const Image& ref) {
    if (img.pixels.empty() || ref.pixels.empty()) {
        throw ValidationError("brightness_equalize requires non-empty images");
    }
    const double mean_img = kern::sum(img.pixels) / static_cast<double>(img.pixels.size());
    const double mean_ref = kern::sum(ref.pixels) / static_cast<double>(ref.pixels.size());
    Image out = img;
    const double shift = mean_ref - mean_img;
    for (double& p : out.pixels) {
        p += shift;
    }
    return out;
}

} // namespace semcom::codec
