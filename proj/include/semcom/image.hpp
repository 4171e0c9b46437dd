#pragma once

#include <cstdint>
#include <vector>

#include "semcom/errors.hpp"

namespace semcom {

// Row-major grayscale grid. Pixel values are nominally in [0,1] but may
// leave that range while an image carries diffusion noise.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw ValidationError("Image: dimensions must be >= 1");
    }

    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return pixels.size(); }
    bool same_shape(const Image& other) const { return width == other.width && height == other.height; }
};

// Binary foreground mask, row-major, one byte per cell (0 or 1).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> cells;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), cells(static_cast<size_t>(w) * h, 0) {
        if (w < 1 || h < 1) throw ValidationError("BinaryMask: dimensions must be >= 1");
    }

    uint8_t& at(int x, int y) { return cells[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return cells[static_cast<size_t>(y) * width + x]; }
};

} // namespace semcom
