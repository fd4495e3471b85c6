#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace despeckle {

/// Row-major grid of nonnegative intensity values.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    ImageGrid() = default;

    ImageGrid(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w <= 0 || h <= 0) {
            throw std::invalid_argument("ImageGrid: dimensions must be positive");
        }
        pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    double& at(int row, int col) {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }

    double at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t size() const { return pixels.size(); }

    bool same_shape(const ImageGrid& other) const {
        return width == other.width && height == other.height;
    }
};

/// Half-open axis-aligned rectangle: rows [row, row+height), cols [col, col+width).
struct Rect {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;

    int area() const { return height * width; }

    bool inside(const ImageGrid& image) const {
        return row >= 0 && col >= 0 && height > 0 && width > 0 &&
               row + height <= image.height && col + width <= image.width;
    }
};

/// How windows that stick out of the image are completed.
/// kMirror reflects indices without repeating the edge pixel; kSkip leaves
/// pixels closer than the window radius to the border unfiltered (sample
/// extraction itself always reflects so that it stays total).
enum class BorderPolicy { kMirror, kSkip };

/// Whole-sample reflection of index i into [0, n): ..., 2, 1, 0, 1, 2, ...
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace despeckle
