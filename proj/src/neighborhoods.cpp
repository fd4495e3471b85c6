#include "despeckle/neighborhoods.hpp"

#include <algorithm>
#include <stdexcept>

namespace despeckle {
namespace {

// Quarter turn: north maps to east.
Offset rotate(Offset o) { return {o.dc, -o.dr}; }

std::vector<Offset> rotated(const std::vector<Offset>& proto, int quarter_turns) {
    std::vector<Offset> out = proto;
    for (Offset& o : out) {
        for (int t = 0; t < quarter_turns; ++t) o = rotate(o);
    }
    std::sort(out.begin(), out.end(), [](Offset a, Offset b) {
        return a.dr != b.dr ? a.dr < b.dr : a.dc < b.dc;
    });
    return out;
}

std::array<RegionMask, 9> build_masks() {
    std::array<RegionMask, 9> masks;
    std::vector<Offset> central;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) central.push_back({dr, dc});
    }
    const std::vector<Offset> north_edge = {
        {-2, -2}, {-2, -1}, {-2, 0}, {-2, 1}, {-1, -1}, {-1, 0}, {-1, 1}};
    const std::vector<Offset> northeast_corner = {
        {-2, 1}, {-2, 2}, {-1, 0}, {-1, 1}, {-1, 2}, {0, 1}, {0, 2}};
    masks[0] = {1, central};
    for (int t = 0; t < 4; ++t) {
        masks[1 + t] = {2 + t, rotated(north_edge, t)};
        masks[5 + t] = {6 + t, rotated(northeast_corner, t)};
    }
    return masks;
}

}  // namespace

const std::array<RegionMask, 9>& nagao_masks() {
    static const std::array<RegionMask, 9> masks = build_masks();
    return masks;
}

const PatchLayout& nonlocal_patch_layout() {
    static const PatchLayout layout = [] {
        PatchLayout l;
        int i = 0;
        for (int dr = -2; dr <= 2; ++dr) {
            for (int dc = -2; dc <= 2; ++dc) {
                if (dr == 0 && dc == 0) continue;
                l.centers[i++] = {dr, dc};
            }
        }
        return l;
    }();
    return layout;
}

Sample extract_sample(const ImageGrid& image, int row, int col,
                      const RegionMask& mask, BorderPolicy) {
    if (image.pixels.empty()) {
        throw std::invalid_argument("extract_sample: empty image");
    }
    Sample values;
    values.reserve(mask.offsets.size());
    for (const Offset& o : mask.offsets) {
        const int r = mirror_index(row + o.dr, image.height);
        const int c = mirror_index(col + o.dc, image.width);
        values.push_back(image.at(r, c));
    }
    return values;
}

std::vector<Sample> extract_patches(const ImageGrid& image, int row, int col,
                                    const PatchLayout& layout, BorderPolicy) {
    if (image.pixels.empty()) {
        throw std::invalid_argument("extract_patches: empty image");
    }
    const int radius = layout.patch_radius;
    const auto patch_at = [&](int cr, int cc) {
        Sample patch;
        patch.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
        for (int dr = -radius; dr <= radius; ++dr) {
            for (int dc = -radius; dc <= radius; ++dc) {
                const int r = mirror_index(cr + dr, image.height);
                const int c = mirror_index(cc + dc, image.width);
                patch.push_back(image.at(r, c));
            }
        }
        return patch;
    };
    std::vector<Sample> patches;
    patches.reserve(1 + layout.centers.size());
    patches.push_back(patch_at(mirror_index(row, image.height), mirror_index(col, image.width)));
    for (const Offset& o : layout.centers) {
        const int cr = mirror_index(row + o.dr, image.height);
        const int cc = mirror_index(col + o.dc, image.width);
        patches.push_back(patch_at(cr, cc));
    }
    return patches;
}

}  // namespace despeckle
