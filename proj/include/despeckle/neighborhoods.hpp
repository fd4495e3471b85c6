#pragma once

#include <array>
#include <vector>

#include "despeckle/gamma_model.hpp"
#include "despeckle/image.hpp"

namespace despeckle {

/// Relative pixel position (rows grow downward).
struct Offset {
    int dr = 0;
    int dc = 0;
};

struct RegionMask {
    int id = 0;
    std::vector<Offset> offsets;  // row-major order
};

/// The nine Nagao-Matsuyama style regions inside the 5x5 window used by the
/// region filter.  Mask 1 is the full central 3x3 block and is the only mask
/// that contains the origin.  Masks 2-5 are the four rotations of a north
/// edge region, masks 6-9 the four rotations of a northeast corner region:
///
///       mask 2 (N)         mask 6 (NE)
///      x x x x .          . . . x x
///      . x x x .          . . x x x
///      . . o . .          . . o x x
///      . . . . .          . . . . .
///      . . . . .          . . . . .
///
/// (5x5 window, o marks the origin, x a member cell.)  Every cell of the
/// window belongs to at least one mask; sizes are 9 and eight times 7.
const std::array<RegionMask, 9>& nagao_masks();

/// Offsets of the 24 neighbour patch centres inside the 5x5 search window
/// (row-major, origin excluded); each patch is the 3x3 block around its
/// centre.
struct PatchLayout {
    std::array<Offset, 24> centers;
    int patch_radius = 1;
};

const PatchLayout& nonlocal_patch_layout();

/// Values of one mask anchored at (row, col), in mask order.  Off-image
/// positions are mirror-reflected; extraction is total for both border
/// policies (the filters decide what to do near the border).
Sample extract_sample(const ImageGrid& image, int row, int col,
                      const RegionMask& mask, BorderPolicy policy);

/// The central 3x3 patch followed by the 24 neighbour patches.  A neighbour
/// centre that falls off the image is mirror-reflected first, then its patch
/// is gathered around the reflected position.
std::vector<Sample> extract_patches(const ImageGrid& image, int row, int col,
                                    const PatchLayout& layout, BorderPolicy policy);

}  // namespace despeckle
