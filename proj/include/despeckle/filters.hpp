#pragma once

#include <optional>

#include "despeckle/image.hpp"

namespace despeckle {

enum class FilterMethod { kSdnm, kSdnlm };

/// Shared configuration of both speckle filters.
///
/// `eta` is the confidence of the region tests; a region (or neighbour patch)
/// is compared against the centre at rejection level 1 - eta, so the default
/// 0.90 tests at the 0.10 level.  `significance` overrides that level
/// directly when set.  The same level also parametrizes the soft weight ramp
/// of the nonlocal filter, whose weights fall linearly to zero between the
/// level and half the level.
struct FilterConfig {
    FilterMethod method = FilterMethod::kSdnlm;
    double eta = 0.90;
    int iterations = 1;
    int dof = 1;
    std::optional<double> fallback_looks;
    BorderPolicy border = BorderPolicy::kMirror;
    std::optional<double> significance;
    int threads = 1;

    double rejection_level() const { return significance ? *significance : 1.0 - eta; }

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Region filter: pools the central 3x3 block with every oriented region of
/// the 5x5 window whose gamma law is not rejected against the centre, and
/// outputs the pooled pixel mean.
ImageGrid sdnm_filter(const ImageGrid& image, const FilterConfig& config);

/// Nonlocal filter: weights the 24 neighbour pixels of the 5x5 window by the
/// soft-thresholded p-value of their 3x3 patch against the central patch and
/// outputs the weighted pixel mean (the centre itself has weight 1).  When
/// every neighbour weight vanishes the output falls back to the 3x3 mean.
ImageGrid sdnlm_filter(const ImageGrid& image, const FilterConfig& config);

/// Dispatches on config.method and applies config.iterations passes.
ImageGrid apply_filter(const ImageGrid& image, const FilterConfig& config);

}  // namespace despeckle
