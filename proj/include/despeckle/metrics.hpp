#pragma once

#include <vector>

#include "despeckle/image.hpp"

namespace despeckle {

struct PixelCoord {
    int row = 0;
    int col = 0;
};

/// One-pixel-wide structure together with two parallel tracks beside it.
/// `reference_contrast` is the contrast the same structure has in the clean
/// scene, so a perfectly restored image deviates by zero.
struct LineAnnotation {
    std::vector<PixelCoord> line;
    std::vector<PixelCoord> flank_a;
    std::vector<PixelCoord> flank_b;
    double reference_contrast = 0.0;
};

/// Two homogeneous strips on either side of a straight edge, plus the mean
/// step the edge has in the clean scene.
struct EdgeAnnotation {
    Rect strip_a;
    Rect strip_b;
    double reference_step = 0.0;
};

struct PhantomAnnotation {
    Rect homogeneous_region;
    std::vector<LineAnnotation> lines;
    std::vector<EdgeAnnotation> edges;
};

struct MetricsReport {
    double enl = 0.0;
    double line_contrast_deviation = 0.0;
    double edge_gradient = 0.0;
    double edge_variance = 0.0;
    double q_index = 0.0;
    double beta_rho = 0.0;
};

double region_mean(const ImageGrid& image, const Rect& region);
double region_variance(const ImageGrid& image, const Rect& region);  // unbiased

/// Equivalent number of looks of a homogeneous region, (mean/std)^2.
/// Throws std::domain_error when the region variance vanishes.
double enl(const ImageGrid& image, const Rect& region);

/// Raw contrast 2 m_line - (m_flank_a + m_flank_b) of the annotated tracks.
double line_contrast(const ImageGrid& image, const LineAnnotation& annotation);

/// |line_contrast - reference_contrast|: zero means the structure survived
/// filtering with its clean-scene contrast intact.
double line_contrast_deviation(const ImageGrid& image, const LineAnnotation& annotation);

struct EdgeMetrics {
    double gradient = 0.0;  // | |mean_a - mean_b| - reference_step |
    double variance = 0.0;  // |var_a - var_b|
};

EdgeMetrics edge_metrics(const ImageGrid& image, const EdgeAnnotation& annotation);

/// Universal quality index: correlation x luminance x contrast.  Throws
/// std::domain_error when a factor denominator is zero.
double q_index(const ImageGrid& x, const ImageGrid& y);

/// Discrete 4-neighbour Laplacian with mirrored borders.
ImageGrid laplacian(const ImageGrid& image);

/// Pearson correlation between the Laplacians of the two images.  Throws
/// std::domain_error when either Laplacian has zero variance.
double beta_rho(const ImageGrid& x, const ImageGrid& y);

/// All metrics of `test` against the clean image, averaging the line and edge
/// measures over all annotated structures.
MetricsReport compute_metrics(const ImageGrid& test, const ImageGrid& truth,
                              const PhantomAnnotation& annotation);

}  // namespace despeckle
