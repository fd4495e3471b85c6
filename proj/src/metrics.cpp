#include "despeckle/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace despeckle {
namespace {

void check_region(const ImageGrid& image, const Rect& region, const char* what) {
    if (!region.inside(image)) {
        throw std::invalid_argument(std::string(what) + ": region not inside image");
    }
}

double coords_mean(const ImageGrid& image, const std::vector<PixelCoord>& coords,
                   const char* what) {
    if (coords.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty coordinate list");
    }
    double sum = 0.0;
    for (const PixelCoord& p : coords) {
        if (p.row < 0 || p.row >= image.height || p.col < 0 || p.col >= image.width) {
            throw std::invalid_argument(std::string(what) + ": coordinate outside image");
        }
        sum += image.at(p.row, p.col);
    }
    return sum / static_cast<double>(coords.size());
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

Moments image_moments(const ImageGrid& image) {
    const double n = static_cast<double>(image.size());
    double sum = 0.0;
    for (double v : image.pixels) sum += v;
    Moments m;
    m.mean = sum / n;
    if (image.size() >= 2) {
        double ss = 0.0;
        for (double v : image.pixels) {
            const double d = v - m.mean;
            ss += d * d;
        }
        m.variance = ss / (n - 1.0);
    }
    return m;
}

double image_covariance(const ImageGrid& x, const ImageGrid& y,
                        double mean_x, double mean_y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += (x.pixels[i] - mean_x) * (y.pixels[i] - mean_y);
    }
    return acc / (static_cast<double>(x.size()) - 1.0);
}

void check_same_shape(const ImageGrid& x, const ImageGrid& y, const char* what) {
    if (!x.same_shape(y)) {
        throw std::invalid_argument(std::string(what) + ": images differ in shape");
    }
    if (x.pixels.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty images");
    }
}

}  // namespace

double region_mean(const ImageGrid& image, const Rect& region) {
    check_region(image, region, "region_mean");
    double sum = 0.0;
    for (int r = region.row; r < region.row + region.height; ++r) {
        for (int c = region.col; c < region.col + region.width; ++c) {
            sum += image.at(r, c);
        }
    }
    return sum / region.area();
}

double region_variance(const ImageGrid& image, const Rect& region) {
    check_region(image, region, "region_variance");
    if (region.area() < 2) {
        throw std::invalid_argument("region_variance: need at least 2 pixels");
    }
    const double mean = region_mean(image, region);
    double ss = 0.0;
    for (int r = region.row; r < region.row + region.height; ++r) {
        for (int c = region.col; c < region.col + region.width; ++c) {
            const double d = image.at(r, c) - mean;
            ss += d * d;
        }
    }
    return ss / (region.area() - 1.0);
}

double enl(const ImageGrid& image, const Rect& region) {
    const double mean = region_mean(image, region);
    const double variance = region_variance(image, region);
    if (variance <= 0.0) {
        throw std::domain_error("enl: region variance is zero");
    }
    return mean * mean / variance;
}

double line_contrast(const ImageGrid& image, const LineAnnotation& annotation) {
    const double m_line = coords_mean(image, annotation.line, "line_contrast");
    const double m_a = coords_mean(image, annotation.flank_a, "line_contrast");
    const double m_b = coords_mean(image, annotation.flank_b, "line_contrast");
    return 2.0 * m_line - (m_a + m_b);
}

double line_contrast_deviation(const ImageGrid& image, const LineAnnotation& annotation) {
    return std::fabs(line_contrast(image, annotation) - annotation.reference_contrast);
}

EdgeMetrics edge_metrics(const ImageGrid& image, const EdgeAnnotation& annotation) {
    const double mean_a = region_mean(image, annotation.strip_a);
    const double mean_b = region_mean(image, annotation.strip_b);
    const double var_a = region_variance(image, annotation.strip_a);
    const double var_b = region_variance(image, annotation.strip_b);
    EdgeMetrics metrics;
    metrics.gradient = std::fabs(std::fabs(mean_a - mean_b) - annotation.reference_step);
    metrics.variance = std::fabs(var_a - var_b);
    return metrics;
}

double q_index(const ImageGrid& x, const ImageGrid& y) {
    check_same_shape(x, y, "q_index");
    const Moments mx = image_moments(x);
    const Moments my = image_moments(y);
    if (mx.variance <= 0.0 || my.variance <= 0.0) {
        throw std::domain_error("q_index: an image has zero variance");
    }
    const double luminance_den = mx.mean * mx.mean + my.mean * my.mean;
    if (luminance_den == 0.0) {
        throw std::domain_error("q_index: zero mean-square term");
    }
    const double sx = std::sqrt(mx.variance);
    const double sy = std::sqrt(my.variance);
    const double correlation = image_covariance(x, y, mx.mean, my.mean) / (sx * sy);
    const double luminance = 2.0 * mx.mean * my.mean / luminance_den;
    const double contrast = 2.0 * sx * sy / (mx.variance + my.variance);
    return correlation * luminance * contrast;
}

ImageGrid laplacian(const ImageGrid& image) {
    if (image.pixels.empty()) {
        throw std::invalid_argument("laplacian: empty image");
    }
    ImageGrid out(image.width, image.height);
    for (int r = 0; r < image.height; ++r) {
        const int up = mirror_index(r - 1, image.height);
        const int down = mirror_index(r + 1, image.height);
        for (int c = 0; c < image.width; ++c) {
            const int left = mirror_index(c - 1, image.width);
            const int right = mirror_index(c + 1, image.width);
            out.at(r, c) = image.at(up, c) + image.at(down, c) + image.at(r, left) +
                           image.at(r, right) - 4.0 * image.at(r, c);
        }
    }
    return out;
}

double beta_rho(const ImageGrid& x, const ImageGrid& y) {
    check_same_shape(x, y, "beta_rho");
    const ImageGrid lx = laplacian(x);
    const ImageGrid ly = laplacian(y);
    const Moments mx = image_moments(lx);
    const Moments my = image_moments(ly);
    if (mx.variance <= 0.0 || my.variance <= 0.0) {
        throw std::domain_error("beta_rho: a Laplacian has zero variance");
    }
    return image_covariance(lx, ly, mx.mean, my.mean) /
           std::sqrt(mx.variance * my.variance);
}

MetricsReport compute_metrics(const ImageGrid& test, const ImageGrid& truth,
                              const PhantomAnnotation& annotation) {
    check_same_shape(test, truth, "compute_metrics");
    MetricsReport report;
    report.enl = enl(test, annotation.homogeneous_region);
    if (!annotation.lines.empty()) {
        double acc = 0.0;
        for (const LineAnnotation& line : annotation.lines) {
            acc += line_contrast_deviation(test, line);
        }
        report.line_contrast_deviation = acc / static_cast<double>(annotation.lines.size());
    }
    if (!annotation.edges.empty()) {
        double grad = 0.0;
        double var = 0.0;
        for (const EdgeAnnotation& edge : annotation.edges) {
            const EdgeMetrics em = edge_metrics(test, edge);
            grad += em.gradient;
            var += em.variance;
        }
        const double n = static_cast<double>(annotation.edges.size());
        report.edge_gradient = grad / n;
        report.edge_variance = var / n;
    }
    report.q_index = q_index(test, truth);
    report.beta_rho = beta_rho(test, truth);
    return report;
}

}  // namespace despeckle
