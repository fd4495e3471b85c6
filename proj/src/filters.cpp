#include "despeckle/filters.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "despeckle/divergence.hpp"
#include "despeckle/gamma_model.hpp"
#include "despeckle/neighborhoods.hpp"

namespace despeckle {
namespace {

// Largest coordinate excursion of any window: neighbour patch centres reach
// +-2 and their patches another +-1.
constexpr int kLutRadius = 3;

struct MirrorLut {
    std::vector<int> rows;
    std::vector<int> cols;

    explicit MirrorLut(const ImageGrid& image) {
        rows.resize(image.height + 2 * kLutRadius);
        cols.resize(image.width + 2 * kLutRadius);
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            rows[i] = mirror_index(i - kLutRadius, image.height);
        }
        for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
            cols[i] = mirror_index(i - kLutRadius, image.width);
        }
    }

    int row(int r) const { return rows[r + kLutRadius]; }
    int col(int c) const { return cols[c + kLutRadius]; }
};

void check_filter_input(const ImageGrid& image) {
    if (image.pixels.empty()) {
        throw std::invalid_argument("filter: empty image");
    }
    for (double v : image.pixels) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::domain_error("filter: pixel values must be positive and finite");
        }
    }
}

// Streaming sample summary; mirrors compute_sample_stats but fed value by
// value from the window loops.
struct Accum {
    double sum = 0.0;
    double sum_log = 0.0;
    double sum_sq = 0.0;
    int n = 0;
    double first = 0.0;
    bool all_equal = true;

    void add(double z, double log_z) {
        if (n == 0) {
            first = z;
        } else if (z != first) {
            all_equal = false;
        }
        sum += z;
        sum_log += log_z;
        sum_sq += z * z;
        ++n;
    }

    SampleStats stats() const {
        SampleStats s;
        s.count = static_cast<std::size_t>(n);
        s.all_equal = all_equal;
        const double dn = static_cast<double>(n);
        s.mean = all_equal ? first : sum / dn;
        s.mean_log = sum_log / dn;
        if (n >= 2 && !all_equal) {
            s.variance = std::max(0.0, (sum_sq - dn * s.mean * s.mean) / (dn - 1.0));
        }
        return s;
    }
};

void for_each_row(int height, int threads, const std::function<void(int)>& body) {
    threads = std::clamp(threads, 1, height);
    if (threads == 1) {
        for (int r = 0; r < height; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= height || failed.load()) return;
                body(r);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

bool border_pixel(int r, int c, const ImageGrid& image) {
    return r < 2 || c < 2 || r >= image.height - 2 || c >= image.width - 2;
}

std::vector<double> log_pixels(const ImageGrid& image) {
    std::vector<double> logs(image.pixels.size());
    for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = std::log(image.pixels[i]);
    return logs;
}

ImageGrid sdnm_pass(const ImageGrid& in, const FilterConfig& cfg) {
    const auto& masks = nagao_masks();
    const double alpha = cfg.rejection_level();
    // p < alpha is equivalent to the statistic exceeding this quantile.
    const double reject_above = chi2_critical_value(alpha, cfg.dof);
    const MirrorLut lut(in);
    const std::vector<double> logs = log_pixels(in);
    const int width = in.width;

    ImageGrid out(in.width, in.height);
    for_each_row(in.height, cfg.threads, [&](int r) {
        for (int c = 0; c < width; ++c) {
            if (cfg.border == BorderPolicy::kSkip && border_pixel(r, c, in)) {
                out.at(r, c) = in.at(r, c);
                continue;
            }
            Accum center;
            for (const Offset& o : masks[0].offsets) {
                const std::size_t i =
                    static_cast<std::size_t>(lut.row(r + o.dr)) * width + lut.col(c + o.dc);
                center.add(in.pixels[i], logs[i]);
            }
            const GammaParams central = params_from_stats(center.stats(), cfg.fallback_looks);

            double pooled_sum = center.sum;
            int pooled_n = center.n;
            bool pooled_equal = center.all_equal;
            const double pooled_first = center.first;
            for (std::size_t k = 1; k < masks.size(); ++k) {
                Accum region;
                for (const Offset& o : masks[k].offsets) {
                    const std::size_t i =
                        static_cast<std::size_t>(lut.row(r + o.dr)) * width + lut.col(c + o.dc);
                    region.add(in.pixels[i], logs[i]);
                }
                const GammaParams candidate = params_from_stats(region.stats(), cfg.fallback_looks);
                const double s = kl_statistic(central, static_cast<std::size_t>(center.n),
                                              candidate, static_cast<std::size_t>(region.n));
                if (s <= reject_above) {
                    pooled_sum += region.sum;
                    pooled_n += region.n;
                    if (pooled_equal && !(region.all_equal && region.first == pooled_first)) {
                        pooled_equal = false;
                    }
                }
            }
            // The all-equal pool short-circuit keeps constant neighbourhoods
            // bit-exact instead of accumulating rounding from the division.
            out.at(r, c) = pooled_equal ? pooled_first : pooled_sum / pooled_n;
        }
    });
    return out;
}

struct PatchInfo {
    double mean = 0.0;
    double looks = 1.0;
};

ImageGrid sdnlm_pass(const ImageGrid& in, const FilterConfig& cfg) {
    const auto& layout = nonlocal_patch_layout();
    const double alpha = cfg.rejection_level();
    // Full weight at or above p = alpha, zero weight at or below p = alpha/2.
    const double full_weight_below = chi2_critical_value(alpha, cfg.dof);
    const double zero_weight_above = chi2_critical_value(0.5 * alpha, cfg.dof);
    const MirrorLut lut(in);
    const std::vector<double> logs = log_pixels(in);
    const int width = in.width;
    const std::size_t patch_pixels =
        static_cast<std::size_t>(2 * layout.patch_radius + 1) * (2 * layout.patch_radius + 1);

    // Patch laws depend only on the patch centre, so estimate them once per
    // pixel instead of once per comparison.
    std::vector<PatchInfo> info(in.pixels.size());
    for_each_row(in.height, cfg.threads, [&](int r) {
        for (int c = 0; c < width; ++c) {
            Accum patch;
            for (int dr = -layout.patch_radius; dr <= layout.patch_radius; ++dr) {
                for (int dc = -layout.patch_radius; dc <= layout.patch_radius; ++dc) {
                    const std::size_t i =
                        static_cast<std::size_t>(lut.row(r + dr)) * width + lut.col(c + dc);
                    patch.add(in.pixels[i], logs[i]);
                }
            }
            const GammaParams p = params_from_stats(patch.stats(), cfg.fallback_looks);
            info[static_cast<std::size_t>(r) * width + c] = {p.backscatter, p.looks};
        }
    });

    ImageGrid out(in.width, in.height);
    for_each_row(in.height, cfg.threads, [&](int r) {
        for (int c = 0; c < width; ++c) {
            if (cfg.border == BorderPolicy::kSkip && border_pixel(r, c, in)) {
                out.at(r, c) = in.at(r, c);
                continue;
            }
            const std::size_t self = static_cast<std::size_t>(r) * width + c;
            const PatchInfo& central = info[self];
            const double z1 = in.pixels[self];

            double acc = z1;
            double weight_sum = 1.0;
            double first = z1;
            bool all_equal = true;
            bool any_neighbor = false;
            for (const Offset& o : layout.centers) {
                const std::size_t i =
                    static_cast<std::size_t>(lut.row(r + o.dr)) * width + lut.col(c + o.dc);
                const PatchInfo& other = info[i];
                const GammaParams p1{central.looks, central.mean};
                const GammaParams p2{other.looks, other.mean};
                const double s = kl_statistic(p1, patch_pixels, p2, patch_pixels);
                double w;
                if (s <= full_weight_below) {
                    w = 1.0;
                } else if (s >= zero_weight_above) {
                    continue;
                } else {
                    w = std::max(0.0, 2.0 / alpha * chi2_survival(s, cfg.dof) - 1.0);
                    if (w == 0.0) continue;
                }
                const double z = in.pixels[i];
                acc += w * z;
                weight_sum += w;
                any_neighbor = true;
                if (all_equal && z != first) all_equal = false;
            }
            if (!any_neighbor) {
                out.at(r, c) = central.mean;  // 3x3 mean fallback
            } else {
                out.at(r, c) = all_equal ? first : acc / weight_sum;
            }
        }
    });
    return out;
}

}  // namespace

void FilterConfig::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument("filter config: eta must lie in (0, 1)");
    }
    if (significance && !(*significance > 0.0 && *significance < 1.0)) {
        throw std::invalid_argument("filter config: significance must lie in (0, 1)");
    }
    if (iterations < 1) {
        throw std::invalid_argument("filter config: iterations must be at least 1");
    }
    if (dof != 1 && dof != 2) {
        throw std::invalid_argument("filter config: dof must be 1 or 2");
    }
    if (fallback_looks && (!(*fallback_looks > 0.0) || !std::isfinite(*fallback_looks))) {
        throw std::invalid_argument("filter config: fallback looks must be positive and finite");
    }
    if (threads < 1) {
        throw std::invalid_argument("filter config: threads must be at least 1");
    }
}

ImageGrid sdnm_filter(const ImageGrid& image, const FilterConfig& config) {
    config.validate();
    check_filter_input(image);
    ImageGrid current = image;
    for (int i = 0; i < config.iterations; ++i) {
        current = sdnm_pass(current, config);
    }
    return current;
}

ImageGrid sdnlm_filter(const ImageGrid& image, const FilterConfig& config) {
    config.validate();
    check_filter_input(image);
    ImageGrid current = image;
    for (int i = 0; i < config.iterations; ++i) {
        current = sdnlm_pass(current, config);
    }
    return current;
}

ImageGrid apply_filter(const ImageGrid& image, const FilterConfig& config) {
    return config.method == FilterMethod::kSdnm ? sdnm_filter(image, config)
                                                : sdnlm_filter(image, config);
}

}  // namespace despeckle
