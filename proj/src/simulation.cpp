#include "despeckle/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "despeckle/gamma_model.hpp"
#include "despeckle/image_io.hpp"
#include "despeckle/rng.hpp"

namespace despeckle {
namespace {

std::vector<PixelCoord> column_track(int col, int row_begin, int row_end) {
    std::vector<PixelCoord> track;
    track.reserve(row_end - row_begin);
    for (int r = row_begin; r < row_end; ++r) track.push_back({r, col});
    return track;
}

std::vector<PixelCoord> diagonal_track(int row_begin, int row_end, int col_shift) {
    std::vector<PixelCoord> track;
    track.reserve(row_end - row_begin);
    for (int r = row_begin; r < row_end; ++r) track.push_back({r, r + col_shift});
    return track;
}

double track_reference(const ImageGrid& truth, const LineAnnotation& line) {
    LineAnnotation probe = line;
    probe.reference_contrast = 0.0;
    return line_contrast(truth, probe);
}

AggregateStat aggregate(const std::vector<double>& values) {
    AggregateStat stat;
    if (values.empty()) return stat;
    double sum = 0.0;
    for (double v : values) sum += v;
    stat.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - stat.mean;
            ss += d * d;
        }
        stat.stddev = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
    }
    return stat;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void dump_replication(const std::string& dir, int replication, const std::string& label,
                      const ImageGrid& image) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "rep%03d_%s", replication, label.c_str());
    const std::filesystem::path base = std::filesystem::path(dir) / stem;
    write_image(image, base.string() + ".raw", ImageFormat::kRawFloat);
    write_image(image, base.string() + ".pgm", ImageFormat::kPgm);
}

}  // namespace

const std::array<Situation, 3>& simulated_situations() {
    static const std::array<Situation, 3> situations = {{
        {1, 1.0, 200.0, 20.0},
        {2, 3.0, 195.0, 55.0},
        {3, 4.0, 150.0, 30.0},
    }};
    return situations;
}

Situation situation_from_id(int id) {
    for (const Situation& s : simulated_situations()) {
        if (s.id == id) return s;
    }
    throw std::invalid_argument("situation_from_id: id must be 1, 2 or 3");
}

Phantom build_phantom(const Situation& situation, int size) {
    if (size < 64) {
        throw std::invalid_argument("build_phantom: size must be at least 64");
    }
    if (!(situation.strip_mean > 0.0) || !(situation.background_mean > 0.0) ||
        !(situation.looks > 0.0)) {
        throw std::invalid_argument("build_phantom: situation values must be positive");
    }
    const int n = size;
    const double bg = situation.background_mean;
    const double bright = situation.strip_mean;

    Phantom phantom;
    phantom.truth = ImageGrid(n, n, bg);
    ImageGrid& truth = phantom.truth;

    // Bright top-left block: horizontal edge against the background at row n/8.
    for (int r = 0; r < n / 8; ++r) {
        for (int c = 0; c < 3 * n / 4; ++c) truth.at(r, c) = bright;
    }
    // Bright right block: vertical edge at column 3n/4.
    for (int r = 0; r < n; ++r) {
        for (int c = 3 * n / 4; c < n; ++c) truth.at(r, c) = bright;
    }
    // One-pixel vertical line.
    const int line_col = n / 4;
    const int line_top = 3 * n / 16;
    const int line_bottom = 7 * n / 16;
    for (int r = line_top; r < line_bottom; ++r) truth.at(r, line_col) = bright;
    // One-pixel diagonal line, displaced to the right of the vertical one.
    const int diag_shift = n / 4;
    for (int r = line_top; r < line_bottom; ++r) truth.at(r, r + diag_shift) = bright;

    PhantomAnnotation& ann = phantom.annotation;
    ann.homogeneous_region = {n / 2, 0, n / 2, n / 2};

    LineAnnotation vertical;
    vertical.line = column_track(line_col, line_top, line_bottom);
    vertical.flank_a = column_track(line_col - 1, line_top, line_bottom);
    vertical.flank_b = column_track(line_col + 1, line_top, line_bottom);
    vertical.reference_contrast = track_reference(truth, vertical);
    ann.lines.push_back(std::move(vertical));

    LineAnnotation diagonal;
    diagonal.line = diagonal_track(line_top, line_bottom, diag_shift);
    diagonal.flank_a = diagonal_track(line_top, line_bottom, diag_shift - 1);
    diagonal.flank_b = diagonal_track(line_top, line_bottom, diag_shift + 1);
    diagonal.reference_contrast = track_reference(truth, diagonal);
    ann.lines.push_back(std::move(diagonal));

    // Strips two pixels wide, one pixel clear of the edge on each side.
    const int h_edge = n / 8;
    EdgeAnnotation horizontal_edge;
    horizontal_edge.strip_a = {h_edge - 3, n / 32, 2, 11 * n / 16 - n / 32};
    horizontal_edge.strip_b = {h_edge + 1, n / 32, 2, 11 * n / 16 - n / 32};
    horizontal_edge.reference_step = std::fabs(region_mean(truth, horizontal_edge.strip_a) -
                                               region_mean(truth, horizontal_edge.strip_b));
    ann.edges.push_back(horizontal_edge);

    const int v_edge = 3 * n / 4;
    const int v_strip_top = n / 8 + n / 32;
    const int v_strip_height = (n - n / 32) - v_strip_top;
    EdgeAnnotation vertical_edge;
    vertical_edge.strip_a = {v_strip_top, v_edge - 3, v_strip_height, 2};
    vertical_edge.strip_b = {v_strip_top, v_edge + 1, v_strip_height, 2};
    vertical_edge.reference_step = std::fabs(region_mean(truth, vertical_edge.strip_a) -
                                             region_mean(truth, vertical_edge.strip_b));
    ann.edges.push_back(vertical_edge);

    return phantom;
}

ImageGrid corrupt(const Phantom& phantom, const Situation& situation, std::uint64_t seed) {
    if (!(situation.looks > 0.0) || !std::isfinite(situation.looks)) {
        throw std::invalid_argument("corrupt: looks must be positive and finite");
    }
    ImageGrid out(phantom.truth.width, phantom.truth.height);
    Rng rng(seed);
    const double looks = situation.looks;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = phantom.truth.pixels[i] / looks * gamma_deviate(looks, rng);
    }
    return out;
}

std::vector<ProtocolRow> run_protocol(const ProtocolConfig& config) {
    if (config.replications < 1) {
        throw std::invalid_argument("run_protocol: need at least one replication");
    }
    if (config.workers < 1) {
        throw std::invalid_argument("run_protocol: workers must be at least 1");
    }
    for (const ProtocolFilter& f : config.filters) {
        if (f.config) f.config->validate();
    }
    const Phantom phantom = build_phantom(config.situation, config.size);
    if (!config.dump_dir.empty()) {
        std::filesystem::create_directories(config.dump_dir);
    }

    const std::size_t n_filters = config.filters.size();
    // results[k][f] holds the report of filter f on replication k, or nothing
    // when that filter failed there.
    std::vector<std::vector<std::optional<MetricsReport>>> results(
        config.replications, std::vector<std::optional<MetricsReport>>(n_filters));

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const int k = next.fetch_add(1);
                if (k >= config.replications) return;
                const ImageGrid corrupted =
                    corrupt(phantom, config.situation, split_seed(config.seed, k));
                if (!config.dump_dir.empty()) {
                    dump_replication(config.dump_dir, k, "corrupted", corrupted);
                }
                for (std::size_t f = 0; f < n_filters; ++f) {
                    try {
                        const ImageGrid filtered = config.filters[f].config
                            ? apply_filter(corrupted, *config.filters[f].config)
                            : corrupted;
                        if (!config.dump_dir.empty() && config.filters[f].config) {
                            dump_replication(config.dump_dir, k, config.filters[f].name,
                                             filtered);
                        }
                        results[k][f] =
                            compute_metrics(filtered, phantom.truth, phantom.annotation);
                    } catch (const std::exception&) {
                        // recorded as a failure for this filter and replication
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };

    const int workers = std::min(config.workers, config.replications);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<ProtocolRow> rows;
    rows.reserve(n_filters);
    for (std::size_t f = 0; f < n_filters; ++f) {
        ProtocolRow row;
        row.filter = config.filters[f].name;
        std::vector<double> enl_v, line_v, grad_v, var_v, q_v, beta_v;
        for (int k = 0; k < config.replications; ++k) {
            if (!results[k][f]) {
                ++row.failures;
                continue;
            }
            const MetricsReport& m = *results[k][f];
            enl_v.push_back(m.enl);
            line_v.push_back(m.line_contrast_deviation);
            grad_v.push_back(m.edge_gradient);
            var_v.push_back(m.edge_variance);
            q_v.push_back(m.q_index);
            beta_v.push_back(m.beta_rho);
        }
        row.replications_used = static_cast<int>(enl_v.size());
        row.enl = aggregate(enl_v);
        row.line_contrast_deviation = aggregate(line_v);
        row.edge_gradient = aggregate(grad_v);
        row.edge_variance = aggregate(var_v);
        row.q_index = aggregate(q_v);
        row.beta_rho = aggregate(beta_v);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string protocol_csv(const std::vector<ProtocolRow>& rows) {
    std::ostringstream out;
    out << "Filter,ENL mean,ENL sd,Line Cont. mean,Line Cont. sd,"
           "Edge Grad. mean,Edge Grad. sd,Edge Var. mean,Edge Var. sd,"
           "Q Index mean,Q Index sd,Beta-rho Index mean,Beta-rho Index sd,"
           "Replications,Failures\n";
    for (const ProtocolRow& row : rows) {
        out << row.filter;
        for (const AggregateStat* stat :
             {&row.enl, &row.line_contrast_deviation, &row.edge_gradient,
              &row.edge_variance, &row.q_index, &row.beta_rho}) {
            out << ',' << format_value(stat->mean) << ',' << format_value(stat->stddev);
        }
        out << ',' << row.replications_used << ',' << row.failures << '\n';
    }
    return out.str();
}

}  // namespace despeckle
