#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "despeckle/filters.hpp"
#include "despeckle/image_io.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/simulation.hpp"

namespace {

using namespace despeckle;

ImageFormat resolve_format(const std::string& requested, const std::string& path) {
    if (requested == "pgm") return ImageFormat::kPgm;
    if (requested == "raw") return ImageFormat::kRawFloat;
    const bool pgm_ext = path.size() >= 4 && path.substr(path.size() - 4) == ".pgm";
    return pgm_ext ? ImageFormat::kPgm : ImageFormat::kRawFloat;
}

ImageGrid load_with_note(const std::string& path) {
    LoadedImage loaded = read_image(path);
    if (loaded.zeros_replaced > 0) {
        std::cerr << "note: " << path << ": replaced " << loaded.zeros_replaced
                  << " zero pixel(s) with the smallest positive value\n";
    }
    return std::move(loaded.image);
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << contents;
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<std::string> split_list(const std::string& arg) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream stream(arg);
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Flags shared by `filter` and `bench`.
struct FilterFlags {
    std::string method = "sdnlm";
    double eta = 0.90;
    int iterations = 1;
    int dof = 1;
    std::optional<double> fallback_looks;
    std::string border = "mirror";
    std::optional<double> significance;
    int threads = 1;

    FilterConfig to_config() const {
        FilterConfig config;
        config.method = method == "sdnm" ? FilterMethod::kSdnm : FilterMethod::kSdnlm;
        config.eta = eta;
        config.iterations = iterations;
        config.dof = dof;
        config.fallback_looks = fallback_looks;
        config.border = border == "skip" ? BorderPolicy::kSkip : BorderPolicy::kMirror;
        config.significance = significance;
        config.threads = threads;
        return config;
    }
};

void add_filter_flags(CLI::App* cmd, FilterFlags& flags, bool with_method) {
    const auto open_unit = CLI::Validator(
        [](std::string& s) -> std::string {
            double v = 0.0;
            try {
                v = std::stod(s);
            } catch (const std::exception&) {
                return "'" + s + "' is not a number";
            }
            if (!(v > 0.0 && v < 1.0)) return "value must lie strictly between 0 and 1";
            return {};
        },
        "FLOAT in (0,1)");

    if (with_method) {
        cmd->add_option("--method", flags.method, "Filter: sdnm or sdnlm")
            ->required()
            ->check(CLI::IsMember({"sdnm", "sdnlm"}));
    }
    cmd->add_option("--eta", flags.eta,
                    "Test confidence; regions are rejected at level 1 - eta")
        ->capture_default_str()
        ->check(open_unit);
    cmd->add_option("--iterations", flags.iterations, "Filter passes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dof", flags.dof, "Chi-square degrees of freedom for the test")
        ->capture_default_str()
        ->check(CLI::IsMember({1, 2}));
    cmd->add_option("--fallback-looks", flags.fallback_looks,
                    "Looks value used when a sample admits no likelihood root")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--border", flags.border, "Border policy: mirror or skip")
        ->capture_default_str()
        ->check(CLI::IsMember({"mirror", "skip"}));
    cmd->add_option("--significance", flags.significance,
                    "Raw rejection level / weight threshold, overriding 1 - eta")
        ->check(open_unit);
    cmd->add_option("--threads", flags.threads, "Worker threads inside one filter pass")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speckle filters for intensity imagery with a Monte Carlo benchmark"};
    app.require_subcommand(1);

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Despeckle one image");
    std::string filter_in, filter_out;
    std::string filter_format = "auto";
    FilterFlags filter_flags;
    filter_cmd->add_option("input", filter_in, "Input image (PGM or raw float64)")->required();
    filter_cmd->add_option("output", filter_out, "Output image path")->required();
    add_filter_flags(filter_cmd, filter_flags, true);
    filter_cmd->add_option("--format", filter_format, "Output format (default: by extension)")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "pgm", "raw"}));

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a speckled phantom image");
    std::string simulate_out, simulate_truth, simulate_annotation;
    std::string simulate_format = "auto";
    int simulate_situation = 0;
    int simulate_size = 256;
    std::uint64_t simulate_seed = 0;
    simulate_cmd->add_option("output", simulate_out, "Corrupted image path")->required();
    simulate_cmd->add_option("--situation", simulate_situation, "Scenario id (1, 2 or 3)")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    simulate_cmd->add_option("--seed", simulate_seed, "Noise seed")->capture_default_str();
    simulate_cmd->add_option("--size", simulate_size, "Phantom side length")
        ->capture_default_str()
        ->check(CLI::Range(64, 4096));
    simulate_cmd->add_option("--truth", simulate_truth, "Also write the clean scene here");
    simulate_cmd->add_option("--annotation", simulate_annotation,
                             "Also write the measurement-region JSON here");
    simulate_cmd->add_option("--format", simulate_format, "Image format (default: by extension)")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "pgm", "raw"}));

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo filter assessment");
    std::string bench_report, bench_filters = "sdnm,sdnlm", bench_dump;
    int bench_situation = 0;
    int bench_size = 256;
    int bench_replications = 100;
    int bench_workers = 1;
    std::uint64_t bench_seed = 0;
    FilterFlags bench_flags;
    bench_cmd->add_option("report", bench_report, "Output CSV path")->required();
    bench_cmd->add_option("--situation", bench_situation, "Scenario id (1, 2 or 3)")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    bench_cmd->add_option("--replications", bench_replications, "Monte Carlo replications")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench_seed, "Master seed")->capture_default_str();
    bench_cmd
        ->add_option("--filters", bench_filters,
                     "Comma list of rows: sdnm, sdnlm, none (identity baseline)")
        ->capture_default_str()
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                const auto items = split_list(s);
                if (items.empty()) return "need at least one filter";
                for (const std::string& item : items) {
                    if (item != "sdnm" && item != "sdnlm" && item != "none") {
                        return "unknown filter '" + item + "'";
                    }
                }
                return {};
            },
            "LIST"));
    bench_cmd->add_option("--size", bench_size, "Phantom side length")
        ->capture_default_str()
        ->check(CLI::Range(64, 4096));
    bench_cmd->add_option("--workers", bench_workers, "Concurrent replications")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--dump-dir", bench_dump,
                          "Write per-replication images into this directory");
    add_filter_flags(bench_cmd, bench_flags, false);

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Score an image against a clean reference");
    std::string metrics_truth, metrics_test, metrics_annotation, metrics_out;
    metrics_cmd->add_option("--truth", metrics_truth, "Clean reference image")->required();
    metrics_cmd->add_option("--test", metrics_test, "Image to score")->required();
    metrics_cmd->add_option("--annotation", metrics_annotation, "Measurement-region JSON")
        ->required();
    metrics_cmd->add_option("output", metrics_out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*filter_cmd) {
            const ImageGrid input = load_with_note(filter_in);
            const ImageGrid output = apply_filter(input, filter_flags.to_config());
            write_image(output, filter_out, resolve_format(filter_format, filter_out));
        } else if (*simulate_cmd) {
            const Situation situation = situation_from_id(simulate_situation);
            const Phantom phantom = build_phantom(situation, simulate_size);
            const ImageGrid corrupted = corrupt(phantom, situation, simulate_seed);
            write_image(corrupted, simulate_out, resolve_format(simulate_format, simulate_out));
            if (!simulate_truth.empty()) {
                write_image(phantom.truth, simulate_truth,
                            resolve_format(simulate_format, simulate_truth));
            }
            if (!simulate_annotation.empty()) {
                write_annotation(phantom.annotation, simulate_annotation);
            }
        } else if (*bench_cmd) {
            ProtocolConfig config;
            config.situation = situation_from_id(bench_situation);
            config.size = bench_size;
            config.replications = bench_replications;
            config.seed = bench_seed;
            config.workers = bench_workers;
            config.dump_dir = bench_dump;
            for (const std::string& name : split_list(bench_filters)) {
                ProtocolFilter entry;
                entry.name = name;
                if (name != "none") {
                    FilterFlags flags = bench_flags;
                    flags.method = name;
                    entry.config = flags.to_config();
                }
                config.filters.push_back(std::move(entry));
            }
            write_text_file(bench_report, protocol_csv(run_protocol(config)));
        } else if (*metrics_cmd) {
            const ImageGrid truth = load_with_note(metrics_truth);
            const ImageGrid test = load_with_note(metrics_test);
            const PhantomAnnotation annotation = read_annotation(metrics_annotation);
            const MetricsReport report = compute_metrics(test, truth, annotation);
            std::ostringstream csv;
            csv << "ENL,Line Cont.,Edge Grad.,Edge Var.,Q Index,Beta-rho Index,BRISQUE\n"
                << format_value(report.enl) << ',' << format_value(report.line_contrast_deviation)
                << ',' << format_value(report.edge_gradient) << ','
                << format_value(report.edge_variance) << ',' << format_value(report.q_index)
                << ',' << format_value(report.beta_rho) << ",unavailable\n";
            write_text_file(metrics_out, csv.str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
