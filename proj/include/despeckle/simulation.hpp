#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "despeckle/filters.hpp"
#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"

namespace despeckle {

/// One simulated acquisition: gamma speckle with `looks` looks over a scene
/// whose bright structures sit at strip_mean and whose background sits at
/// background_mean.
struct Situation {
    int id = 1;
    double looks = 1.0;
    double strip_mean = 1.0;
    double background_mean = 1.0;
};

/// The three stock situations used by the benchmark harness.
const std::array<Situation, 3>& simulated_situations();

/// Throws std::invalid_argument for ids outside 1..3.
Situation situation_from_id(int id);

struct Phantom {
    ImageGrid truth;
    PhantomAnnotation annotation;
};

/// Deterministic clean scene, coordinates scaling with `size` (>= 64):
/// a bright top-left block and a bright right block (giving one horizontal
/// and one vertical edge against the background), a vertical line, a diagonal
/// line, and a large homogeneous background patch for ENL measurement.  The
/// annotation regions are pairwise disjoint and carry reference values
/// computed from the clean scene itself.
Phantom build_phantom(const Situation& situation, int size = 256);

/// Per-pixel independent Gamma(looks, looks / truth) speckle, drawn from one
/// seeded stream in row-major pixel order.
ImageGrid corrupt(const Phantom& phantom, const Situation& situation, std::uint64_t seed);

/// A benchmark entry: a filter configuration, or nullopt for the identity
/// baseline (metrics of the corrupted image itself).
struct ProtocolFilter {
    std::string name;
    std::optional<FilterConfig> config;
};

struct ProtocolConfig {
    Situation situation;
    int size = 256;
    int replications = 100;
    std::uint64_t seed = 0;
    std::vector<ProtocolFilter> filters;
    int workers = 1;
    std::string dump_dir;  // when nonempty, per-replication images are written here
};

struct AggregateStat {
    double mean = 0.0;
    double stddev = 0.0;  // unbiased; 0 when fewer than 2 values
};

struct ProtocolRow {
    std::string filter;
    AggregateStat enl;
    AggregateStat line_contrast_deviation;
    AggregateStat edge_gradient;
    AggregateStat edge_variance;
    AggregateStat q_index;
    AggregateStat beta_rho;
    int replications_used = 0;
    int failures = 0;
};

/// Monte Carlo assessment: for every replication, corrupt the phantom with a
/// per-replication stream split from the master seed, run every filter, and
/// score against the clean scene.  Replications may run on several workers;
/// results are reduced in replication order, so the output is byte-stable
/// across worker counts.  A filter that throws on some replication is
/// recorded as a failure and excluded from that filter's aggregates.
std::vector<ProtocolRow> run_protocol(const ProtocolConfig& config);

/// Fixed-format CSV of the aggregate table (header plus one row per filter).
std::string protocol_csv(const std::vector<ProtocolRow>& rows);

}  // namespace despeckle
