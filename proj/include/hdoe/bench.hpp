#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdoe/generators.hpp"
#include "hdoe/metrics.hpp"
#include "hdoe/space.hpp"

namespace hdoe {

/// Built-in benchmark spaces: basic, simple, modest, complex.
bool is_builtin_space(const std::string& name);
std::vector<std::string> builtin_space_names();
/// Space document of a built-in space. Throws Error for unknown names.
const std::string& builtin_space_document(const std::string& name);
FlatSpace builtin_space(const std::string& name);
/// Benchmark design sizes: basic {12,24,36}, simple {20,40,60},
/// modest and complex {32,64,96}.
std::vector<std::size_t> default_sizes(const std::string& name);

/// Stable per-replication seed. -MP variants share the seed of their base
/// algorithm, so each -MP design is the annealed form of the matching base
/// design.
std::uint64_t derive_seed(std::uint64_t base, const std::string& space, std::size_t n,
                          const AlgorithmId& algorithm, std::size_t replication);

struct BenchConfig {
    std::vector<std::string> spaces = builtin_space_names();
    /// Overrides default_sizes() per space.
    std::map<std::string, std::vector<std::size_t>> sizes;
    std::size_t replications = 10;
    std::vector<AlgorithmId> algorithms = all_algorithms();
    std::uint64_t base_seed = 0;
    /// Worker threads; 0 picks the hardware concurrency.
    std::size_t threads = 0;
    std::optional<std::size_t> tsfd_iterations;
    std::optional<std::size_t> maxpro_iterations;
};

struct BenchRecord {
    std::string space;
    std::size_t n = 0;
    AlgorithmId algorithm;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    double ocov = 0.0;
    std::optional<double> idis;
    std::optional<double> adis;
    double sdsr = 0.0;
    bool sdsr_estimate = false;
    double wdsr = 0.0;
    double maxpro = 0.0;
    std::size_t alloc_diff = 0;
};

/// Metrics ranked in the summary table.
enum class RankedMetric { idis, adis, sdsr, wdsr };
std::string to_string(RankedMetric m);
inline constexpr RankedMetric kRankedMetrics[] = {RankedMetric::idis, RankedMetric::adis,
                                                  RankedMetric::sdsr, RankedMetric::wdsr};
/// idis and adis are better when larger, the discrepancies when smaller.
bool higher_is_better(RankedMetric m);

struct BenchCell {
    std::string space;
    std::size_t n = 0;
    auto operator<=>(const BenchCell&) const = default;
};

struct BenchReport {
    std::vector<AlgorithmId> algorithms;
    std::vector<BenchCell> cells;
    /// One record per (cell, algorithm, replication), in that nesting order.
    std::vector<BenchRecord> raw;
    /// Replication means per cell, metric and algorithm (index into algorithms).
    std::map<BenchCell, std::map<RankedMetric, std::vector<std::optional<double>>>> means;
    /// Within-cell ranks (1 = best, ties averaged); absent when the metric was
    /// undefined for some algorithm in the cell.
    std::map<BenchCell, std::map<RankedMetric, std::vector<double>>> cell_ranks;
    /// Average rank across cells per metric and algorithm.
    std::map<RankedMetric, std::vector<double>> rankings;
    /// Mean allocation difference per cell and algorithm.
    std::map<BenchCell, std::vector<double>> alloc_means;
    std::vector<std::string> warnings;
};

/// Ranks of `values` (1 = best), ties sharing their average rank.
std::vector<double> rank_values(const std::vector<double>& values, bool higher_better);

BenchReport run_benchmark(const BenchConfig& cfg);

/// Writes rankings.csv, normalized.csv and raw.csv into `dir`.
void emit_report(const BenchReport& report, const std::filesystem::path& dir);

std::string rankings_csv(const BenchReport& report);
std::string normalized_csv(const BenchReport& report);
std::string raw_csv(const BenchReport& report);

}  // namespace hdoe
