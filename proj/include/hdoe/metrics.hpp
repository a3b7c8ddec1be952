#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "hdoe/design.hpp"
#include "hdoe/space.hpp"

namespace hdoe {

/// Per-dimension distance on unit positions: |a - b| when both are present,
/// 1 when exactly one is Null, 0 when both are Null.
double dist_k(std::optional<double> a, std::optional<double> b);

/// Minimum over point pairs of (sum_k dist_k^p)^(1/p). Needs n >= 2.
double min_interpoint_distance(const Design& x, double p = 2.0);

/// Mean over continuous dimensions with at least two non-Null values of the
/// smallest gap between those values. Dimensions with fewer values are left
/// out of the mean; throws UndefinedMetric if none qualify.
double avg_min_projection_distance(const Design& x);

struct StarDiscrepancy {
    double value = 0.0;
    /// True when the supremum was estimated from sampled corners.
    bool estimate = false;
};

/// Corner-count limit for exact evaluation, and the sample size beyond it.
inline constexpr std::uint64_t kExactCornerLimit = 1'000'000;
inline constexpr std::size_t kSampledCorners = 100'000;

/// Star discrepancy over the continuous dimensions with Null ordered before 0.
/// A box [Null, u] in dimension k has volume null_portion_k + u_k (1 -
/// null_portion_k). Exact over the grid of point coordinates when the grid
/// has at most kExactCornerLimit corners, otherwise estimated from
/// kSampledCorners corners drawn with `seed`.
StarDiscrepancy star_discrepancy_null(const Design& x, std::uint64_t seed = 0x5eedULL);

/// Offset added to every per-dimension distance in the MaxPro criterion:
/// zero for required continuous dimensions, the null portion for optional
/// ones, 1 / complexity for other finite or parent dimensions.
double maxpro_offset(const FlatDimension& dim);

/// MaxPro criterion with Null-aware distances. Smaller is better; +infinity
/// when some pair has a zero product (duplicate rows without offsets).
double maxpro(const Design& x);

/// Same as maxpro() on an already encoded design.
double maxpro(const UnitMatrix& encoded, std::span<const double> offsets);

/// Sum over full-sub-spaces of (target / n) times the centered-L2
/// discrepancy of the rows realised in that sub-space, projected onto its
/// active continuous dimensions. Only comparable between designs that share
/// the same targets.
double weighted_fss_discrepancy(const Design& x, const std::map<Fss, std::size_t>& targets);

/// Distinct optionality patterns over the number of full-sub-spaces.
double opt_coverage(const Design& x);

/// Realised point count per full-sub-space.
std::map<Fss, std::size_t> realised_allocation(const Design& x);

/// Sum over full-sub-spaces of |realised - target|.
std::size_t allocation_difference(const Design& x, const std::map<Fss, std::size_t>& targets);

struct MetricReport {
    double ocov = 0.0;
    double idis = 0.0;
    double adis = 0.0;
    double sdsr = 0.0;
    bool sdsr_estimate = false;
    double wdsr = 0.0;
    double maxpro = 0.0;
    std::size_t alloc_diff = 0;
};

/// Evaluates all seven criteria. Throws UndefinedMetric when idis or adis
/// are undefined for the design.
MetricReport evaluate(const Design& x, const std::map<Fss, std::size_t>& targets, double p = 2.0);

}  // namespace hdoe
