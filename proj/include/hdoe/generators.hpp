#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdoe/design.hpp"
#include "hdoe/space.hpp"
#include "hdoe/tsfd.hpp"

namespace hdoe {

enum class BaseAlgorithm { random, fss_random, fss_lhd, fss_lhd_vp, tt_lhd, p_lhd };

/// A generation algorithm, optionally followed by MaxPro annealing ("-MP").
struct AlgorithmId {
    BaseAlgorithm base = BaseAlgorithm::fss_lhd;
    bool maxpro = false;

    /// Lower-case command-line id, e.g. "fss-lhd-vp-mp".
    std::string id() const;
    /// Report label, e.g. "FSS-LHD-VP-MP".
    std::string label() const;
    bool uses_fss_allocation() const;

    auto operator<=>(const AlgorithmId&) const = default;
};

/// Accepts ids and labels case-insensitively. Throws Error on unknown names.
AlgorithmId parse_algorithm(std::string_view text);

/// The twelve variants in report order: the six base algorithms, then their
/// -MP counterparts.
std::vector<AlgorithmId> all_algorithms();

struct GenConfig {
    AlgorithmId algorithm;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    bool force_coverage = false;
    /// Swap budget per TSFD call; defaults to 50 * rows * cols of that call.
    std::optional<std::size_t> tsfd_iterations;
    /// Annealing iterations for -MP variants; defaults to 100 * n * d.
    std::optional<std::size_t> maxpro_iterations;
    /// Per full-sub-space counts replacing the null-portion heuristic.
    std::optional<std::map<Fss, std::size_t>> allocation;
    /// TT-LHD merge swaps per child block, as a multiple of the block size.
    std::size_t merge_budget_factor = 20;
};

/// Target point counts per full-sub-space for `cfg`: the override when given,
/// otherwise allocate_counts(fss_allocation(space), n, force_coverage).
std::map<Fss, std::size_t> target_counts(const FlatSpace& space, const GenConfig& cfg);

Design gen_random(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);
Design gen_fss_random(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);
Design gen_fss_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);
Design gen_fss_lhd_vp(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);
Design gen_tt_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);
Design gen_p_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);

/// Dispatches on cfg.algorithm and applies MaxPro annealing for -MP ids.
Design generate(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg);

/// Centered quantile positions floor((j + 0.5) * remaining / count) used to
/// pull `count` values from a sorted pool of `remaining` values.
std::vector<std::size_t> quantile_positions(std::size_t remaining, std::size_t count);

/// Splits a value pool of `pool_size` strata between groups of the given sizes
/// so that every group receives one pool stratum overlapping each of its own
/// strata. Groups are served in order; each pulls near the centered quantiles
/// of what is left while keeping the remaining groups feasible. Returns the
/// pool stratum indices per group, ordered by the group's stratum.
std::vector<std::vector<std::size_t>> assign_pool_strata(std::size_t pool_size,
                                                         const std::vector<std::size_t>& group_sizes);

struct MergeResult {
    UnitMatrix child;  // child rows permuted onto the parent's active rows
    double cl2_before = 0.0;
    double cl2_after = 0.0;
};

/// Reorders the rows of `child` against the fixed columns `anchor` (same row
/// count) by accepting row-exchange moves on the child columns that lower the
/// centered-L2 discrepancy of the combined matrix.
MergeResult merge_child_block(const UnitMatrix& anchor, const UnitMatrix& child,
                              std::size_t budget, Rng& rng);

}  // namespace hdoe
