#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hdoe {

enum class DimKind { continuous, discrete, categorical, composite, variant };

std::string_view to_string(DimKind kind);

/// One node of the declared input-space tree.
///
/// Leaf kinds (continuous, discrete, categorical) carry bounds or a value set.
/// A composite groups `children` that exist only when the composite is present;
/// a variant picks exactly one of its `branches`.
struct DimensionSpec {
    std::string id;
    DimKind kind = DimKind::continuous;
    double lb = 0.0;
    double ub = 1.0;
    std::vector<double> values;       // discrete
    std::vector<std::string> labels;  // categorical
    bool nullable = false;
    std::optional<double> null_portion;
    std::vector<DimensionSpec> children;               // composite
    std::vector<std::vector<DimensionSpec>> branches;  // variant
};

struct InputSpace {
    std::vector<DimensionSpec> dimensions;
};

/// Checks every DimensionSpec invariant across the whole tree, including id
/// uniqueness. Throws SpaceError naming the offending id.
void validate(const InputSpace& space);

/// One column of the flattened space. Indices are 0-based positions in
/// FlatSpace::dims().
struct FlatDimension {
    std::string id;
    DimKind kind = DimKind::continuous;
    double lb = 0.0;
    double ub = 1.0;
    /// Numeric levels: discrete value set, {1} for a composite, {0..b-1} for a
    /// variant with b branches. Empty for continuous and categorical.
    std::vector<double> values;
    std::vector<std::string> labels;
    /// May be Null by itself (declared nullable).
    bool nullable = false;
    /// May be Null in some point: nullable, or constrained by a parent.
    bool optional = false;
    /// Null-region size; user value or 1/complexity. Zero for non-optional dims.
    double null_portion = 0.0;
    bool null_portion_from_user = false;
    std::optional<std::size_t> parent;
    /// Level index of the parent that activates this dimension.
    std::size_t parent_level = 0;
    std::vector<std::size_t> children;

    bool is_parent() const noexcept {
        return kind == DimKind::composite || kind == DimKind::variant;
    }
    bool is_finite() const noexcept { return kind != DimKind::continuous; }
    /// Number of levels for finite kinds; 0 for continuous.
    std::size_t level_count() const noexcept {
        return kind == DimKind::categorical ? labels.size() : values.size();
    }
};

/// Hierarchical constraint (p, c, v): child c is Null unless parent p takes
/// the level `level` (whose numeric value is `value`).
struct Constraint {
    std::size_t parent;
    std::size_t child;
    std::size_t level;
    double value;

    auto operator<=>(const Constraint&) const = default;
};

class FlatSpace {
public:
    /// Validates the forest structure and the optional/null-portion
    /// invariants. Throws SpaceError.
    explicit FlatSpace(std::vector<FlatDimension> dims);

    std::size_t size() const noexcept { return dims_.size(); }
    const std::vector<FlatDimension>& dims() const noexcept { return dims_; }
    const FlatDimension& dim(std::size_t k) const { return dims_.at(k); }
    std::optional<std::size_t> index_of(std::string_view id) const;

    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const std::vector<std::size_t>& real_dims() const noexcept { return real_; }
    const std::vector<std::size_t>& optional_dims() const noexcept { return optional_; }
    const std::vector<std::size_t>& parent_dims() const noexcept { return parent_; }
    /// Dimensions with no parent, in flat order.
    const std::vector<std::size_t>& root_dims() const noexcept { return roots_; }

    /// Children of `parent` activated by level `level`, in flat order.
    std::vector<std::size_t> children_of(std::size_t parent, std::size_t level) const;

    /// Stable textual fingerprint of the space, used for provenance hashes.
    std::string fingerprint() const;
    std::uint64_t hash() const;

private:
    std::vector<FlatDimension> dims_;
    std::vector<Constraint> constraints_;
    std::vector<std::size_t> real_;
    std::vector<std::size_t> optional_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> roots_;
};

/// Depth-first flattening. Composite and variant nodes become parent
/// dimensions; missing null portions are filled with 1/complexity.
FlatSpace flatten(const InputSpace& space);

/// Estimated number of distinguishable levels, counting one unit for the
/// null region when the dimension is optional.
double complexity(const FlatDimension& dim);

/// 1 / complexity(dim).
double default_null_portion(const FlatDimension& dim);

/// A full-sub-space: the sorted indices of the dimensions active (non-Null)
/// in a point.
struct Fss {
    std::vector<std::size_t> active;

    bool contains(std::size_t k) const;
    auto operator<=>(const Fss&) const = default;
};

std::string to_string(const Fss& fss, const FlatSpace& space);

/// All feasible full-sub-spaces, lexicographically ordered, no duplicates.
std::vector<Fss> derive_full_subspaces(const FlatSpace& space);

/// Probability of each full-sub-space when every nullable dimension is
/// independently Null with probability null_portion, respecting the
/// hierarchy. A variant's branches share its activation mass equally.
std::map<Fss, double> fss_allocation(const FlatSpace& space);

/// Level each parent dimension takes inside `fss` (Null parents absent).
/// Throws InvariantViolation when `fss` is not feasible for `space`.
std::map<std::size_t, std::size_t> activation_levels(const FlatSpace& space, const Fss& fss);

struct CountAllocation {
    std::map<Fss, std::size_t> counts;
    /// Forced coverage was requested with fewer points than sub-spaces.
    bool coverage_infeasible = false;
};

/// Largest-remainder rounding of fraction * n, ties broken by Fss order.
/// With `force_coverage` and n >= |fractions| every count is at least one.
CountAllocation allocate_counts(const std::map<Fss, double>& fractions, std::size_t n,
                                bool force_coverage);

}  // namespace hdoe
