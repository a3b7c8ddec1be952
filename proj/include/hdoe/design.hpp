#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hdoe/matrix.hpp"
#include "hdoe/space.hpp"

namespace hdoe {

/// A design cell: Null, a real value, or an index into a finite value set.
class Cell {
public:
    enum class Tag : std::uint8_t { null, real, level };

    Cell() = default;
    static Cell null() { return {}; }
    static Cell real(double v) { return Cell(Tag::real, v, 0); }
    static Cell level(std::size_t index) { return Cell(Tag::level, 0.0, index); }

    Tag tag() const noexcept { return tag_; }
    bool is_null() const noexcept { return tag_ == Tag::null; }
    bool is_real() const noexcept { return tag_ == Tag::real; }
    bool is_level() const noexcept { return tag_ == Tag::level; }
    double value() const noexcept { return value_; }
    std::size_t level_index() const noexcept { return level_; }

    bool operator==(const Cell& o) const noexcept {
        if (tag_ != o.tag_) return false;
        if (tag_ == Tag::real) return value_ == o.value_;
        if (tag_ == Tag::level) return level_ == o.level_;
        return true;
    }

private:
    Cell(Tag tag, double value, std::size_t level) : tag_(tag), value_(value), level_(level) {}

    Tag tag_ = Tag::null;
    double value_ = 0.0;
    std::size_t level_ = 0;
};

struct Provenance {
    std::string algorithm;
    std::uint64_t seed = 0;
    /// Swap budget per TSFD call; 0 means the default of 50 * rows * cols.
    std::size_t tsfd_iterations = 0;
    /// Annealing iterations; 0 when no MaxPro pass ran.
    std::size_t maxpro_iterations = 0;
    /// Latin hypercube stratum placement used by the generator.
    std::string strata = "jittered";
};

/// n x d matrix of cells over a FlatSpace. Construction enforces the hierarchy,
/// nullability and range invariants; a Design is immutable afterwards.
class Design {
public:
    Design(std::shared_ptr<const FlatSpace> space, std::size_t rows, std::vector<Cell> cells,
           Provenance provenance = {});

    const FlatSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const FlatSpace>& space_ptr() const noexcept { return space_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return space_->size(); }
    const Cell& at(std::size_t i, std::size_t k) const { return cells_[i * cols() + k]; }
    std::span<const Cell> row(std::size_t i) const { return {cells_.data() + i * cols(), cols()}; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const Provenance& provenance() const noexcept { return provenance_; }

    Design with_provenance(Provenance p) const;

    /// Cell-wise equality (space identity and provenance are not compared).
    bool same_cells(const Design& other) const {
        return rows_ == other.rows_ && cells_ == other.cells_;
    }

private:
    std::shared_ptr<const FlatSpace> space_;
    std::size_t rows_;
    std::vector<Cell> cells_;
    Provenance provenance_;
};

/// Throws InvariantViolation if `row` breaks the hierarchy, nullability or
/// range rules of `space`.
void check_row(const FlatSpace& space, std::span<const Cell> row);

/// Binary optionality matrix: 1 where the cell is non-Null.
struct OptProjection {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t at(std::size_t i, std::size_t k) const { return bits[i * cols + k]; }
    bool operator==(const OptProjection&) const = default;
};

OptProjection opt_projection(const Design& x);

/// Maps u in [0,1] onto the dimension. Nullable dimensions send u below the
/// null portion to Null and rescale the rest; finite dimensions use equal-width
/// bins. Throws Error when u is outside [0,1].
Cell unit_to_value(double u, const FlatDimension& dim);

/// Position of a non-Null cell on the unit interval. Levels sit at bin centres
/// (j + 0.5) / m. Returns NaN for Null.
double unit_position(const Cell& cell, const FlatDimension& dim);

/// Unit-normalised copy of the design; Null cells become NaN.
UnitMatrix encode(const Design& x);

/// The full-sub-space a design row belongs to.
Fss fss_of_point(const FlatSpace& space, std::span<const Cell> row);

/// Header of dimension ids, one row per point, Null as an empty field, reals
/// printed with 17 significant digits. Finite levels are written as their
/// value (or label).
void write_csv(const Design& x, std::ostream& out);
void write_csv(const Design& x, const std::filesystem::path& path);
Design read_csv(std::istream& in, std::shared_ptr<const FlatSpace> space);
Design read_csv(const std::filesystem::path& path, std::shared_ptr<const FlatSpace> space);

/// Textual form of a finite level or real cell as written to CSV; empty for Null.
std::string format_cell(const Cell& cell, const FlatDimension& dim);

/// Provenance sidecar: {"algorithm", "seed", "n", "space_hash", ...}.
std::string provenance_json(const Design& x);

}  // namespace hdoe
