#include "hdoe/design.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "hdoe/error.hpp"

namespace hdoe {

Design::Design(std::shared_ptr<const FlatSpace> space, std::size_t rows, std::vector<Cell> cells,
               Provenance provenance)
    : space_(std::move(space)), rows_(rows), cells_(std::move(cells)),
      provenance_(std::move(provenance)) {
    if (!space_) throw Error("design needs a space");
    if (cells_.size() != rows_ * space_->size())
        throw InvariantViolation("design cell count does not match rows x dims");
    for (std::size_t i = 0; i < rows_; ++i) {
        try {
            check_row(*space_, row(i));
        } catch (const InvariantViolation& e) {
            throw InvariantViolation("row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

Design Design::with_provenance(Provenance p) const {
    Design copy = *this;
    copy.provenance_ = std::move(p);
    return copy;
}

void check_row(const FlatSpace& space, std::span<const Cell> row) {
    if (row.size() != space.size()) throw InvariantViolation("row width does not match space");
    for (std::size_t k = 0; k < space.size(); ++k) {
        const FlatDimension& d = space.dim(k);
        const Cell& c = row[k];
        bool in_context = true;
        if (d.parent) {
            const Cell& p = row[*d.parent];
            in_context = p.is_level() && p.level_index() == d.parent_level;
        }
        if (!in_context) {
            if (!c.is_null())
                throw InvariantViolation("'" + d.id + "' must be Null while its parent is inactive");
            continue;
        }
        if (c.is_null()) {
            if (!d.nullable) throw InvariantViolation("'" + d.id + "' is not nullable");
            continue;
        }
        if (d.kind == DimKind::continuous) {
            if (!c.is_real()) throw InvariantViolation("'" + d.id + "' expects a real value");
            if (!(c.value() >= d.lb && c.value() <= d.ub))
                throw InvariantViolation("'" + d.id + "' value outside [lb, ub]");
        } else {
            if (!c.is_level()) throw InvariantViolation("'" + d.id + "' expects a level");
            if (c.level_index() >= d.level_count())
                throw InvariantViolation("'" + d.id + "' level out of range");
        }
    }
}

OptProjection opt_projection(const Design& x) {
    OptProjection out{x.rows(), x.cols(), std::vector<std::uint8_t>(x.cells().size())};
    for (std::size_t t = 0; t < x.cells().size(); ++t) out.bits[t] = x.cells()[t].is_null() ? 0 : 1;
    return out;
}

Cell unit_to_value(double u, const FlatDimension& dim) {
    if (!(u >= 0.0 && u <= 1.0)) throw Error("unit value outside [0,1] for '" + dim.id + "'");
    if (dim.nullable) {
        const double a = dim.null_portion;
        if (u < a) return Cell::null();
        u = std::min(1.0, (u - a) / (1.0 - a));
    }
    if (dim.kind == DimKind::continuous) {
        return Cell::real(std::min(dim.ub, dim.lb + u * (dim.ub - dim.lb)));
    }
    const std::size_t m = dim.level_count();
    const auto bin = static_cast<std::size_t>(std::floor(u * static_cast<double>(m)));
    return Cell::level(std::min(bin, m - 1));
}

double unit_position(const Cell& cell, const FlatDimension& dim) {
    if (cell.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (cell.is_real()) return (cell.value() - dim.lb) / (dim.ub - dim.lb);
    return (static_cast<double>(cell.level_index()) + 0.5) / static_cast<double>(dim.level_count());
}

UnitMatrix encode(const Design& x) {
    UnitMatrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) out(i, k) = unit_position(x.at(i, k), x.space().dim(k));
    return out;
}

Fss fss_of_point(const FlatSpace& space, std::span<const Cell> row) {
    check_row(space, row);
    Fss fss;
    for (std::size_t k = 0; k < row.size(); ++k)
        if (!row[k].is_null()) fss.active.push_back(k);
    return fss;
}

std::string provenance_json(const Design& x) {
    nlohmann::ordered_json j;
    const Provenance& p = x.provenance();
    j["algorithm"] = p.algorithm;
    j["seed"] = p.seed;
    j["n"] = x.rows();
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(x.space().hash()));
    j["space_hash"] = hash;
    j["tsfd_iterations"] = p.tsfd_iterations;
    j["maxpro_iterations"] = p.maxpro_iterations;
    j["strata"] = p.strata;
    return j.dump(2);
}

}  // namespace hdoe
