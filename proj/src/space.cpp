#include "hdoe/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "hdoe/error.hpp"

namespace hdoe {

std::string_view to_string(DimKind kind) {
    switch (kind) {
        case DimKind::continuous: return "continuous";
        case DimKind::discrete: return "discrete-numeric";
        case DimKind::categorical: return "categorical";
        case DimKind::composite: return "composite";
        case DimKind::variant: return "variant";
    }
    return "unknown";
}

namespace {

bool is_leaf(DimKind kind) {
    return kind == DimKind::continuous || kind == DimKind::discrete ||
           kind == DimKind::categorical;
}

void validate_spec(const DimensionSpec& spec, std::set<std::string>& seen) {
    if (spec.id.empty()) throw SpaceError("", "empty dimension id");
    if (!seen.insert(spec.id).second) throw SpaceError(spec.id, "duplicate id");

    switch (spec.kind) {
        case DimKind::continuous:
            if (!std::isfinite(spec.lb) || !std::isfinite(spec.ub))
                throw SpaceError(spec.id, "bounds must be finite");
            if (!(spec.lb < spec.ub)) throw SpaceError(spec.id, "lb must be < ub");
            break;
        case DimKind::discrete: {
            if (spec.values.size() < 2) throw SpaceError(spec.id, "value_set needs >= 2 values");
            std::set<double> unique(spec.values.begin(), spec.values.end());
            if (unique.size() != spec.values.size())
                throw SpaceError(spec.id, "value_set has duplicates");
            for (double v : spec.values)
                if (!std::isfinite(v)) throw SpaceError(spec.id, "value_set must be finite");
            break;
        }
        case DimKind::categorical: {
            if (spec.labels.size() < 2) throw SpaceError(spec.id, "value_set needs >= 2 labels");
            std::set<std::string> unique(spec.labels.begin(), spec.labels.end());
            if (unique.size() != spec.labels.size())
                throw SpaceError(spec.id, "value_set has duplicates");
            break;
        }
        case DimKind::composite:
            if (spec.children.empty()) throw SpaceError(spec.id, "composite needs children");
            break;
        case DimKind::variant:
            if (spec.branches.empty()) throw SpaceError(spec.id, "variant needs branches");
            for (const auto& branch : spec.branches)
                if (branch.empty()) throw SpaceError(spec.id, "variant branch is empty");
            break;
    }
    if (is_leaf(spec.kind) && (!spec.children.empty() || !spec.branches.empty()))
        throw SpaceError(spec.id, "leaf dimension cannot have children");
    if (spec.kind == DimKind::composite && !spec.branches.empty())
        throw SpaceError(spec.id, "composite takes children, not branches");
    if (spec.kind == DimKind::variant && !spec.children.empty())
        throw SpaceError(spec.id, "variant takes branches, not children");

    if (spec.null_portion) {
        if (!spec.nullable) throw SpaceError(spec.id, "null_portion set on a non-nullable dimension");
        double a = *spec.null_portion;
        if (!(a > 0.0 && a < 1.0)) throw SpaceError(spec.id, "null_portion must lie in (0,1)");
    }

    for (const auto& child : spec.children) validate_spec(child, seen);
    for (const auto& branch : spec.branches)
        for (const auto& child : branch) validate_spec(child, seen);
}

void emit(const DimensionSpec& spec, std::optional<std::size_t> parent, std::size_t level,
          std::vector<FlatDimension>& out) {
    FlatDimension f;
    f.id = spec.id;
    f.kind = spec.kind;
    f.lb = spec.lb;
    f.ub = spec.ub;
    f.values = spec.values;
    f.labels = spec.labels;
    f.nullable = spec.nullable;
    if (spec.null_portion) {
        f.null_portion = *spec.null_portion;
        f.null_portion_from_user = true;
    }
    f.parent = parent;
    f.parent_level = level;
    if (spec.kind == DimKind::composite) {
        f.values = {1.0};
    } else if (spec.kind == DimKind::variant) {
        f.values.resize(spec.branches.size());
        std::iota(f.values.begin(), f.values.end(), 0.0);
    }
    if (!is_leaf(spec.kind)) {
        f.lb = 0.0;
        f.ub = 1.0;
    }
    const std::size_t index = out.size();
    out.push_back(std::move(f));
    for (const auto& child : spec.children) emit(child, index, 0, out);
    for (std::size_t b = 0; b < spec.branches.size(); ++b)
        for (const auto& child : spec.branches[b]) emit(child, index, b, out);
}

using Mass = std::vector<std::pair<std::vector<std::size_t>, double>>;

Mass subtree_options(const FlatSpace& space, std::size_t k);

// Cartesian product of the option lists of `dims`.
Mass cross(const FlatSpace& space, const std::vector<std::size_t>& dims) {
    Mass acc{{{}, 1.0}};
    for (std::size_t k : dims) {
        Mass opts = subtree_options(space, k);
        Mass next;
        next.reserve(acc.size() * opts.size());
        for (const auto& [set_a, mass_a] : acc)
            for (const auto& [set_b, mass_b] : opts) {
                std::vector<std::size_t> merged = set_a;
                merged.insert(merged.end(), set_b.begin(), set_b.end());
                next.emplace_back(std::move(merged), mass_a * mass_b);
            }
        acc = std::move(next);
    }
    return acc;
}

Mass subtree_options(const FlatSpace& space, std::size_t k) {
    const FlatDimension& d = space.dim(k);
    Mass active;
    if (d.kind == DimKind::composite) {
        active = cross(space, space.children_of(k, 0));
    } else if (d.kind == DimKind::variant) {
        const double share = 1.0 / static_cast<double>(d.level_count());
        for (std::size_t b = 0; b < d.level_count(); ++b)
            for (auto& [set, mass] : cross(space, space.children_of(k, b)))
                active.emplace_back(std::move(set), mass * share);
    } else {
        active.push_back({{}, 1.0});
    }
    for (auto& [set, mass] : active) set.push_back(k);
    if (d.nullable) {
        for (auto& entry : active) entry.second *= 1.0 - d.null_portion;
        active.push_back({{}, d.null_portion});
    }
    return active;
}

std::map<Fss, double> enumerate_with_mass(const FlatSpace& space) {
    std::map<Fss, double> out;
    for (auto& [set, mass] : cross(space, space.root_dims())) {
        Fss fss{std::move(set)};
        std::sort(fss.active.begin(), fss.active.end());
        out[std::move(fss)] += mass;
    }
    return out;
}

}  // namespace

void validate(const InputSpace& space) {
    if (space.dimensions.empty()) throw SpaceError("", "space has no dimensions");
    std::set<std::string> seen;
    for (const auto& spec : space.dimensions) validate_spec(spec, seen);
}

FlatSpace::FlatSpace(std::vector<FlatDimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw SpaceError("", "space has no dimensions");
    std::set<std::string> seen;
    for (auto& d : dims_) {
        d.children.clear();
        if (d.id.empty()) throw SpaceError("", "empty dimension id");
        if (!seen.insert(d.id).second) throw SpaceError(d.id, "duplicate id");
    }
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        FlatDimension& d = dims_[k];
        switch (d.kind) {
            case DimKind::continuous:
                if (!(d.lb < d.ub)) throw SpaceError(d.id, "lb must be < ub");
                break;
            case DimKind::discrete:
            case DimKind::categorical:
                if (d.level_count() < 2) throw SpaceError(d.id, "value_set needs >= 2 values");
                break;
            case DimKind::composite:
                if (d.values != std::vector<double>{1.0})
                    throw SpaceError(d.id, "composite activation level must be {1}");
                break;
            case DimKind::variant:
                if (d.values.empty()) throw SpaceError(d.id, "variant needs branches");
                for (std::size_t b = 0; b < d.values.size(); ++b)
                    if (d.values[b] != static_cast<double>(b))
                        throw SpaceError(d.id, "variant levels must be 0..b-1");
                break;
        }
        if (d.parent) {
            // Parents precede children, so the constraint graph is a forest.
            if (*d.parent >= k) throw SpaceError(d.id, "parent must precede child");
            FlatDimension& p = dims_[*d.parent];
            if (!p.is_parent()) throw SpaceError(d.id, "parent is not a composite or variant");
            if (d.parent_level >= p.level_count())
                throw SpaceError(d.id, "activation level out of range");
            p.children.push_back(k);
            constraints_.push_back({*d.parent, k, d.parent_level, p.values[d.parent_level]});
        } else {
            roots_.push_back(k);
        }
        d.optional = d.nullable || d.parent.has_value();
        if (d.null_portion_from_user) {
            if (!d.nullable) throw SpaceError(d.id, "null_portion set on a non-nullable dimension");
            if (!(d.null_portion > 0.0 && d.null_portion < 1.0))
                throw SpaceError(d.id, "null_portion must lie in (0,1)");
        } else {
            d.null_portion = d.optional ? default_null_portion(d) : 0.0;
        }
        if (d.kind == DimKind::continuous) real_.push_back(k);
        if (d.optional) optional_.push_back(k);
        if (d.is_parent()) parent_.push_back(k);
    }
    for (std::size_t p : parent_) {
        const FlatDimension& d = dims_[p];
        for (std::size_t level = 0; level < d.level_count(); ++level)
            if (children_of(p, level).empty())
                throw SpaceError(d.id, "every activation level needs at least one child");
    }
}

std::optional<std::size_t> FlatSpace::index_of(std::string_view id) const {
    for (std::size_t k = 0; k < dims_.size(); ++k)
        if (dims_[k].id == id) return k;
    return std::nullopt;
}

std::vector<std::size_t> FlatSpace::children_of(std::size_t parent, std::size_t level) const {
    std::vector<std::size_t> out;
    for (std::size_t c : dims_.at(parent).children)
        if (dims_[c].parent_level == level) out.push_back(c);
    return out;
}

std::string FlatSpace::fingerprint() const {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& d : dims_) {
        os << d.id << '|' << to_string(d.kind) << '|' << num(d.lb) << '|' << num(d.ub) << '|';
        for (double v : d.values) os << num(v) << ',';
        os << '|';
        for (const auto& l : d.labels) os << l.size() << ':' << l << ',';
        os << '|' << d.nullable << '|' << num(d.null_portion) << '|';
        if (d.parent) os << *d.parent << '@' << d.parent_level;
        os << '\n';
    }
    return os.str();
}

std::uint64_t FlatSpace::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : fingerprint()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

FlatSpace flatten(const InputSpace& space) {
    validate(space);
    std::vector<FlatDimension> dims;
    for (const auto& spec : space.dimensions) emit(spec, std::nullopt, 0, dims);
    return FlatSpace(std::move(dims));
}

double complexity(const FlatDimension& dim) {
    const double null_unit = dim.optional || dim.nullable ? 1.0 : 0.0;
    switch (dim.kind) {
        case DimKind::continuous:
        case DimKind::composite:
            return 3.0 + null_unit;
        case DimKind::discrete:
        case DimKind::categorical:
        case DimKind::variant:
            return static_cast<double>(dim.level_count()) + null_unit;
    }
    return 3.0 + null_unit;
}

double default_null_portion(const FlatDimension& dim) { return 1.0 / complexity(dim); }

bool Fss::contains(std::size_t k) const {
    return std::binary_search(active.begin(), active.end(), k);
}

std::string to_string(const Fss& fss, const FlatSpace& space) {
    std::string out;
    for (std::size_t k : fss.active) {
        if (!out.empty()) out += ',';
        out += space.dim(k).id;
    }
    return out;
}

std::vector<Fss> derive_full_subspaces(const FlatSpace& space) {
    std::vector<Fss> out;
    for (auto& entry : enumerate_with_mass(space)) out.push_back(entry.first);
    return out;
}

std::map<Fss, double> fss_allocation(const FlatSpace& space) { return enumerate_with_mass(space); }

std::map<std::size_t, std::size_t> activation_levels(const FlatSpace& space, const Fss& fss) {
    std::map<std::size_t, std::size_t> levels;
    for (std::size_t p : space.parent_dims()) {
        if (!fss.contains(p)) continue;
        const FlatDimension& d = space.dim(p);
        std::optional<std::size_t> chosen;
        for (std::size_t b = 0; b < d.level_count() && !chosen; ++b) {
            bool ok = true;
            for (std::size_t c : d.children) {
                const FlatDimension& child = space.dim(c);
                const bool on = fss.contains(c);
                if (child.parent_level == b) {
                    if (!child.nullable && !on) ok = false;
                } else if (on) {
                    ok = false;
                }
            }
            if (ok) chosen = b;
        }
        if (!chosen)
            throw InvariantViolation("full-sub-space {" + to_string(fss, space) +
                                     "} has no consistent level for '" + d.id + "'");
        levels[p] = *chosen;
    }
    return levels;
}

CountAllocation allocate_counts(const std::map<Fss, double>& fractions, std::size_t n,
                                bool force_coverage) {
    if (n == 0) throw Error("allocate_counts: n must be >= 1");
    if (fractions.empty()) throw Error("allocate_counts: no full-sub-spaces");

    std::vector<Fss> keys;
    std::vector<double> share;
    for (const auto& [fss, f] : fractions) {
        keys.push_back(fss);
        share.push_back(f);
    }
    const std::size_t m = keys.size();
    std::vector<std::size_t> counts(m, 0);
    CountAllocation result;

    // Stable sort keeps Fss order among equal keys.
    auto order_by = [&](const std::vector<double>& key) {
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
        return idx;
    };

    if (force_coverage && n < m) {
        result.coverage_infeasible = true;
        auto idx = order_by(share);
        for (std::size_t t = 0; t < n; ++t) counts[idx[t]] = 1;
    } else {
        std::vector<double> remainder(m);
        std::size_t assigned = 0;
        for (std::size_t t = 0; t < m; ++t) {
            const double exact = share[t] * static_cast<double>(n);
            counts[t] = static_cast<std::size_t>(std::floor(exact));
            remainder[t] = exact - std::floor(exact);
            assigned += counts[t];
        }
        // Fractions may not sum to exactly one; trim from the largest counts.
        while (assigned > n) {
            auto it = std::max_element(counts.begin(), counts.end());
            --*it;
            --assigned;
        }
        auto idx = order_by(remainder);
        for (std::size_t t = 0; assigned < n; t = (t + 1) % m) {
            ++counts[idx[t]];
            ++assigned;
        }
        if (force_coverage) {
            for (std::size_t t = 0; t < m; ++t) {
                if (counts[t] != 0) continue;
                auto donor = std::max_element(counts.begin(), counts.end());
                --*donor;
                counts[t] = 1;
            }
        }
    }
    for (std::size_t t = 0; t < m; ++t) result.counts[keys[t]] = counts[t];
    return result;
}

}  // namespace hdoe
