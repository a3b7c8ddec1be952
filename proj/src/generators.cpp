#include "hdoe/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "hdoe/error.hpp"
#include "hdoe/maxpro.hpp"

namespace hdoe {

namespace {

constexpr double kMergeTolerance = 1e-14;

struct BaseName {
    BaseAlgorithm base;
    const char* id;
    const char* label;
};

constexpr BaseName kBaseNames[] = {
    {BaseAlgorithm::random, "random", "Random"},
    {BaseAlgorithm::fss_random, "fss-random", "FSS-Random"},
    {BaseAlgorithm::fss_lhd, "fss-lhd", "FSS-LHD"},
    {BaseAlgorithm::fss_lhd_vp, "fss-lhd-vp", "FSS-LHD-VP"},
    {BaseAlgorithm::tt_lhd, "tt-lhd", "TT-LHD"},
    {BaseAlgorithm::p_lhd, "p-lhd", "P-LHD"},
};

const BaseName& name_of(BaseAlgorithm base) {
    for (const auto& b : kBaseNames)
        if (b.base == base) return b;
    throw Error("unknown algorithm");
}

// Value of an active (non-Null) cell for unit position u, ignoring the
// dimension's own null region.
Cell active_value(double u, const FlatDimension& dim) {
    u = std::clamp(u, 0.0, 1.0);
    if (dim.kind == DimKind::continuous) return Cell::real(std::min(dim.ub, dim.lb + u * (dim.ub - dim.lb)));
    const std::size_t m = dim.level_count();
    return Cell::level(std::min(static_cast<std::size_t>(std::floor(u * static_cast<double>(m))), m - 1));
}

std::vector<std::size_t> value_dims(const FlatSpace& space, const Fss& fss) {
    std::vector<std::size_t> out;
    for (std::size_t k : fss.active)
        if (!space.dim(k).is_parent()) out.push_back(k);
    return out;
}

// Appends `values.rows()` rows in `fss`: parents at their activation level,
// value dimensions decoded from `values`, everything else Null.
void append_fss_rows(const FlatSpace& space, const Fss& fss, const UnitMatrix& values,
                     std::vector<Cell>& cells) {
    const auto levels = activation_levels(space, fss);
    const auto dims = value_dims(space, fss);
    for (std::size_t r = 0; r < values.rows(); ++r) {
        std::vector<Cell> row(space.size());
        for (const auto& [p, level] : levels) row[p] = Cell::level(level);
        for (std::size_t c = 0; c < dims.size(); ++c) row[dims[c]] = active_value(values(r, c), space.dim(dims[c]));
        cells.insert(cells.end(), row.begin(), row.end());
    }
}

std::size_t tsfd_budget(const GenConfig& cfg, std::size_t rows, std::size_t cols) {
    return cfg.tsfd_iterations.value_or(default_cd_iterations(rows, cols));
}

Provenance base_provenance(const GenConfig& cfg, BaseAlgorithm base) {
    Provenance p;
    p.algorithm = AlgorithmId{base, false}.label();
    p.seed = cfg.seed;
    p.tsfd_iterations = cfg.tsfd_iterations.value_or(0);
    return p;
}

void check_config(const GenConfig& cfg) {
    if (cfg.n == 0) throw Error("design size n must be >= 1");
}

template <typename SubDesign>
Design fss_design(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg,
                  BaseAlgorithm base, SubDesign&& sub_design) {
    check_config(cfg);
    Rng rng(cfg.seed);
    std::vector<Cell> cells;
    for (const auto& [fss, count] : target_counts(*space, cfg)) {
        if (count == 0) continue;
        const std::size_t m = value_dims(*space, fss).size();
        append_fss_rows(*space, fss, sub_design(count, m, rng), cells);
    }
    return Design(space, cfg.n, std::move(cells), base_provenance(cfg, base));
}

// Earliest-deadline matching of stratum demands [lo, hi] onto free pool
// indices. Returns false if some demand cannot be met.
bool demands_feasible(std::vector<std::pair<std::size_t, std::size_t>> demands,
                      const std::vector<char>& taken) {
    std::sort(demands.begin(), demands.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    std::vector<char> used = taken;
    for (const auto& [lo, hi] : demands) {
        std::size_t i = lo;
        while (i <= hi && used[i]) ++i;
        if (i > hi) return false;
        used[i] = 1;
    }
    return true;
}

std::pair<std::size_t, std::size_t> stratum_window(std::size_t pool, std::size_t count, std::size_t j) {
    const std::size_t lo = j * pool / count;
    const std::size_t hi = ((j + 1) * pool + count - 1) / count - 1;
    return {lo, hi};
}

}  // namespace

std::string AlgorithmId::id() const {
    return std::string(name_of(base).id) + (maxpro ? "-mp" : "");
}

std::string AlgorithmId::label() const {
    return std::string(name_of(base).label) + (maxpro ? "-MP" : "");
}

bool AlgorithmId::uses_fss_allocation() const {
    return base == BaseAlgorithm::fss_random || base == BaseAlgorithm::fss_lhd ||
           base == BaseAlgorithm::fss_lhd_vp;
}

AlgorithmId parse_algorithm(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& id : all_algorithms())
        if (id.id() == lower) return id;
    throw Error("unknown algorithm '" + std::string(text) + "'");
}

std::vector<AlgorithmId> all_algorithms() {
    std::vector<AlgorithmId> out;
    for (bool mp : {false, true})
        for (const auto& b : kBaseNames) out.push_back({b.base, mp});
    return out;
}

std::map<Fss, std::size_t> target_counts(const FlatSpace& space, const GenConfig& cfg) {
    if (cfg.allocation) {
        std::size_t total = 0;
        const auto feasible = derive_full_subspaces(space);
        for (const auto& [fss, count] : *cfg.allocation) {
            if (!std::binary_search(feasible.begin(), feasible.end(), fss))
                throw Error("allocation override names an infeasible full-sub-space {" +
                            to_string(fss, space) + "}");
            total += count;
        }
        if (total != cfg.n) throw Error("allocation override does not sum to n");
        return *cfg.allocation;
    }
    return allocate_counts(fss_allocation(space), cfg.n, cfg.force_coverage).counts;
}

Design gen_random(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t d = space->size();
    std::vector<Cell> cells(cfg.n * d);

    for (std::size_t i = 0; i < cfg.n; ++i) {
        Cell* row = cells.data() + i * d;
        std::vector<std::size_t> stack(space->root_dims().rbegin(), space->root_dims().rend());
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            const FlatDimension& dim = space->dim(k);
            if (dim.nullable && unit(rng) < dim.null_portion) continue;
            std::size_t level = 0;
            switch (dim.kind) {
                case DimKind::continuous:
                    row[k] = Cell::real(dim.lb + unit(rng) * (dim.ub - dim.lb));
                    continue;
                case DimKind::discrete:
                case DimKind::categorical:
                    row[k] = Cell::level(std::uniform_int_distribution<std::size_t>(0, dim.level_count() - 1)(rng));
                    continue;
                case DimKind::composite:
                    break;
                case DimKind::variant:
                    level = std::uniform_int_distribution<std::size_t>(0, dim.level_count() - 1)(rng);
                    break;
            }
            row[k] = Cell::level(level);
            const auto kids = space->children_of(k, level);
            stack.insert(stack.end(), kids.rbegin(), kids.rend());
        }
    }
    return Design(space, cfg.n, std::move(cells), base_provenance(cfg, BaseAlgorithm::random));
}

Design gen_fss_random(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    return fss_design(space, cfg, BaseAlgorithm::fss_random, [](std::size_t rows, std::size_t cols, Rng& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        UnitMatrix u(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < cols; ++k) u(i, k) = unit(rng);
        return u;
    });
}

Design gen_fss_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    return fss_design(space, cfg, BaseAlgorithm::fss_lhd, [&](std::size_t rows, std::size_t cols, Rng& rng) {
        return tsfd(rows, cols, rng, tsfd_budget(cfg, rows, cols));
    });
}

std::vector<std::size_t> quantile_positions(std::size_t remaining, std::size_t count) {
    std::vector<std::size_t> out(count);
    for (std::size_t j = 0; j < count; ++j)
        out[j] = static_cast<std::size_t>(std::floor((static_cast<double>(j) + 0.5) *
                                                      static_cast<double>(remaining) / static_cast<double>(count)));
    return out;
}

std::vector<std::vector<std::size_t>> assign_pool_strata(std::size_t pool_size,
                                                         const std::vector<std::size_t>& group_sizes) {
    if (std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0}) != pool_size)
        throw Error("group sizes must sum to the pool size");

    std::vector<char> taken(pool_size, 0);
    std::vector<std::vector<std::size_t>> out(group_sizes.size());
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        const std::size_t count = group_sizes[g];
        for (std::size_t j = 0; j < count; ++j) {
            std::vector<std::size_t> remaining;
            for (std::size_t i = 0; i < pool_size; ++i)
                if (!taken[i]) remaining.push_back(i);
            // Quantile target of this stratum among the values left.
            const std::size_t left = count - j;
            const std::size_t target = remaining[quantile_positions(remaining.size(), left)[0]];

            // Demands still open after this pick.
            std::vector<std::pair<std::size_t, std::size_t>> rest;
            for (std::size_t jj = j + 1; jj < count; ++jj) rest.push_back(stratum_window(pool_size, count, jj));
            for (std::size_t h = g + 1; h < group_sizes.size(); ++h)
                for (std::size_t jj = 0; jj < group_sizes[h]; ++jj)
                    rest.push_back(stratum_window(pool_size, group_sizes[h], jj));

            auto [lo, hi] = stratum_window(pool_size, count, j);
            std::vector<std::size_t> candidates;
            for (std::size_t i = lo; i <= hi; ++i)
                if (!taken[i]) candidates.push_back(i);
            std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
                const auto da = a > target ? a - target : target - a;
                const auto db = b > target ? b - target : target - b;
                return da < db;
            });
            bool placed = false;
            for (std::size_t i : candidates) {
                taken[i] = 1;
                if (demands_feasible(rest, taken)) {
                    out[g].push_back(i);
                    placed = true;
                    break;
                }
                taken[i] = 0;
            }
            if (!placed) throw Error("value pool cannot be stratified for these group sizes");
        }
    }
    return out;
}

Design gen_fss_lhd_vp(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto targets = target_counts(*space, cfg);

    // Largest allocation first, then larger sub-spaces, then Fss order.
    std::vector<std::pair<Fss, std::size_t>> order;
    for (const auto& [fss, count] : targets)
        if (count > 0) order.emplace_back(fss, count);
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first.active.size() > b.first.active.size();
    });

    // drawn[g][k] holds the unit values pulled for dimension k by group g.
    std::vector<std::map<std::size_t, std::vector<double>>> drawn(order.size());
    for (std::size_t k = 0; k < space->size(); ++k) {
        if (space->dim(k).is_parent()) continue;
        std::vector<std::size_t> groups, sizes;
        for (std::size_t g = 0; g < order.size(); ++g)
            if (order[g].first.contains(k)) {
                groups.push_back(g);
                sizes.push_back(order[g].second);
            }
        if (groups.empty()) continue;
        const std::size_t pool = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
        const auto strata = assign_pool_strata(pool, sizes);
        for (std::size_t t = 0; t < groups.size(); ++t) {
            const double c = static_cast<double>(sizes[t]);
            auto& values = drawn[groups[t]][k];
            for (std::size_t j = 0; j < strata[t].size(); ++j) {
                const double i = static_cast<double>(strata[t][j]);
                const double lo = std::max(i / pool, j / c);
                const double hi = std::min((i + 1) / pool, (j + 1) / c);
                values.push_back(std::min(lo + unit(rng) * (hi - lo), std::nextafter(hi, lo)));
            }
        }
    }

    std::map<Fss, UnitMatrix> subs;
    for (std::size_t g = 0; g < order.size(); ++g) {
        const auto& [fss, count] = order[g];
        const auto dims = value_dims(*space, fss);
        UnitMatrix start(count, dims.size());
        for (std::size_t c = 0; c < dims.size(); ++c) {
            auto values = drawn[g][dims[c]];
            std::shuffle(values.begin(), values.end(), rng);
            for (std::size_t r = 0; r < count; ++r) start(r, c) = values[r];
        }
        subs[fss] = optimize_cd(start, tsfd_budget(cfg, count, dims.size()), rng);
    }

    std::vector<Cell> cells;
    for (const auto& [fss, sub] : subs) append_fss_rows(*space, fss, sub, cells);
    return Design(space, cfg.n, std::move(cells), base_provenance(cfg, BaseAlgorithm::fss_lhd_vp));
}

MergeResult merge_child_block(const UnitMatrix& anchor, const UnitMatrix& child, std::size_t budget,
                              Rng& rng) {
    const std::size_t m = child.rows();
    if (anchor.rows() != m) throw Error("merge: anchor and child row counts differ");
    const std::size_t a = anchor.cols();
    UnitMatrix combined(m, a + child.cols());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < a; ++k) combined(i, k) = anchor(i, k);
        for (std::size_t k = 0; k < child.cols(); ++k) combined(i, a + k) = child(i, k);
    }
    MergeResult out{child, centered_l2_discrepancy(combined), 0.0};
    out.cl2_after = out.cl2_before;
    if (m < 2 || a == 0 || child.cols() == 0 || budget == 0) return out;

    std::vector<std::size_t> child_cols(child.cols());
    std::iota(child_cols.begin(), child_cols.end(), a);
    Cl2State state(combined);
    std::uniform_int_distribution<std::size_t> pick_row(0, m - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, m - 2);
    for (std::size_t it = 0; it < budget; ++it) {
        const std::size_t i = pick_row(rng);
        std::size_t j = pick_other(rng);
        if (j >= i) ++j;
        if (state.swap_delta(i, j, child_cols) < -kMergeTolerance) state.commit();
    }
    const double after = centered_l2_discrepancy(state.matrix());
    if (after > out.cl2_before) return out;
    out.cl2_after = after;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < child.cols(); ++k) out.child(i, k) = state.matrix()(i, a + k);
    return out;
}

Design gen_tt_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    const std::size_t n = cfg.n;
    const std::size_t d = space->size();
    std::vector<Cell> cells(n * d);
    std::vector<char> decided(d, 0);

    const auto& roots = space->root_dims();
    const UnitMatrix root = tsfd(n, roots.size(), rng, tsfd_budget(cfg, n, roots.size()));
    for (std::size_t c = 0; c < roots.size(); ++c) {
        for (std::size_t i = 0; i < n; ++i) cells[i * d + roots[c]] = unit_to_value(root(i, c), space->dim(roots[c]));
        decided[roots[c]] = 1;
    }

    // Flat order is depth-first, so a parent's cells exist before its block.
    for (std::size_t p : space->parent_dims()) {
        const FlatDimension& parent = space->dim(p);
        for (std::size_t level = 0; level < parent.level_count(); ++level) {
            const auto kids = space->children_of(p, level);
            std::vector<std::size_t> active;
            for (std::size_t i = 0; i < n; ++i) {
                const Cell& c = cells[i * d + p];
                if (c.is_level() && c.level_index() == level) active.push_back(i);
            }
            const std::size_t m = active.size();
            if (m == 0) {
                for (std::size_t k : kids) decided[k] = 1;
                continue;
            }

            std::vector<std::size_t> anchor_cols;
            for (std::size_t k : space->real_dims()) {
                if (!decided[k]) continue;
                bool complete = true;
                for (std::size_t i : active) complete = complete && !cells[i * d + k].is_null();
                if (complete) anchor_cols.push_back(k);
            }
            UnitMatrix anchor(m, anchor_cols.size());
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < anchor_cols.size(); ++c)
                    anchor(r, c) = unit_position(cells[active[r] * d + anchor_cols[c]], space->dim(anchor_cols[c]));

            const UnitMatrix block = tsfd(m, kids.size(), rng, tsfd_budget(cfg, m, kids.size()));
            const auto merged = merge_child_block(anchor, block, cfg.merge_budget_factor * m, rng);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < kids.size(); ++c)
                    cells[active[r] * d + kids[c]] = unit_to_value(merged.child(r, c), space->dim(kids[c]));
            for (std::size_t k : kids) decided[k] = 1;
        }
    }
    return Design(space, n, std::move(cells), base_provenance(cfg, BaseAlgorithm::tt_lhd));
}

Design gen_p_lhd(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    const std::size_t n = cfg.n;
    const std::size_t d = space->size();
    const UnitMatrix u = tsfd(n, d, rng, tsfd_budget(cfg, n, d));
    std::vector<Cell> cells(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const FlatDimension& dim = space->dim(k);
            if (dim.parent) {
                const Cell& p = cells[i * d + *dim.parent];
                if (!p.is_level() || p.level_index() != dim.parent_level) continue;  // stays Null
            }
            cells[i * d + k] = unit_to_value(u(i, k), dim);
        }
    }
    return Design(space, n, std::move(cells), base_provenance(cfg, BaseAlgorithm::p_lhd));
}

Design generate(const std::shared_ptr<const FlatSpace>& space, const GenConfig& cfg) {
    Design base = [&] {
        switch (cfg.algorithm.base) {
            case BaseAlgorithm::random: return gen_random(space, cfg);
            case BaseAlgorithm::fss_random: return gen_fss_random(space, cfg);
            case BaseAlgorithm::fss_lhd: return gen_fss_lhd(space, cfg);
            case BaseAlgorithm::fss_lhd_vp: return gen_fss_lhd_vp(space, cfg);
            case BaseAlgorithm::tt_lhd: return gen_tt_lhd(space, cfg);
            case BaseAlgorithm::p_lhd: return gen_p_lhd(space, cfg);
        }
        throw Error("unknown algorithm");
    }();
    if (!cfg.algorithm.maxpro) return base;

    SaConfig sa;
    sa.max_iterations = cfg.maxpro_iterations.value_or(default_maxpro_iterations(cfg.n, space->size()));
    // Separate stream so the base design is identical with and without -MP.
    sa.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
    Provenance prov = base.provenance();
    prov.algorithm = cfg.algorithm.label();
    prov.maxpro_iterations = sa.max_iterations;
    return sa_maxpro_optimize(base, sa).design.with_provenance(std::move(prov));
}

}  // namespace hdoe
