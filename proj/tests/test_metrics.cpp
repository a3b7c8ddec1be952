#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hdoe/bench.hpp"
#include "hdoe/error.hpp"
#include "hdoe/generators.hpp"
#include "hdoe/metrics.hpp"
#include "hdoe/tsfd.hpp"
#include "support/oracles.hpp"

using namespace hdoe;

namespace {

std::shared_ptr<const FlatSpace> unit_space(std::size_t d, bool nullable = false) {
    std::string doc = R"({"dimensions": [)";
    for (std::size_t k = 0; k < d; ++k) {
        doc += (k ? "," : "") + std::string(R"({"id": "u)") + std::to_string(k) +
               R"(", "kind": "continuous", "lb": 0, "ub": 1)" + (nullable ? R"(, "nullable": true})" : "}");
    }
    return oracle::space_from_json(doc + "]}");
}

/// Design over unit_space(cols); NaN entries become Null.
Design design_of(const std::vector<std::vector<double>>& rows, bool nullable = false) {
    auto space = unit_space(rows.front().size(), nullable);
    std::vector<Cell> cells;
    for (const auto& r : rows)
        for (double v : r) cells.push_back(std::isnan(v) ? Cell::null() : Cell::real(v));
    return Design(space, rows.size(), cells);
}

Design generated(const std::string& space, const std::string& algo, std::size_t n, std::uint64_t seed) {
    GenConfig cfg;
    cfg.algorithm = parse_algorithm(algo);
    cfg.n = n;
    cfg.seed = seed;
    return generate(std::make_shared<const FlatSpace>(builtin_space(space)), cfg);
}

std::map<Fss, std::size_t> targets_for(const Design& x) {
    return allocate_counts(fss_allocation(x.space()), x.rows(), false).counts;
}

const double N = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST(DistK, Table) {
    EXPECT_EQ(dist_k(std::nullopt, std::nullopt), 0.0);
    EXPECT_EQ(dist_k(std::nullopt, 0.3), 1.0);
    EXPECT_EQ(dist_k(0.3, std::nullopt), 1.0);
    EXPECT_NEAR(dist_k(0.2, 0.7), 0.5, 1e-15);
}

TEST(DistK, SymmetricAndTriangular) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto cell = [&]() -> std::optional<double> {
        if (u(rng) < 0.3) return std::nullopt;
        return u(rng);
    };
    for (int t = 0; t < 2000; ++t) {
        const auto a = cell(), b = cell(), c = cell();
        EXPECT_EQ(dist_k(a, b), dist_k(b, a));
        EXPECT_LE(dist_k(a, c), dist_k(a, b) + dist_k(b, c) + 1e-15);
        EXPECT_GE(dist_k(a, b), 0.0);
        EXPECT_LE(dist_k(a, b), 1.0);
    }
}

TEST(MinInterpointDistance, Examples) {
    EXPECT_NEAR(min_interpoint_distance(design_of({{0, 0}, {1, 1}})), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(min_interpoint_distance(design_of({{0.3, 0.3}, {0.3, 0.3}, {0.9, 0.1}})), 0.0);
    EXPECT_NEAR(min_interpoint_distance(design_of({{0.0}, {0.4}, {1.0}})), 0.4, 1e-15);
    EXPECT_NEAR(min_interpoint_distance(design_of({{0, 0}, {1, 1}}), 1.0), 2.0, 1e-15);
}

TEST(MinInterpointDistance, NullAwareAndErrors) {
    // Rows differ by Null vs 0.4 in u1 and 0.1 in u0.
    const Design x = design_of({{0.2, N}, {0.3, 0.4}}, true);
    EXPECT_NEAR(min_interpoint_distance(x), std::sqrt(0.01 + 1.0), 1e-12);
    EXPECT_THROW(min_interpoint_distance(design_of({{0.5}})), UndefinedMetric);
    EXPECT_THROW(min_interpoint_distance(design_of({{0.5}, {0.1}}), 0.5), Error);
}

TEST(MinInterpointDistance, RowPermutationInvariant) {
    const Design x = generated("modest", "random", 30, 3);
    std::vector<Cell> cells;
    for (std::size_t i = x.rows(); i-- > 0;)
        for (const Cell& c : x.row(i)) cells.push_back(c);
    const Design y(x.space_ptr(), x.rows(), cells);
    EXPECT_DOUBLE_EQ(min_interpoint_distance(x), min_interpoint_distance(y));
    EXPECT_DOUBLE_EQ(maxpro(x), maxpro(y));
}

TEST(AvgMinProjectionDistance, Examples) {
    EXPECT_DOUBLE_EQ(avg_min_projection_distance(design_of({{0.0}, {0.5}, {1.0}})), 0.5);
    EXPECT_NEAR(avg_min_projection_distance(design_of({{0.1, N}, {0.3, 0.5}, {0.9, N}}, true)), 0.2, 1e-15);
    EXPECT_DOUBLE_EQ(avg_min_projection_distance(design_of({{0.2, 0.1}, {0.2, 0.9}})), 0.4);
    EXPECT_THROW(avg_min_projection_distance(design_of({{0.2, N}, {N, 0.3}}, true)), UndefinedMetric);
}

TEST(StarDiscrepancy, OneDimensionalExamples) {
    EXPECT_NEAR(star_discrepancy_null(design_of({{0.5}})).value, 0.5, 1e-12);
    const auto all_null = star_discrepancy_null(design_of({{N}, {N}, {N}}, true));
    EXPECT_NEAR(all_null.value, 0.75, 1e-12);
    EXPECT_FALSE(all_null.estimate);
    std::vector<std::vector<double>> centred;
    for (int i = 0; i < 8; ++i) centred.push_back({(i + 0.5) / 8.0});
    EXPECT_NEAR(star_discrepancy_null(design_of(centred)).value, 1.0 / 16.0, 1e-12);
}

TEST(StarDiscrepancy, MatchesGridOracle) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 1 + t % 8;
        const std::size_t d = 1 + t % 2;
        std::vector<std::vector<double>> rows(n, std::vector<double>(d));
        UnitMatrix m(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < d; ++k) m(i, k) = rows[i][k] = u(rng);
        EXPECT_NEAR(star_discrepancy_null(design_of(rows)).value, oracle::grid_star_discrepancy(m), 1e-9);
    }
}

TEST(StarDiscrepancy, NullRegionShiftsVolume) {
    // One point in the null region of a nullable dim with a 0.25 null portion:
    // the box [Null, Null] holds every point but has volume 0.25.
    const auto r = star_discrepancy_null(design_of({{N}}, true));
    EXPECT_NEAR(r.value, 0.75, 1e-12);
    // One point at 0.5: the open box below it has volume 0.25 + 0.5 * 0.75.
    const auto s = star_discrepancy_null(design_of({{0.5}}, true));
    EXPECT_NEAR(s.value, 0.625, 1e-12);
}

TEST(StarDiscrepancy, LargeDesignsAreEstimated) {
    const Design x = generated("complex", "p-lhd", 96, 1);
    const auto r = star_discrepancy_null(x);
    EXPECT_TRUE(r.estimate);
    EXPECT_GT(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
    EXPECT_EQ(r.value, star_discrepancy_null(x).value);
}

TEST(MaxPro, Examples) {
    EXPECT_DOUBLE_EQ(maxpro(design_of({{0.0}, {1.0}})), 1.0);
    EXPECT_DOUBLE_EQ(maxpro(design_of({{N}, {N}}, true)), 16.0);
    EXPECT_TRUE(std::isinf(maxpro(design_of({{0.4, 0.1}, {0.4, 0.1}}))));
}

TEST(MaxPro, MatchesNaiveOracle) {
    for (const auto& name : builtin_space_names()) {
        const Design x = generated(name, "random", 25, 4);
        std::vector<double> offsets;
        for (const auto& dim : x.space().dims()) offsets.push_back(maxpro_offset(dim));
        EXPECT_NEAR(maxpro(x), oracle::naive_maxpro(encode(x), offsets), 1e-9 * maxpro(x)) << name;
    }
}

TEST(MaxPro, SeparatingDuplicateCoordinateImproves) {
    const double close = maxpro(design_of({{0.2, 0.3}, {0.2, 0.8}, {0.9, 0.5}}));
    const double apart = maxpro(design_of({{0.2, 0.3}, {0.6, 0.8}, {0.9, 0.5}}));
    EXPECT_TRUE(std::isinf(close));
    EXPECT_LT(apart, close);
    const double near = maxpro(design_of({{0.2, 0.3}, {0.25, 0.8}, {0.9, 0.5}}));
    EXPECT_LT(apart, near);
}

TEST(MaxPro, Offsets) {
    const FlatSpace s = builtin_space("simple");
    EXPECT_EQ(maxpro_offset(s.dim(0)), 0.0);
    EXPECT_EQ(maxpro_offset(s.dim(1)), 0.25);
    EXPECT_EQ(maxpro_offset(s.dim(2)), 0.25);
    FlatDimension cat;
    cat.kind = DimKind::categorical;
    cat.labels = {"a", "b", "c"};
    EXPECT_DOUBLE_EQ(maxpro_offset(cat), 1.0 / 3.0);
}

TEST(WeightedDiscrepancy, SingleFssIsPlainCl2) {
    const Design x = design_of({{0.1, 0.7}, {0.4, 0.2}, {0.8, 0.9}});
    UnitMatrix m(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 2; ++k) m(i, k) = x.at(i, k).value();
    EXPECT_NEAR(weighted_fss_discrepancy(x, targets_for(x)), oracle::naive_cl2(m), 1e-12);
}

TEST(WeightedDiscrepancy, MatchesIndependentSum) {
    const Design x = generated("basic", "fss-lhd", 16, 5);
    const auto targets = targets_for(x);
    double expected = 0.0;
    for (const auto& [pattern, rows] : oracle::rows_by_pattern(x)) {
        UnitMatrix sub(rows.size(), pattern.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < pattern.size(); ++c) sub(r, c) = x.at(rows[r], pattern[c]).value();
        expected += static_cast<double>(targets.at(Fss{pattern})) / 16.0 * oracle::naive_cl2(sub);
    }
    EXPECT_NEAR(weighted_fss_discrepancy(x, targets), expected, 1e-12);
}

TEST(WeightedDiscrepancy, EmptySubDesignContributesNothing) {
    auto space = std::make_shared<const FlatSpace>(builtin_space("basic"));
    const Design x(space, 2, {Cell::real(0.2), Cell::null(), Cell::null(), Cell::real(0.7), Cell::null(), Cell::null()});
    std::map<Fss, std::size_t> targets{{Fss{{0}}, 1}, {Fss{{0, 1, 2}}, 1}};
    UnitMatrix only(2, 1);
    only(0, 0) = 0.2;
    only(1, 0) = 0.7;
    EXPECT_NEAR(weighted_fss_discrepancy(x, targets), 0.5 * oracle::naive_cl2(only), 1e-12);
}

TEST(OptCoverage, Examples) {
    auto space = std::make_shared<const FlatSpace>(builtin_space("basic"));
    const Design every(space, 4,
                       {Cell::real(0.1), Cell::null(), Cell::null(), Cell::real(0.2), Cell::real(0.5), Cell::null(),
                        Cell::real(0.3), Cell::null(), Cell::real(0.5), Cell::real(0.4), Cell::real(0.6), Cell::real(0.7)});
    EXPECT_EQ(opt_coverage(every), 1.0);
    const Design same(space, 2, {Cell::real(0.1), Cell::null(), Cell::null(), Cell::real(0.2), Cell::null(), Cell::null()});
    EXPECT_EQ(opt_coverage(same), 0.25);
}

TEST(AllocationDifference, Examples) {
    const Design x = generated("simple", "fss-lhd", 40, 6);
    auto targets = targets_for(x);
    EXPECT_EQ(allocation_difference(x, targets), 0u);
    auto moved = targets;
    auto it = moved.begin();
    --it->second;
    ++std::next(it)->second;
    EXPECT_EQ(allocation_difference(x, moved), 2u);
}

TEST(AllocationDifference, RandomDesignRecount) {
    const Design x = generated("complex", "random", 64, 7);
    const auto targets = targets_for(x);
    std::map<Fss, std::size_t> seen;
    for (const auto& [pattern, rows] : oracle::rows_by_pattern(x)) seen[Fss{pattern}] = rows.size();
    std::size_t expected = 0;
    for (const auto& f : derive_full_subspaces(x.space())) {
        const long a = seen.contains(f) ? static_cast<long>(seen[f]) : 0;
        const long b = targets.contains(f) ? static_cast<long>(targets.at(f)) : 0;
        expected += static_cast<std::size_t>(std::labs(a - b));
    }
    EXPECT_EQ(allocation_difference(x, targets), expected);
    EXPECT_EQ(realised_allocation(x), seen);
}

TEST(Evaluate, ReportIsFiniteAndBounded) {
    const Design x = generated("modest", "fss-lhd-vp", 32, 8);
    const MetricReport r = evaluate(x, targets_for(x));
    EXPECT_GT(r.ocov, 0.0);
    EXPECT_LE(r.ocov, 1.0);
    EXPECT_GT(r.idis, 0.0);
    EXPECT_GT(r.adis, 0.0);
    EXPECT_GE(r.sdsr, 0.0);
    EXPECT_LE(r.sdsr, 1.0);
    EXPECT_GE(r.wdsr, 0.0);
    EXPECT_TRUE(std::isfinite(r.maxpro));
    EXPECT_EQ(r.alloc_diff, 0u);
}
