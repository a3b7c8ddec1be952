#include "hdoe/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "hdoe/error.hpp"
#include "hdoe/tsfd.hpp"

namespace hdoe {

namespace {

inline double unit_dist(double a, double b) {
    const bool na = std::isnan(a);
    const bool nb = std::isnan(b);
    if (na && nb) return 0.0;
    if (na || nb) return 1.0;
    return std::abs(a - b);
}

using Mask = std::vector<std::uint64_t>;

struct CornerAxis {
    std::vector<Mask> closed;
    std::vector<Mask> open;
    std::vector<double> volume;
};

}  // namespace

double dist_k(std::optional<double> a, std::optional<double> b) {
    if (!a && !b) return 0.0;
    if (!a || !b) return 1.0;
    return std::abs(*a - *b);
}

double min_interpoint_distance(const Design& x, double p) {
    if (x.rows() < 2) throw UndefinedMetric("minimum interpoint distance needs at least two points");
    if (!(p >= 1.0)) throw Error("distance exponent p must be >= 1");
    const UnitMatrix u = encode(x);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < u.rows(); ++i)
        for (std::size_t j = i + 1; j < u.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < u.cols(); ++k) s += std::pow(unit_dist(u(i, k), u(j, k)), p);
            best = std::min(best, s);
        }
    return std::pow(best, 1.0 / p);
}

double avg_min_projection_distance(const Design& x) {
    const UnitMatrix u = encode(x);
    double total = 0.0;
    std::size_t qualifying = 0;
    for (std::size_t k : x.space().real_dims()) {
        std::vector<double> v;
        for (std::size_t i = 0; i < u.rows(); ++i)
            if (!std::isnan(u(i, k))) v.push_back(u(i, k));
        if (v.size() < 2) continue;
        std::sort(v.begin(), v.end());
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t t = 1; t < v.size(); ++t) gap = std::min(gap, v[t] - v[t - 1]);
        total += gap;
        ++qualifying;
    }
    if (qualifying == 0)
        throw UndefinedMetric("no continuous dimension has two or more non-Null values");
    return total / static_cast<double>(qualifying);
}

StarDiscrepancy star_discrepancy_null(const Design& x, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const auto& dims = x.space().real_dims();
    if (n == 0 || dims.empty()) return {};
    const UnitMatrix u = encode(x);
    const std::size_t words = (n + 63) / 64;

    std::vector<CornerAxis> axes;
    for (std::size_t k : dims) {
        const FlatDimension& d = x.space().dim(k);
        const double a = d.optional ? d.null_portion : 0.0;
        CornerAxis axis;
        std::set<double> reals;
        bool has_null = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(u(i, k)))
                has_null = true;
            else
                reals.insert(u(i, k));
        }
        reals.insert(1.0);
        if (has_null || a > 0.0) {
            Mask m(words, 0);
            for (std::size_t i = 0; i < n; ++i)
                if (std::isnan(u(i, k))) m[i / 64] |= 1ULL << (i % 64);
            axis.closed.push_back(m);
            axis.open.push_back(m);
            axis.volume.push_back(a);
        }
        for (double c : reals) {
            Mask closed(words, 0), open(words, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = u(i, k);
                if (std::isnan(v) || v <= c) closed[i / 64] |= 1ULL << (i % 64);
                if (std::isnan(v) || v < c) open[i / 64] |= 1ULL << (i % 64);
            }
            axis.closed.push_back(std::move(closed));
            axis.open.push_back(std::move(open));
            axis.volume.push_back(a + c * (1.0 - a));
        }
        axes.push_back(std::move(axis));
    }

    const double nn = static_cast<double>(n);
    Mask closed(words), open(words);
    auto corner_value = [&](const std::vector<std::size_t>& pick) {
        std::fill(closed.begin(), closed.end(), ~0ULL);
        std::fill(open.begin(), open.end(), ~0ULL);
        double volume = 1.0;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const auto& c = axes[a].closed[pick[a]];
            const auto& o = axes[a].open[pick[a]];
            for (std::size_t w = 0; w < words; ++w) {
                closed[w] &= c[w];
                open[w] &= o[w];
            }
            volume *= axes[a].volume[pick[a]];
        }
        std::size_t in_closed = 0, in_open = 0;
        for (std::size_t w = 0; w < words; ++w) {
            in_closed += std::popcount(closed[w]);
            in_open += std::popcount(open[w]);
        }
        return std::max(static_cast<double>(in_closed) / nn - volume,
                        volume - static_cast<double>(in_open) / nn);
    };

    std::uint64_t corners = 1;
    bool exact = true;
    for (const auto& axis : axes) {
        corners *= axis.volume.size();
        if (corners > kExactCornerLimit) {
            exact = false;
            break;
        }
    }

    StarDiscrepancy out;
    std::vector<std::size_t> pick(axes.size(), 0);
    if (exact) {
        for (;;) {
            out.value = std::max(out.value, corner_value(pick));
            std::size_t a = 0;
            while (a < axes.size() && ++pick[a] == axes[a].volume.size()) pick[a++] = 0;
            if (a == axes.size()) break;
        }
    } else {
        out.estimate = true;
        Rng rng(seed);
        for (std::size_t s = 0; s < kSampledCorners; ++s) {
            for (std::size_t a = 0; a < axes.size(); ++a)
                pick[a] = std::uniform_int_distribution<std::size_t>(0, axes[a].volume.size() - 1)(rng);
            out.value = std::max(out.value, corner_value(pick));
        }
    }
    return out;
}

double maxpro_offset(const FlatDimension& dim) {
    if (dim.optional) return dim.null_portion;
    if (dim.kind == DimKind::continuous) return 0.0;
    return 1.0 / complexity(dim);
}

double maxpro(const UnitMatrix& encoded, std::span<const double> offsets) {
    const std::size_t n = encoded.rows();
    const std::size_t d = encoded.cols();
    if (n < 2) throw UndefinedMetric("MaxPro needs at least two points");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double prod = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double t = unit_dist(encoded(i, k), encoded(j, k)) + offsets[k];
                prod *= t * t;
            }
            if (prod == 0.0) return std::numeric_limits<double>::infinity();
            sum += 1.0 / prod;
        }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return std::pow(sum / pairs, 1.0 / static_cast<double>(d));
}

double maxpro(const Design& x) {
    std::vector<double> offsets;
    for (const auto& d : x.space().dims()) offsets.push_back(maxpro_offset(d));
    return maxpro(encode(x), offsets);
}

std::map<Fss, std::size_t> realised_allocation(const Design& x) {
    std::map<Fss, std::size_t> out;
    for (std::size_t i = 0; i < x.rows(); ++i) ++out[fss_of_point(x.space(), x.row(i))];
    return out;
}

double weighted_fss_discrepancy(const Design& x, const std::map<Fss, std::size_t>& targets) {
    const UnitMatrix u = encode(x);
    std::map<Fss, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < x.rows(); ++i) members[fss_of_point(x.space(), x.row(i))].push_back(i);

    double total = 0.0;
    for (const auto& [fss, target] : targets) {
        auto it = members.find(fss);
        if (target == 0 || it == members.end()) continue;
        std::vector<std::size_t> cols;
        for (std::size_t k : fss.active)
            if (x.space().dim(k).kind == DimKind::continuous) cols.push_back(k);
        if (cols.empty()) continue;
        const auto& rows = it->second;
        UnitMatrix sub(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = u(rows[r], cols[c]);
        total += static_cast<double>(target) / static_cast<double>(x.rows()) *
                 centered_l2_discrepancy(sub);
    }
    return total;
}

double opt_coverage(const Design& x) {
    const OptProjection proj = opt_projection(x);
    std::set<std::vector<std::uint8_t>> patterns;
    for (std::size_t i = 0; i < proj.rows; ++i)
        patterns.emplace(proj.bits.begin() + i * proj.cols, proj.bits.begin() + (i + 1) * proj.cols);
    return static_cast<double>(patterns.size()) /
           static_cast<double>(derive_full_subspaces(x.space()).size());
}

std::size_t allocation_difference(const Design& x, const std::map<Fss, std::size_t>& targets) {
    const auto actual = realised_allocation(x);
    std::size_t diff = 0;
    for (const auto& [fss, target] : targets) {
        auto it = actual.find(fss);
        const std::size_t got = it == actual.end() ? 0 : it->second;
        diff += got > target ? got - target : target - got;
    }
    for (const auto& [fss, got] : actual)
        if (!targets.contains(fss)) diff += got;
    return diff;
}

MetricReport evaluate(const Design& x, const std::map<Fss, std::size_t>& targets, double p) {
    MetricReport r;
    r.ocov = opt_coverage(x);
    r.idis = min_interpoint_distance(x, p);
    r.adis = avg_min_projection_distance(x);
    const auto sd = star_discrepancy_null(x);
    r.sdsr = sd.value;
    r.sdsr_estimate = sd.estimate;
    r.wdsr = weighted_fss_discrepancy(x, targets);
    r.maxpro = maxpro(x);
    r.alloc_diff = allocation_difference(x, targets);
    return r;
}

}  // namespace hdoe
