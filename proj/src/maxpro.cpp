#include "hdoe/maxpro.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "hdoe/metrics.hpp"
#include "hdoe/tsfd.hpp"

namespace hdoe {

namespace {

constexpr double kMinTemperature = 1e-9;

inline double pair_dist(double a, double b) {
    const bool na = std::isnan(a);
    const bool nb = std::isnan(b);
    if (na && nb) return 0.0;
    if (na || nb) return 1.0;
    return std::abs(a - b);
}

// Incremental MaxPro objective: keeps the pairwise products
// prod_k (dist_k + offset_k)^2 and the sum of their reciprocals.
class MaxProState {
public:
    MaxProState(UnitMatrix u, std::vector<double> offsets)
        : u_(std::move(u)), offsets_(std::move(offsets)), n_(u_.rows()), prod_(n_ * n_, 1.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) prod_[i * n_ + j] = prod_[j * n_ + i] = pair(u_.row(i), u_.row(j));
        resum();
    }

    double value() const { return objective(sum_, zeros_); }
    const UnitMatrix& matrix() const { return u_; }

    /// Objective after exchanging u(i,k) and u(j,k); remembered for commit().
    /// Only factor k of each affected product changes, so products are
    /// rescaled by that factor unless it was zero.
    double propose(std::size_t i, std::size_t j, std::size_t k) {
        pi_ = i;
        pj_ = j;
        pk_ = k;
        const double ui = u_(i, k);
        const double uj = u_(j, k);
        new_i_.resize(n_);
        new_j_.resize(n_);
        double sum = sum_;
        long zeros = zeros_;
        for (std::size_t l = 0; l < n_; ++l) {
            if (l == i || l == j) continue;
            const double ul = u_(l, k);
            const double old_i = prod_[i * n_ + l];
            const double old_j = prod_[j * n_ + l];
            new_i_[l] = rescaled(old_i, factor(k, ui, ul), factor(k, uj, ul), i, l, uj);
            new_j_[l] = rescaled(old_j, factor(k, uj, ul), factor(k, ui, ul), j, l, ui);
            for (double old : {old_i, old_j}) {
                if (old == 0.0) --zeros; else sum -= 1.0 / old;
            }
            for (double now : {new_i_[l], new_j_[l]}) {
                if (now == 0.0) ++zeros; else sum += 1.0 / now;
            }
        }
        cand_sum_ = sum;
        cand_zeros_ = zeros;
        return objective(sum, zeros);
    }

    void commit() {
        std::swap(u_(pi_, pk_), u_(pj_, pk_));
        for (std::size_t l = 0; l < n_; ++l) {
            if (l == pi_ || l == pj_) continue;
            prod_[pi_ * n_ + l] = prod_[l * n_ + pi_] = new_i_[l];
            prod_[pj_ * n_ + l] = prod_[l * n_ + pj_] = new_j_[l];
        }
        sum_ = cand_sum_;
        zeros_ = cand_zeros_;
    }

    /// Recomputes every product and the reciprocal sum from the matrix.
    void refresh() {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) prod_[i * n_ + j] = prod_[j * n_ + i] = pair(u_.row(i), u_.row(j));
        resum();
    }

    /// Recomputes the reciprocal sum from the cached products.
    void resum() {
        sum_ = 0.0;
        zeros_ = 0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double p = prod_[i * n_ + j];
                if (p == 0.0) ++zeros_; else sum_ += 1.0 / p;
            }
    }

private:
    double factor(std::size_t k, double a, double b) const {
        const double t = pair_dist(a, b) + offsets_[k];
        return t * t;
    }

    /// Product of row `r` against row `l` once u(r,k) becomes `value`.
    double rescaled(double old, double old_factor, double new_factor, std::size_t r, std::size_t l, double value) {
        if (old_factor != 0.0) return old / old_factor * new_factor;
        scratch_.assign(u_.row(r).begin(), u_.row(r).end());
        scratch_[pk_] = value;
        return pair(scratch_, u_.row(l));
    }

    double pair(std::span<const double> a, std::span<const double> b) const {
        double p = 1.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double t = pair_dist(a[k], b[k]) + offsets_[k];
            p *= t * t;
        }
        return p;
    }

    double objective(double sum, long zeros) const {
        if (zeros > 0) return std::numeric_limits<double>::infinity();
        const double pairs = 0.5 * static_cast<double>(n_) * static_cast<double>(n_ - 1);
        return std::pow(sum / pairs, 1.0 / static_cast<double>(u_.cols()));
    }

    UnitMatrix u_;
    std::vector<double> offsets_;
    std::size_t n_;
    std::vector<double> prod_;
    double sum_ = 0.0;
    long zeros_ = 0;

    std::size_t pi_ = 0, pj_ = 0, pk_ = 0;
    std::vector<double> new_i_, new_j_, scratch_;
    double cand_sum_ = 0.0;
    long cand_zeros_ = 0;
};

}  // namespace

std::size_t default_maxpro_iterations(std::size_t n, std::size_t d) { return 100 * n * d; }

SaResult sa_maxpro_optimize(const Design& x, const SaConfig& cfg) {
    const FlatSpace& space = x.space();
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    const UnitMatrix encoded = encode(x);
    std::vector<std::size_t> eligible;
    std::vector<std::vector<std::size_t>> present(d);
    for (std::size_t k : space.real_dims()) {
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(encoded(i, k))) present[k].push_back(i);
        if (present[k].size() >= 2) eligible.push_back(k);
    }

    SaResult result{x, eligible.empty(), 0.0, 0.0, 0};
    if (n < 2) return result;
    result.initial_value = result.best_value = maxpro(x);
    if (eligible.empty() || cfg.max_iterations == 0) return result;

    std::vector<double> offsets;
    for (const auto& dim : space.dims()) offsets.push_back(maxpro_offset(dim));
    MaxProState state(encoded, offsets);

    std::vector<Cell> cells = x.cells();
    std::vector<Cell> best_cells = cells;
    double current = state.value();
    double best = current;

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_dim(0, eligible.size() - 1);
    const std::size_t resum_every = std::max<std::size_t>(1, n * d);
    const std::size_t total = cfg.max_iterations;

    for (std::size_t m = 1; m <= total; ++m) {
        const double t = std::max(kMinTemperature, 1.0 - static_cast<double>(m) / static_cast<double>(total));
        const std::size_t k = eligible[pick_dim(rng)];
        const auto& rows = present[k];
        std::uniform_int_distribution<std::size_t> pick_row(0, rows.size() - 1);
        const std::size_t i = rows[pick_row(rng)];
        std::size_t j = rows[pick_row(rng)];
        while (j == i) j = rows[pick_row(rng)];

        const double candidate = state.propose(i, j, k);
        double delta = candidate - current;
        if (std::isnan(delta)) delta = 0.0;  // both infinite
        const bool accept = delta < 0.0 || unit(rng) < std::exp(-delta / t);
        if (accept) {
            state.commit();
            std::swap(cells[i * d + k], cells[j * d + k]);
            current = candidate;
            ++result.accepted;
            if (current < best) {
                best = current;
                best_cells = cells;
            }
        }
        if (m % resum_every == 0) {
            state.refresh();
            current = state.value();
        }
    }

    Design optimised(x.space_ptr(), n, std::move(best_cells), x.provenance());
    const double exact = maxpro(optimised);
    // Cached sums drift; only hand back a design that is verifiably no worse.
    if (exact <= result.initial_value) {
        result.design = std::move(optimised);
        result.best_value = exact;
    }
    return result;
}

}  // namespace hdoe
