#include "hdoe/tsfd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hdoe {

namespace {

// Accepting only clearly negative deltas keeps round-off from admitting
// neutral swaps.
constexpr double kImprovementTolerance = 1e-14;

inline double row_term(double x) {
    const double c = std::abs(x - 0.5);
    return 1.0 + 0.5 * c - 0.5 * c * c;
}

inline double cross_term(double x, double y) {
    return 1.0 + 0.5 * std::abs(x - 0.5) + 0.5 * std::abs(y - 0.5) - 0.5 * std::abs(x - y);
}

double row_product(std::span<const double> a) {
    double p = 1.0;
    for (double v : a) p *= row_term(v);
    return p;
}

}  // namespace

UnitMatrix lhs(std::size_t n, std::size_t d, Rng& rng) {
    UnitMatrix out(n, d);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < d; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            double v = (static_cast<double>(perm[i]) + jitter(rng)) / static_cast<double>(n);
            // Guard the open upper end of the stratum against rounding.
            out(i, k) = std::min(v, std::nextafter(static_cast<double>(perm[i] + 1) / n, 0.0));
        }
    }
    return out;
}

double centered_l2_discrepancy(const UnitMatrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0) return 0.0;
    double sum_g = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum_g += row_product(x.row(i));
    double sum_h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double p = 1.0;
            for (std::size_t k = 0; k < d; ++k) p *= cross_term(x(i, k), x(j, k));
            sum_h += p;
        }
    }
    const double nn = static_cast<double>(n);
    return std::pow(13.0 / 12.0, static_cast<double>(d)) - 2.0 / nn * sum_g + sum_h / (nn * nn);
}

Cl2State::Cl2State(UnitMatrix x) : x_(std::move(x)), n_(x_.rows()), g_(n_), h_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
        g_[i] = row_product(x_.row(i));
        sum_g_ += g_[i];
    }
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j) {
            const double p = pair_term(x_.row(i), x_.row(j));
            h_[i * n_ + j] = h_[j * n_ + i] = p;
            sum_h_ += i == j ? p : 2.0 * p;
        }
}

double Cl2State::pair_term(std::span<const double> a, std::span<const double> b) const {
    double p = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) p *= cross_term(a[k], b[k]);
    return p;
}

double Cl2State::value() const {
    const double nn = static_cast<double>(n_);
    return std::pow(13.0 / 12.0, static_cast<double>(x_.cols())) - 2.0 / nn * sum_g_ +
           sum_h_ / (nn * nn);
}

double Cl2State::swap_delta(std::size_t i, std::size_t j, std::span<const std::size_t> columns) {
    pi_ = i;
    pj_ = j;
    pcols_.assign(columns.begin(), columns.end());
    prow_i_.assign(x_.row(i).begin(), x_.row(i).end());
    prow_j_.assign(x_.row(j).begin(), x_.row(j).end());
    for (std::size_t k : columns) std::swap(prow_i_[k], prow_j_[k]);

    pg_i_ = row_product(prow_i_);
    pg_j_ = row_product(prow_j_);
    ph_i_.resize(n_);
    ph_j_.resize(n_);
    double dh = 0.0;
    for (std::size_t l = 0; l < n_; ++l) {
        if (l == i || l == j) continue;
        ph_i_[l] = pair_term(prow_i_, x_.row(l));
        ph_j_[l] = pair_term(prow_j_, x_.row(l));
        dh += 2.0 * (ph_i_[l] - h_[i * n_ + l] + ph_j_[l] - h_[j * n_ + l]);
    }
    ph_i_[i] = pair_term(prow_i_, prow_i_);
    ph_j_[j] = pair_term(prow_j_, prow_j_);
    ph_i_[j] = ph_j_[i] = h_[i * n_ + j];
    dh += ph_i_[i] - h_[i * n_ + i] + ph_j_[j] - h_[j * n_ + j];

    pdelta_sum_g_ = pg_i_ + pg_j_ - g_[i] - g_[j];
    pdelta_sum_h_ = dh;
    pending_ = true;
    const double nn = static_cast<double>(n_);
    return -2.0 / nn * pdelta_sum_g_ + dh / (nn * nn);
}

void Cl2State::commit() {
    if (!pending_) return;
    for (std::size_t k : pcols_) std::swap(x_(pi_, k), x_(pj_, k));
    g_[pi_] = pg_i_;
    g_[pj_] = pg_j_;
    for (std::size_t l = 0; l < n_; ++l) {
        h_[pi_ * n_ + l] = h_[l * n_ + pi_] = ph_i_[l];
        h_[pj_ * n_ + l] = h_[l * n_ + pj_] = ph_j_[l];
    }
    sum_g_ += pdelta_sum_g_;
    sum_h_ += pdelta_sum_h_;
    pending_ = false;
}

std::size_t default_cd_iterations(std::size_t n, std::size_t d) { return 50 * n * d; }

UnitMatrix optimize_cd(const UnitMatrix& x, std::size_t iterations, Rng& rng,
                       std::vector<double>* trace) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (iterations == 0 || n < 2 || d == 0) return x;

    Cl2State state(x);
    std::uniform_int_distribution<std::size_t> pick_col(0, d - 1);
    std::uniform_int_distribution<std::size_t> pick_row(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, n - 2);
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t k = pick_col(rng);
        const std::size_t i = pick_row(rng);
        std::size_t j = pick_other(rng);
        if (j >= i) ++j;
        const std::size_t col[1] = {k};
        if (state.swap_delta(i, j, col) < -kImprovementTolerance) state.commit();
        if (trace) trace->push_back(state.value());
    }
    // The cached sums drift slightly; the exact value decides.
    if (centered_l2_discrepancy(state.matrix()) > centered_l2_discrepancy(x)) return x;
    return state.matrix();
}

UnitMatrix tsfd(std::size_t n, std::size_t d, Rng& rng, std::optional<std::size_t> iterations) {
    UnitMatrix start = lhs(n, d, rng);
    return optimize_cd(start, iterations.value_or(default_cd_iterations(n, d)), rng);
}

}  // namespace hdoe
