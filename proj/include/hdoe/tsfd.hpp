#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hdoe/matrix.hpp"

namespace hdoe {

using Rng = std::mt19937_64;

/// Jittered Latin hypercube on [0,1)^d: column k holds (pi_k(i) + U_ik) / n
/// for an independent random permutation pi_k.
UnitMatrix lhs(std::size_t n, std::size_t d, Rng& rng);

/// Squared centered-L2 discrepancy (Hickernell closed form).
double centered_l2_discrepancy(const UnitMatrix& x);

/// Caches the per-row and per-pair product terms of the centered-L2
/// closed form so that exchanging a set of columns between two rows costs
/// O(n * |columns|) instead of O(n^2 d).
class Cl2State {
public:
    explicit Cl2State(UnitMatrix x);

    double value() const;
    const UnitMatrix& matrix() const noexcept { return x_; }

    /// Change in the discrepancy if rows i and j exchanged their values in
    /// `columns`. The candidate is kept until the next call or commit().
    double swap_delta(std::size_t i, std::size_t j, std::span<const std::size_t> columns);

    /// Applies the swap evaluated by the last swap_delta call.
    void commit();

private:
    double pair_term(std::span<const double> a, std::span<const double> b) const;

    UnitMatrix x_;
    std::size_t n_;
    std::vector<double> g_;
    std::vector<double> h_;  // n x n, symmetric
    double sum_g_ = 0.0;
    double sum_h_ = 0.0;

    std::size_t pi_ = 0, pj_ = 0;
    std::vector<std::size_t> pcols_;
    std::vector<double> prow_i_, prow_j_;
    std::vector<double> ph_i_, ph_j_;
    double pg_i_ = 0.0, pg_j_ = 0.0;
    double pdelta_sum_g_ = 0.0, pdelta_sum_h_ = 0.0;
    bool pending_ = false;
};

/// Greedy within-column row-swap optimisation of the centered-L2
/// discrepancy. Swaps are accepted only when they strictly lower the
/// discrepancy, so column value multisets (and stratification) are kept and
/// the result never scores worse than the input. When `trace` is given, the
/// discrepancy after every iteration is appended.
UnitMatrix optimize_cd(const UnitMatrix& x, std::size_t iterations, Rng& rng,
                       std::vector<double>* trace = nullptr);

/// Default swap budget for optimize_cd: 50 * n * d.
std::size_t default_cd_iterations(std::size_t n, std::size_t d);

/// Traditional space-filling design: lhs followed by optimize_cd.
UnitMatrix tsfd(std::size_t n, std::size_t d, Rng& rng,
                std::optional<std::size_t> iterations = std::nullopt);

}  // namespace hdoe
