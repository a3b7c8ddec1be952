#pragma once

#include <cstdint>

#include "hdoe/design.hpp"

namespace hdoe {

struct SaConfig {
    std::size_t max_iterations = 0;
    std::uint64_t seed = 0;
};

struct SaResult {
    Design design;
    /// No continuous dimension had two non-Null values to exchange.
    bool no_op = false;
    double initial_value = 0.0;
    double best_value = 0.0;
    std::size_t accepted = 0;
};

/// 100 * n * d.
std::size_t default_maxpro_iterations(std::size_t n, std::size_t d);

/// Simulated annealing on the MaxPro criterion. Each move exchanges the
/// values of two rows that are both non-Null in one continuous dimension, so
/// the optionality projection and every column's value multiset are kept.
/// Temperature falls linearly from 1 to 0 (floored at 1e-9); improvements are
/// always accepted and worsening moves with probability exp(-delta / t). The
/// best design visited is returned.
SaResult sa_maxpro_optimize(const Design& x, const SaConfig& cfg);

}  // namespace hdoe
