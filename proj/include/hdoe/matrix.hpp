#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hdoe {

/// Dense row-major matrix of doubles. Used for unit-cube designs; encoded
/// designs mark Null cells with quiet NaN.
class UnitMatrix {
public:
    UnitMatrix() = default;
    UnitMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t k) { return values_[i * cols_ + k]; }
    double operator()(std::size_t i, std::size_t k) const { return values_[i * cols_ + k]; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    std::vector<double> column(std::size_t k) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, k);
        return out;
    }
    const std::vector<double>& data() const noexcept { return values_; }

    bool operator==(const UnitMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

}  // namespace hdoe
