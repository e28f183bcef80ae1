#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace lstmrf {

/// Dense row-major matrix of doubles. The workhorse container for windows,
/// feature matrices and anything else shaped (samples x columns).
struct DataMatrix {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    DataMatrix() = default;
    DataMatrix(std::size_t r, std::size_t c) : values(r * c, 0.0), rows(r), cols(c) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    bool empty() const { return rows == 0 || cols == 0; }

    /// Copy of rows [begin, end).
    DataMatrix slice_rows(std::size_t begin, std::size_t end) const {
        DataMatrix out(end - begin, cols);
        std::copy(values.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                  values.begin() + static_cast<std::ptrdiff_t>(end * cols), out.values.begin());
        return out;
    }
};

} // namespace lstmrf
