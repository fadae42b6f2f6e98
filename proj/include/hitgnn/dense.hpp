#pragma once

#include <cmath>
#include <vector>

#include "hitgnn/types.hpp"

namespace hitgnn {

// Row-major dense matrix of doubles. Deliberately minimal: the autodiff ops
// own all the math, this is just storage with bounds-checked construction.
struct DenseMatrix {
    Index rows = 0;
    Index cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(Index r, Index c) : rows(r), cols(c), data(size(), 0.0) {
        if (r < 0 || c < 0) fail_invalid("DenseMatrix: negative dimension");
    }
    DenseMatrix(Index r, Index c, std::vector<double> d)
        : rows(r), cols(c), data(std::move(d)) {
        if (static_cast<std::size_t>(r * c) != data.size())
            fail_invalid("DenseMatrix: data length does not match shape");
    }

    std::size_t size() const {
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    double& at(Index i, Index j) { return data[static_cast<std::size_t>(i * cols + j)]; }
    double at(Index i, Index j) const { return data[static_cast<std::size_t>(i * cols + j)]; }

    double* row_ptr(Index i) { return data.data() + i * cols; }
    const double* row_ptr(Index i) const { return data.data() + i * cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const DenseMatrix& other) const = default;
};

}  // namespace hitgnn
