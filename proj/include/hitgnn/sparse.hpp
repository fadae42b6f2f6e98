#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hitgnn/types.hpp"

namespace hitgnn {

struct CooEntry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;

    friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

// Coordinate-format sparse matrix. `canonicalize` sorts by (row, col), sums
// duplicate coordinates and drops entries whose value is exactly zero, so a
// canonical matrix has strictly increasing (row, col) pairs and no explicit
// zeros.
struct CooMatrix {
    Index n_rows = 0;
    Index n_cols = 0;
    std::vector<CooEntry> entries;

    Index nnz() const { return static_cast<Index>(entries.size()); }

    void canonicalize();
    bool is_canonical() const;

    friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

// Compressed sparse rows. Within each row, column indices are strictly
// increasing; explicit zeros are dropped on construction.
struct CsrMatrix {
    Index n_rows = 0;
    Index n_cols = 0;
    std::vector<Index> row_ptr;  // length n_rows + 1
    std::vector<Index> col_idx;  // length nnz
    std::vector<double> values;  // length nnz

    CsrMatrix() : row_ptr(1, 0) {}
    CsrMatrix(Index rows, Index cols)
        : n_rows(rows), n_cols(cols), row_ptr(static_cast<std::size_t>(rows) + 1, 0) {}

    Index nnz() const { return static_cast<Index>(col_idx.size()); }
    Index row_nnz(Index r) const { return row_ptr[r + 1] - row_ptr[r]; }

    std::span<const Index> row_cols(Index r) const {
        return {col_idx.data() + row_ptr[r], static_cast<std::size_t>(row_nnz(r))};
    }
    std::span<const double> row_values(Index r) const {
        return {values.data() + row_ptr[r], static_cast<std::size_t>(row_nnz(r))};
    }

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

// Conversions. coo_to_csr rejects input that is not canonical (duplicate or
// unsorted coordinates); the round trip csr -> coo -> csr is the identity.
CsrMatrix coo_to_csr(const CooMatrix& m);
CooMatrix csr_to_coo(const CsrMatrix& m);

// C = A * B over real arithmetic. Explicit zeros produced by cancellation are
// dropped. Per-row accumulation switches between a hash map and a dense
// scratch row depending on the expected density of the output row.
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);

// Selection matrix with one unit entry per row at (i, vertices[i]).
CsrMatrix selection_matrix(std::span<const Index> vertices, Index n_cols);

CsrMatrix transpose(const CsrMatrix& a);

// Induced subgraph over `vertices` computed as S * A * S^T with a selection
// matrix S. Entry (i, j) of the result carries the value of
// (vertices[i], vertices[j]) in `a`. Vertices must be distinct and in range;
// the second return value is the local -> global vertex map (a copy of
// `vertices` in the given order).
std::pair<CsrMatrix, std::vector<Index>> induced_subgraph(
    const CsrMatrix& a, std::span<const Index> vertices);

// Divides every nonempty row by its sum. Requires nonnegative values.
CsrMatrix row_normalize(const CsrMatrix& a);

// Rows of the inputs concatenated in order; all column counts must agree.
CsrMatrix vstack(std::span<const CsrMatrix> ms);

// Rows [r0, r1) of a as a standalone matrix.
CsrMatrix csr_row_slice(const CsrMatrix& a, Index r0, Index r1);

// Disjoint union: component i occupies vertex range [offsets[i], offsets[i+1]).
std::pair<CooMatrix, std::vector<Index>> block_diag(std::span<const CooMatrix> ms);

// Pattern union of a and its transpose, all values set to 1.
CsrMatrix symmetrize_pattern(const CsrMatrix& a);

}  // namespace hitgnn
