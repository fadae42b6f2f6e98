#include "hitgnn/sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

namespace hitgnn {

namespace {

void check_entry_ranges(const CooMatrix& m) {
    for (const auto& e : m.entries) {
        if (e.row < 0 || e.row >= m.n_rows || e.col < 0 || e.col >= m.n_cols)
            fail_invalid("CooMatrix: entry (" + std::to_string(e.row) + ", " +
                         std::to_string(e.col) + ") out of range for " +
                         std::to_string(m.n_rows) + "x" + std::to_string(m.n_cols));
    }
}

}  // namespace

void CooMatrix::canonicalize() {
    check_entry_ranges(*this);
    std::sort(entries.begin(), entries.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<CooEntry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
        if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
            merged.back().value += e.value;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [](const CooEntry& e) { return e.value == 0.0; });
    entries = std::move(merged);
}

bool CooMatrix::is_canonical() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) return false;
        if (e.value == 0.0) return false;
        if (i > 0) {
            const auto& p = entries[i - 1];
            if (p.row > e.row || (p.row == e.row && p.col >= e.col)) return false;
        }
    }
    return true;
}

CsrMatrix coo_to_csr(const CooMatrix& m) {
    if (!m.is_canonical())
        fail_invalid("coo_to_csr: input must be canonical (sorted, deduplicated, no "
                     "explicit zeros)");
    CsrMatrix out(m.n_rows, m.n_cols);
    out.col_idx.reserve(m.entries.size());
    out.values.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        ++out.row_ptr[e.row + 1];
        out.col_idx.push_back(e.col);
        out.values.push_back(e.value);
    }
    for (Index r = 0; r < m.n_rows; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
    return out;
}

CooMatrix csr_to_coo(const CsrMatrix& m) {
    CooMatrix out{m.n_rows, m.n_cols, {}};
    out.entries.reserve(static_cast<std::size_t>(m.nnz()));
    for (Index r = 0; r < m.n_rows; ++r)
        for (Index k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            out.entries.push_back({r, m.col_idx[k], m.values[k]});
    return out;
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_cols != b.n_rows)
        fail_invalid("spgemm: inner dimensions disagree (" + std::to_string(a.n_cols) +
                     " vs " + std::to_string(b.n_rows) + ")");
    CsrMatrix out(a.n_rows, b.n_cols);

    // Dense scratch row with generation stamps, used when the estimated output
    // row density crosses the threshold; otherwise a sorted gather buffer.
    std::vector<double> dense(static_cast<std::size_t>(b.n_cols), 0.0);
    std::vector<std::uint32_t> stamp(static_cast<std::size_t>(b.n_cols), 0);
    std::uint32_t generation = 0;
    std::vector<Index> touched;
    std::vector<std::pair<Index, double>> gathered;

    const Index dense_threshold = std::max<Index>(1, b.n_cols / 8);

    for (Index r = 0; r < a.n_rows; ++r) {
        Index flops = 0;
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            flops += b.row_nnz(a.col_idx[k]);

        if (flops > dense_threshold) {
            ++generation;
            touched.clear();
            for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
                const Index j = a.col_idx[k];
                const double av = a.values[k];
                for (Index t = b.row_ptr[j]; t < b.row_ptr[j + 1]; ++t) {
                    const Index c = b.col_idx[t];
                    if (stamp[c] != generation) {
                        stamp[c] = generation;
                        dense[c] = 0.0;
                        touched.push_back(c);
                    }
                    dense[c] += av * b.values[t];
                }
            }
            std::sort(touched.begin(), touched.end());
            for (Index c : touched) {
                if (dense[c] == 0.0) continue;
                out.col_idx.push_back(c);
                out.values.push_back(dense[c]);
            }
        } else {
            gathered.clear();
            for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
                const Index j = a.col_idx[k];
                const double av = a.values[k];
                for (Index t = b.row_ptr[j]; t < b.row_ptr[j + 1]; ++t)
                    gathered.emplace_back(b.col_idx[t], av * b.values[t]);
            }
            std::sort(gathered.begin(), gathered.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            std::size_t i = 0;
            while (i < gathered.size()) {
                const Index c = gathered[i].first;
                double sum = 0.0;
                while (i < gathered.size() && gathered[i].first == c) sum += gathered[i++].second;
                if (sum == 0.0) continue;
                out.col_idx.push_back(c);
                out.values.push_back(sum);
            }
        }
        out.row_ptr[r + 1] = static_cast<Index>(out.col_idx.size());
    }
    return out;
}

CsrMatrix selection_matrix(std::span<const Index> vertices, Index n_cols) {
    CsrMatrix s(static_cast<Index>(vertices.size()), n_cols);
    s.col_idx.reserve(vertices.size());
    s.values.assign(vertices.size(), 1.0);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (vertices[i] < 0 || vertices[i] >= n_cols)
            fail_invalid("selection_matrix: vertex " + std::to_string(vertices[i]) +
                         " out of range");
        s.col_idx.push_back(vertices[i]);
        s.row_ptr[i + 1] = static_cast<Index>(i) + 1;
    }
    return s;
}

CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix out(a.n_cols, a.n_rows);
    out.col_idx.resize(static_cast<std::size_t>(a.nnz()));
    out.values.resize(static_cast<std::size_t>(a.nnz()));
    for (Index k = 0; k < a.nnz(); ++k) ++out.row_ptr[a.col_idx[k] + 1];
    for (Index r = 0; r < a.n_cols; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
    std::vector<Index> next(out.row_ptr.begin(), out.row_ptr.end() - 1);
    for (Index r = 0; r < a.n_rows; ++r) {
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const Index pos = next[a.col_idx[k]]++;
            out.col_idx[pos] = r;
            out.values[pos] = a.values[k];
        }
    }
    return out;
}

std::pair<CsrMatrix, std::vector<Index>> induced_subgraph(
    const CsrMatrix& a, std::span<const Index> vertices) {
    if (a.n_rows != a.n_cols)
        fail_invalid("induced_subgraph: adjacency must be square");
    std::unordered_set<Index> seen;
    for (Index v : vertices) {
        if (v < 0 || v >= a.n_rows)
            fail_invalid("induced_subgraph: vertex " + std::to_string(v) + " out of range");
        if (!seen.insert(v).second)
            fail_invalid("induced_subgraph: duplicate vertex " + std::to_string(v));
    }
    const CsrMatrix s = selection_matrix(vertices, a.n_rows);
    CsrMatrix sub = spgemm(spgemm(s, a), transpose(s));
    return {std::move(sub), std::vector<Index>(vertices.begin(), vertices.end())};
}

CsrMatrix row_normalize(const CsrMatrix& a) {
    CsrMatrix out = a;
    for (Index r = 0; r < a.n_rows; ++r) {
        double sum = 0.0;
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            if (a.values[k] < 0.0)
                fail_invalid("row_normalize: negative value in row " + std::to_string(r));
            sum += a.values[k];
        }
        if (sum == 0.0) continue;
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) out.values[k] = a.values[k] / sum;
    }
    return out;
}

CsrMatrix vstack(std::span<const CsrMatrix> ms) {
    if (ms.empty()) return CsrMatrix(0, 0);
    const Index n_cols = ms.front().n_cols;
    Index n_rows = 0;
    Index total_nnz = 0;
    for (const auto& m : ms) {
        if (m.n_cols != n_cols)
            fail_invalid("vstack: column counts disagree (" + std::to_string(m.n_cols) +
                         " vs " + std::to_string(n_cols) + ")");
        n_rows += m.n_rows;
        total_nnz += m.nnz();
    }
    CsrMatrix out(n_rows, n_cols);
    out.col_idx.reserve(static_cast<std::size_t>(total_nnz));
    out.values.reserve(static_cast<std::size_t>(total_nnz));
    Index row_base = 0;
    for (const auto& m : ms) {
        for (Index r = 0; r < m.n_rows; ++r)
            out.row_ptr[row_base + r + 1] = out.row_ptr[row_base + r] + m.row_nnz(r);
        out.col_idx.insert(out.col_idx.end(), m.col_idx.begin(), m.col_idx.end());
        out.values.insert(out.values.end(), m.values.begin(), m.values.end());
        row_base += m.n_rows;
    }
    return out;
}

CsrMatrix csr_row_slice(const CsrMatrix& a, Index r0, Index r1) {
    if (r0 < 0 || r1 < r0 || r1 > a.n_rows) fail_invalid("csr_row_slice: bad row range");
    CsrMatrix out(r1 - r0, a.n_cols);
    const Index k0 = a.row_ptr[r0];
    const Index k1 = a.row_ptr[r1];
    out.col_idx.assign(a.col_idx.begin() + k0, a.col_idx.begin() + k1);
    out.values.assign(a.values.begin() + k0, a.values.begin() + k1);
    for (Index r = r0; r < r1; ++r) out.row_ptr[r - r0 + 1] = a.row_ptr[r + 1] - k0;
    return out;
}

std::pair<CooMatrix, std::vector<Index>> block_diag(std::span<const CooMatrix> ms) {
    CooMatrix out;
    std::vector<Index> offsets{0};
    offsets.reserve(ms.size() + 1);
    for (const auto& m : ms) {
        if (m.n_rows != m.n_cols) fail_invalid("block_diag: components must be square");
        const Index base = offsets.back();
        for (const auto& e : m.entries)
            out.entries.push_back({base + e.row, base + e.col, e.value});
        offsets.push_back(base + m.n_rows);
    }
    out.n_rows = out.n_cols = offsets.back();
    return {std::move(out), std::move(offsets)};
}

CsrMatrix symmetrize_pattern(const CsrMatrix& a) {
    if (a.n_rows != a.n_cols) fail_invalid("symmetrize_pattern: matrix must be square");
    CooMatrix u = csr_to_coo(a);
    u.entries.reserve(u.entries.size() * 2);
    std::vector<CooEntry> mirrored;
    mirrored.reserve(u.entries.size());
    for (const auto& e : u.entries) mirrored.push_back({e.col, e.row, 1.0});
    for (auto& e : u.entries) e.value = 1.0;
    u.entries.insert(u.entries.end(), mirrored.begin(), mirrored.end());
    u.canonicalize();
    for (auto& e : u.entries) e.value = 1.0;
    return coo_to_csr(u);
}

}  // namespace hitgnn
