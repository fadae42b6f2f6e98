#pragma once

// Test-only oracles, kept independent of the implementation paths they check:
// dense reference linear algebra, exhaustive enumeration of sampler RNG
// outcomes with exact rational probabilities, central finite differences, and
// a DFS connected-components reference.

#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hitgnn/dense.hpp"
#include "hitgnn/rng.hpp"
#include "hitgnn/sampler.hpp"
#include "hitgnn/sparse.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn::testing {

// ---------------------------------------------------------------------------
// Dense reference helpers.

inline DenseMatrix densify(const CsrMatrix& m) {
    DenseMatrix out(m.n_rows, m.n_cols);
    for (Index r = 0; r < m.n_rows; ++r)
        for (Index k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            out.at(r, m.col_idx[k]) += m.values[k];
    return out;
}

inline DenseMatrix densify(const CooMatrix& m) {
    DenseMatrix out(m.n_rows, m.n_cols);
    for (const auto& e : m.entries) out.at(e.row, e.col) += e.value;
    return out;
}

inline DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows, b.cols);
    for (Index i = 0; i < a.rows; ++i)
        for (Index k = 0; k < a.cols; ++k) {
            const double v = a.at(i, k);
            if (v == 0.0) continue;
            for (Index j = 0; j < b.cols; ++j) out.at(i, j) += v * b.at(k, j);
        }
    return out;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) return 1e300;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

// Random canonical COO pattern/value matrix.
inline CooMatrix random_coo(Index rows, Index cols, Index nnz_target, Rng& rng,
                            bool unit_values = false) {
    CooMatrix m{rows, cols, {}};
    for (Index i = 0; i < nnz_target; ++i) {
        const auto r = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(rows)));
        const auto c = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(cols)));
        m.entries.push_back({r, c, unit_values ? 1.0 : rng.uniform(0.1, 2.0)});
    }
    m.canonicalize();
    if (unit_values)
        for (auto& e : m.entries) e.value = 1.0;
    return m;
}

// Random directed graph without self-loops, unit values.
inline CsrMatrix random_graph(Index n, Index edges, std::uint64_t seed) {
    Rng rng(seed);
    CooMatrix m{n, n, {}};
    for (Index i = 0; i < edges; ++i) {
        const auto u = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
        auto v = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
        if (u == v) continue;
        m.entries.push_back({u, v, 1.0});
    }
    m.canonicalize();
    for (auto& e : m.entries) e.value = 1.0;
    return coo_to_csr(m);
}

inline CsrMatrix path_graph(Index n) {
    CooMatrix m{n, n, {}};
    for (Index i = 0; i + 1 < n; ++i) m.entries.push_back({i, i + 1, 1.0});
    m.canonicalize();
    return coo_to_csr(m);
}

inline CsrMatrix star_graph(Index leaves) {
    CooMatrix m{leaves + 1, leaves + 1, {}};
    for (Index i = 1; i <= leaves; ++i) m.entries.push_back({0, i, 1.0});
    m.canonicalize();
    return coo_to_csr(m);
}

inline CsrMatrix cycle_graph(Index n) {
    CooMatrix m{n, n, {}};
    for (Index i = 0; i < n; ++i) m.entries.push_back({i, (i + 1) % n, 1.0});
    m.canonicalize();
    return coo_to_csr(m);
}

inline CsrMatrix complete_graph(Index n) {
    CooMatrix m{n, n, {}};
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j) m.entries.push_back({i, j, 1.0});
    m.canonicalize();
    return coo_to_csr(m);
}

// ---------------------------------------------------------------------------
// Exact rational arithmetic for outcome probabilities.

struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }

    void reduce() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const __int128 g = gcd128(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    Rational& operator+=(const Rational& o) {
        num = num * o.den + o.num * den;
        den = den * o.den;
        reduce();
        return *this;
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }

    double to_double() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

inline std::uint64_t binomial(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint32_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

// Replays a scripted decision path; fresh decision points start at the
// lexicographically first k-combination. After a run, advance() moves to the
// next leaf of the decision tree (odometer over combinations).
class ScriptedChoiceSource final : public ChoiceSource {
public:
    struct Decision {
        std::uint32_t n = 0;
        std::uint32_t k = 0;
        std::vector<std::uint32_t> comb;
    };

    std::vector<std::uint32_t> choose(std::uint32_t n_options, std::uint32_t k) override {
        if (k > n_options) k = n_options;
        if (cursor_ < decisions_.size()) {
            const Decision& d = decisions_[cursor_];
            if (d.n != n_options || d.k != k)
                fail_state("ScriptedChoiceSource: decision tree is not replay-stable");
            ++cursor_;
            return d.comb;
        }
        Decision d;
        d.n = n_options;
        d.k = k;
        d.comb.resize(k);
        std::iota(d.comb.begin(), d.comb.end(), 0u);
        decisions_.push_back(d);
        ++cursor_;
        return d.comb;
    }

    void rewind() { cursor_ = 0; }

    // True if some decision advanced; exhausted tail decisions are dropped.
    bool advance() {
        while (!decisions_.empty()) {
            if (next_combination(decisions_.back())) {
                rewind();
                return true;
            }
            decisions_.pop_back();
        }
        return false;
    }

    Rational path_probability() const {
        Rational p{1, 1};
        for (const Decision& d : decisions_) {
            p.num *= 1;
            p.den *= static_cast<__int128>(binomial(d.n, d.k));
        }
        p.reduce();
        return p;
    }

private:
    static bool next_combination(Decision& d) {
        if (d.k == 0) return false;
        Index i = static_cast<Index>(d.k) - 1;
        while (i >= 0 && d.comb[static_cast<std::size_t>(i)] ==
                             d.n - d.k + static_cast<std::uint32_t>(i))
            --i;
        if (i < 0) return false;
        ++d.comb[static_cast<std::size_t>(i)];
        for (auto j = static_cast<std::size_t>(i) + 1; j < d.k; ++j)
            d.comb[j] = d.comb[j - 1] + 1;
        return true;
    }

    std::vector<Decision> decisions_;
    std::size_t cursor_ = 0;
};

// Runs `body` once per leaf of its decision tree and accumulates the exact
// probability of each distinct outcome key.
inline std::map<std::string, Rational> enumerate_outcomes(
    const std::function<std::string(ChoiceSource&)>& body) {
    std::map<std::string, Rational> outcomes;
    ScriptedChoiceSource source;
    for (;;) {
        source.rewind();
        const std::string key = body(source);
        outcomes[key] += source.path_probability();
        if (!source.advance()) break;
    }
    return outcomes;
}

// Canonical per-component description: sorted vertices and sorted edges in
// global ids.
inline std::string component_key(const SampledBatch& batch, Index component) {
    const Index v0 = batch.component_offsets[static_cast<std::size_t>(component)];
    const Index v1 = batch.component_offsets[static_cast<std::size_t>(component) + 1];
    std::ostringstream out;
    out << "V:";
    for (Index v = v0; v < v1; ++v)
        out << batch.local_to_global[static_cast<std::size_t>(v)] << ",";
    out << "|E:";
    for (const auto& e : batch.adjacency.entries) {
        if (e.row < v0 || e.row >= v1) continue;
        out << batch.local_to_global[static_cast<std::size_t>(e.row)] << ">"
            << batch.local_to_global[static_cast<std::size_t>(e.col)] << ",";
    }
    return std::move(out).str();
}

// ---------------------------------------------------------------------------
// Central finite differences over a scalar function of leaf matrices.

inline std::vector<DenseMatrix> numeric_grads(
    const std::function<double(const std::vector<DenseMatrix>&)>& f,
    std::vector<DenseMatrix> leafs, double eps) {
    std::vector<DenseMatrix> grads;
    grads.reserve(leafs.size());
    for (std::size_t which = 0; which < leafs.size(); ++which) {
        DenseMatrix g(leafs[which].rows, leafs[which].cols);
        for (std::size_t i = 0; i < leafs[which].data.size(); ++i) {
            const double saved = leafs[which].data[i];
            leafs[which].data[i] = saved + eps;
            const double up = f(leafs);
            leafs[which].data[i] = saved - eps;
            const double down = f(leafs);
            leafs[which].data[i] = saved;
            g.data[i] = (up - down) / (2.0 * eps);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

inline double max_rel_error(const DenseMatrix& got, const DenseMatrix& want,
                            double floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.data.size(); ++i) {
        const double denom = std::max(std::abs(want.data[i]), floor);
        worst = std::max(worst, std::abs(got.data[i] - want.data[i]) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// DFS connected-components reference (smallest-vertex component labels).

inline std::vector<Index> dfs_components(const CooMatrix& adj,
                                         std::span<const std::uint8_t> mask) {
    std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(adj.n_rows));
    for (std::size_t i = 0; i < adj.entries.size(); ++i) {
        if (!mask[i]) continue;
        nbrs[static_cast<std::size_t>(adj.entries[i].row)].push_back(adj.entries[i].col);
        nbrs[static_cast<std::size_t>(adj.entries[i].col)].push_back(adj.entries[i].row);
    }
    std::vector<Index> label(static_cast<std::size_t>(adj.n_rows), -1);
    for (Index start = 0; start < adj.n_rows; ++start) {
        if (label[static_cast<std::size_t>(start)] != -1) continue;
        std::vector<Index> stack{start};
        label[static_cast<std::size_t>(start)] = start;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index u : nbrs[static_cast<std::size_t>(v)]) {
                if (label[static_cast<std::size_t>(u)] == -1) {
                    label[static_cast<std::size_t>(u)] = start;
                    stack.push_back(u);
                }
            }
        }
    }
    return label;
}

// Frozen chi-square upper quantile at p = 0.999, 9 degrees of freedom.
inline constexpr double kChiSquare999Df9 = 27.877164871256568;

}  // namespace hitgnn::testing
