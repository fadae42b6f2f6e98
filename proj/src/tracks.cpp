#include "hitgnn/tracks.hpp"

#include <algorithm>
#include <cmath>

namespace hitgnn {

namespace {

double stable_sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

struct UnionFind {
    explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
        for (Index i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }

    Index find(Index v) {
        Index root = v;
        while (parent[static_cast<std::size_t>(root)] != root)
            root = parent[static_cast<std::size_t>(root)];
        while (parent[static_cast<std::size_t>(v)] != root) {
            Index next = parent[static_cast<std::size_t>(v)];
            parent[static_cast<std::size_t>(v)] = root;
            v = next;
        }
        return root;
    }

    void unite(Index a, Index b) {
        const Index ra = find(a);
        const Index rb = find(b);
        // Smaller root wins, which makes component ids deterministic.
        if (ra < rb)
            parent[static_cast<std::size_t>(rb)] = ra;
        else if (rb < ra)
            parent[static_cast<std::size_t>(ra)] = rb;
    }

    std::vector<Index> parent;
};

}  // namespace

std::vector<std::uint8_t> classify_edges(std::span<const double> logits,
                                         double threshold) {
    std::vector<std::uint8_t> mask(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (!std::isfinite(logits[i])) fail_invalid("classify_edges: non-finite logit");
        mask[i] = stable_sigmoid(logits[i]) >= threshold ? 1 : 0;
    }
    return mask;
}

TrackSet connected_components(const CooMatrix& adj, std::span<const std::uint8_t> mask,
                              Index min_track_len) {
    if (adj.n_rows != adj.n_cols) fail_invalid("connected_components: adjacency not square");
    if (static_cast<Index>(mask.size()) != adj.nnz())
        fail_invalid("connected_components: mask length must equal edge count");

    UnionFind uf(adj.n_rows);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) uf.unite(adj.entries[i].row, adj.entries[i].col);

    TrackSet out;
    out.vertex_component.resize(static_cast<std::size_t>(adj.n_rows));
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(adj.n_rows));
    for (Index v = 0; v < adj.n_rows; ++v) {
        const Index c = uf.find(v);
        out.vertex_component[static_cast<std::size_t>(v)] = c;
        members[static_cast<std::size_t>(c)].push_back(v);
    }
    for (Index c = 0; c < adj.n_rows; ++c) {
        auto& m = members[static_cast<std::size_t>(c)];
        if (static_cast<Index>(m.size()) >= min_track_len) out.tracks.push_back(std::move(m));
    }
    return out;
}

EdgeMetrics precision_recall(std::span<const std::uint8_t> mask,
                             std::span<const std::uint8_t> labels, double threshold) {
    if (mask.size() != labels.size())
        fail_invalid("precision_recall: mask and label lengths disagree");
    EdgeMetrics m;
    m.threshold = threshold;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const bool predicted = mask[i] != 0;
        const bool actual = labels[i] != 0;
        if (predicted && actual)
            ++m.true_positives;
        else if (predicted && !actual)
            ++m.false_positives;
        else if (!predicted && actual)
            ++m.false_negatives;
    }
    if (m.true_positives + m.false_positives > 0)
        m.precision = static_cast<double>(m.true_positives) /
                      static_cast<double>(m.true_positives + m.false_positives);
    if (m.true_positives + m.false_negatives > 0)
        m.recall = static_cast<double>(m.true_positives) /
                   static_cast<double>(m.true_positives + m.false_negatives);
    return m;
}

}  // namespace hitgnn
