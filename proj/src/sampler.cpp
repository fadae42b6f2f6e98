#include "hitgnn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

namespace hitgnn {

namespace {

void check_roots(const CsrMatrix& a, std::span<const Index> roots) {
    std::unordered_set<Index> seen;
    for (Index r : roots) {
        if (r < 0 || r >= a.n_rows)
            fail_invalid("sampler: root " + std::to_string(r) + " out of range");
        if (!seen.insert(r).second)
            fail_invalid("sampler: duplicate root " + std::to_string(r));
    }
}

// Assembles one SampledBatch from per-root touched-vertex sets. Each set must
// be sorted, deduplicated and contain its root. Components are extracted from
// the original (directed) adjacency so values, and therefore edge ids, carry
// through.
SampledBatch assemble_batch(const CsrMatrix& a, std::span<const Index> roots,
                            std::span<const std::vector<Index>> vertex_sets) {
    std::vector<CooMatrix> components;
    components.reserve(roots.size());
    SampledBatch batch;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        auto [sub, local_to_global] = induced_subgraph(a, vertex_sets[i]);
        components.push_back(csr_to_coo(sub));
        batch.local_to_global.insert(batch.local_to_global.end(), local_to_global.begin(),
                                     local_to_global.end());
        const auto it =
            std::lower_bound(local_to_global.begin(), local_to_global.end(), roots[i]);
        batch.roots_local.push_back(
            static_cast<Index>(it - local_to_global.begin()));  // offset added below
    }
    auto [adjacency, offsets] = block_diag(components);
    for (std::size_t i = 0; i < roots.size(); ++i) batch.roots_local[i] += offsets[i];
    batch.adjacency = std::move(adjacency);
    batch.component_offsets = std::move(offsets);
    return batch;
}

std::vector<Index> sorted_vertex_set(Index root, std::vector<Index> touched) {
    touched.push_back(root);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    return touched;
}

}  // namespace

void SamplerConfig::validate() const {
    if (depth < 1) fail_invalid("SamplerConfig: depth must be >= 1");
    if (fanout < 1) fail_invalid("SamplerConfig: fanout must be >= 1");
    if (batch_size < 1) fail_invalid("SamplerConfig: batch_size must be >= 1");
    if (bulk_batches < 1) fail_invalid("SamplerConfig: bulk_batches must be >= 1");
}

std::vector<std::vector<Index>> sample_rows(const CsrMatrix& p, Index s,
                                            ChoiceSource& choice,
                                            std::span<const Index> row_streams) {
    if (s < 1) fail_invalid("sample_rows: s must be >= 1");
    if (!row_streams.empty() && static_cast<Index>(row_streams.size()) != p.n_rows)
        fail_invalid("sample_rows: row_streams length must equal row count");
    for (double v : p.values)
        if (v < 0.0) fail_invalid("sample_rows: row with negative mass");
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(p.n_rows));
    for (Index r = 0; r < p.n_rows; ++r) {
        const auto support = p.row_cols(r);
        if (support.empty()) continue;
        if (!row_streams.empty())
            choice.begin_root(static_cast<std::uint64_t>(row_streams[r]));
        const auto k = static_cast<std::uint32_t>(
            std::min<Index>(s, static_cast<Index>(support.size())));
        const auto positions = choice.choose(static_cast<std::uint32_t>(support.size()), k);
        auto& row_out = out[r];
        row_out.reserve(positions.size());
        for (auto pos : positions) row_out.push_back(support[pos]);
    }
    return out;
}

SampledBatch shadow_reference(const CsrMatrix& a, std::span<const Index> roots,
                              const SamplerConfig& cfg, ChoiceSource& choice) {
    cfg.validate();
    check_roots(a, roots);
    const CsrMatrix walk = cfg.symmetrize ? symmetrize_pattern(a) : a;

    std::vector<std::vector<Index>> vertex_sets;
    vertex_sets.reserve(roots.size());
    for (std::size_t root_ordinal = 0; root_ordinal < roots.size(); ++root_ordinal) {
        const Index root = roots[root_ordinal];
        choice.begin_root(root_ordinal);
        std::vector<Index> touched;
        std::vector<Index> frontier{root};
        std::vector<Index> next_frontier;
        for (Index level = 0; level < cfg.depth; ++level) {
            next_frontier.clear();
            for (Index v : frontier) {
                const auto nbrs = walk.row_cols(v);
                if (nbrs.empty()) continue;
                const auto k = static_cast<std::uint32_t>(
                    std::min<Index>(cfg.fanout, static_cast<Index>(nbrs.size())));
                const auto positions =
                    choice.choose(static_cast<std::uint32_t>(nbrs.size()), k);
                for (auto pos : positions) {
                    next_frontier.push_back(nbrs[pos]);
                    touched.push_back(nbrs[pos]);
                }
            }
            frontier.swap(next_frontier);
        }
        vertex_sets.push_back(sorted_vertex_set(root, std::move(touched)));
    }
    return assemble_batch(a, roots, vertex_sets);
}

std::vector<SampledBatch> bulk_shadow(const CsrMatrix& a,
                                      const std::vector<std::vector<Index>>& batches,
                                      const SamplerConfig& cfg, ChoiceSource& choice,
                                      const FrontierObserver& observer) {
    cfg.validate();
    for (const auto& roots : batches) check_roots(a, roots);
    const CsrMatrix walk = cfg.symmetrize ? symmetrize_pattern(a) : a;

    // Flatten the stacked root list; one F row per root across all batches.
    std::vector<Index> flat_roots;
    for (const auto& roots : batches)
        flat_roots.insert(flat_roots.end(), roots.begin(), roots.end());
    const auto n_roots = static_cast<Index>(flat_roots.size());

    // Q starts as the stacked selection matrix: one nonzero per row at each
    // root's column. row_root[r] maps a frontier row to its root ordinal so F
    // accumulation lands in the right row after expansion re-shuffles rows.
    CsrMatrix q(n_roots, a.n_cols);
    q.col_idx = flat_roots;
    q.values.assign(flat_roots.size(), 1.0);
    for (Index r = 0; r < n_roots; ++r) q.row_ptr[r + 1] = r + 1;
    std::vector<Index> row_root(flat_roots.size());
    for (Index r = 0; r < n_roots; ++r) row_root[r] = r;

    std::vector<std::vector<Index>> touched(static_cast<std::size_t>(n_roots));

    auto materialize_f = [&] {
        CooMatrix f_coo{n_roots, a.n_cols, {}};
        for (Index t = 0; t < n_roots; ++t) {
            f_coo.entries.push_back({t, flat_roots[t], 1.0});
            for (Index v : touched[t]) f_coo.entries.push_back({t, v, 1.0});
        }
        f_coo.canonicalize();
        for (auto& e : f_coo.entries) e.value = 1.0;
        return coo_to_csr(f_coo);
    };

    for (Index level = 0; level < cfg.depth; ++level) {
        CsrMatrix p = row_normalize(spgemm(q, walk));
        const auto choices = sample_rows(p, cfg.fanout, choice, row_root);

        Index next_rows = 0;
        for (const auto& c : choices) next_rows += static_cast<Index>(c.size());

        CsrMatrix next_q(next_rows, a.n_cols);
        next_q.col_idx.reserve(static_cast<std::size_t>(next_rows));
        next_q.values.assign(static_cast<std::size_t>(next_rows), 1.0);
        std::vector<Index> next_row_root;
        next_row_root.reserve(static_cast<std::size_t>(next_rows));
        Index out_row = 0;
        for (Index r = 0; r < p.n_rows; ++r) {
            const Index root_ordinal = row_root[r];
            for (Index v : choices[r]) {
                next_q.col_idx.push_back(v);
                next_q.row_ptr[out_row + 1] = out_row + 1;
                next_row_root.push_back(root_ordinal);
                touched[root_ordinal].push_back(v);
                ++out_row;
            }
        }
        q = std::move(next_q);
        row_root = std::move(next_row_root);

        if (observer) observer(level + 1, FrontierSet{q, materialize_f(), p});
    }

    std::vector<SampledBatch> out;
    out.reserve(batches.size());
    Index ordinal = 0;
    for (const auto& roots : batches) {
        std::vector<std::vector<Index>> vertex_sets;
        vertex_sets.reserve(roots.size());
        for (Index i = 0; i < static_cast<Index>(roots.size()); ++i, ++ordinal)
            vertex_sets.push_back(
                sorted_vertex_set(flat_roots[ordinal], std::move(touched[ordinal])));
        out.push_back(assemble_batch(a, roots, vertex_sets));
    }
    return out;
}

CsrMatrix make_edge_id_matrix(const EventGraph& event) {
    event.validate();
    CooMatrix with_ids = event.edges;
    for (std::size_t i = 0; i < with_ids.entries.size(); ++i)
        with_ids.entries[i].value = static_cast<double>(i) + 1.0;
    return coo_to_csr(with_ids);
}

void gather_features(SampledBatch& batch, const EventGraph& event) {
    for (Index v : batch.local_to_global)
        if (v < 0 || v >= event.n)
            fail_invalid("gather_features: batch vertex out of range for event");

    batch.node_features =
        DenseMatrix(static_cast<Index>(batch.local_to_global.size()), event.node_features.cols);
    for (std::size_t i = 0; i < batch.local_to_global.size(); ++i) {
        const Index g = batch.local_to_global[i];
        std::copy(event.node_features.row_ptr(g),
                  event.node_features.row_ptr(g) + event.node_features.cols,
                  batch.node_features.row_ptr(static_cast<Index>(i)));
    }

    const Index m = batch.adjacency.nnz();
    batch.edge_features = DenseMatrix(m, event.edge_features.cols);
    batch.edge_labels.resize(static_cast<std::size_t>(m));
    batch.edge_global_ids.resize(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        auto& entry = batch.adjacency.entries[static_cast<std::size_t>(i)];
        const auto id = static_cast<Index>(std::llround(entry.value)) - 1;
        if (id < 0 || id >= event.m())
            fail_invalid("gather_features: adjacency values do not carry edge ids; "
                         "sample from make_edge_id_matrix(event)");
        batch.edge_global_ids[static_cast<std::size_t>(i)] = id;
        batch.edge_labels[static_cast<std::size_t>(i)] =
            event.labels[static_cast<std::size_t>(id)];
        std::copy(event.edge_features.row_ptr(id),
                  event.edge_features.row_ptr(id) + event.edge_features.cols,
                  batch.edge_features.row_ptr(i));
        entry.value = 1.0;
    }
}

std::vector<std::vector<Index>> epoch_root_batches(Index n_vertices, Index batch_size,
                                                   Rng& rng) {
    if (n_vertices < 1) fail_invalid("epoch_root_batches: empty vertex set");
    if (batch_size < 1) fail_invalid("epoch_root_batches: batch_size must be >= 1");
    std::vector<Index> perm(static_cast<std::size_t>(n_vertices));
    for (Index i = 0; i < n_vertices; ++i) perm[i] = i;
    for (Index i = n_vertices - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }
    std::vector<std::vector<Index>> batches;
    if (n_vertices < batch_size) {
        batches.push_back(std::move(perm));
        return batches;
    }
    for (Index start = 0; start + batch_size <= n_vertices; start += batch_size)
        batches.emplace_back(perm.begin() + start, perm.begin() + start + batch_size);
    return batches;
}

}  // namespace hitgnn
