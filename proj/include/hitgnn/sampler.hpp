#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hitgnn/data.hpp"
#include "hitgnn/dense.hpp"
#include "hitgnn/rng.hpp"
#include "hitgnn/sparse.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

struct SamplerConfig {
    Index depth = 3;         // d: levels of frontier expansion
    Index fanout = 6;        // s: neighbors drawn per frontier vertex
    Index batch_size = 256;  // b: roots per minibatch
    Index bulk_batches = 1;  // k: minibatches sampled per bulk call
    bool symmetrize = true;  // walk on A union A^T instead of A as given

    void validate() const;
};

// One sampled minibatch: a block-diagonal adjacency with one component per
// root, the local <-> global maps, and (after gather_features) the features
// and labels of the touched vertices and edges.
//
// adjacency values are carried over from the input matrix, so a caller that
// encodes edge ids in the values (see make_edge_id_matrix) can recover which
// original edge each component edge is.
struct SampledBatch {
    CooMatrix adjacency;
    std::vector<Index> component_offsets;  // size roots + 1
    std::vector<Index> local_to_global;
    std::vector<Index> roots_local;
    DenseMatrix node_features;
    DenseMatrix edge_features;
    std::vector<std::uint8_t> edge_labels;
    std::vector<Index> edge_global_ids;

    Index n_vertices() const { return adjacency.n_rows; }
    Index n_edges() const { return adjacency.nnz(); }
    Index n_components() const { return static_cast<Index>(component_offsets.size()) - 1; }
};

// Per-level state of the bulk sampler: Q is the expanded frontier (one
// nonzero per row), F the accumulated visited-vertex indicator (one row per
// root across all stacked batches), P the row-normalized neighborhood
// probabilities the level sampled from.
struct FrontierSet {
    CsrMatrix q;
    CsrMatrix f;
    CsrMatrix p;
};

using FrontierObserver = std::function<void(Index level, const FrontierSet&)>;

// Per nonempty row of `p`, min(s, support) distinct column indices drawn
// uniformly without replacement from the row's support. Values must be
// nonnegative; empty rows yield empty choices. When row_streams is nonempty
// it maps each row to the root ordinal announced to the choice source.
std::vector<std::vector<Index>> sample_rows(const CsrMatrix& p, Index s,
                                            ChoiceSource& choice,
                                            std::span<const Index> row_streams = {});

// Literal per-root implementation: for each root, `depth` rounds of frontier
// expansion drawing `fanout` distinct neighbors per frontier vertex, then the
// induced subgraph over all touched vertices. Vertices with degree < fanout
// contribute their whole neighborhood. Isolated roots yield singleton
// components.
SampledBatch shadow_reference(const CsrMatrix& a, std::span<const Index> roots,
                              const SamplerConfig& cfg, ChoiceSource& choice);

// Matrix-based bulk implementation: stacks one frontier row per root across
// all `batches`, then repeats depth times: P <- row_normalize(Q * A_walk),
// draw fanout columns per row, expand Q to one nonzero per chosen column and
// accumulate the choices into F. Finally extracts one induced subgraph per
// root from F. The marginal subgraph distribution per root is identical to
// shadow_reference's.
std::vector<SampledBatch> bulk_shadow(const CsrMatrix& a,
                                      const std::vector<std::vector<Index>>& batches,
                                      const SamplerConfig& cfg, ChoiceSource& choice,
                                      const FrontierObserver& observer = {});

// Shuffles [0, n) with `rng` and slices it into batches of `batch_size`.
// A trailing partial slice is dropped; when n < batch_size the single
// undersized batch is kept so small graphs still train.
std::vector<std::vector<Index>> epoch_root_batches(Index n_vertices, Index batch_size,
                                                   Rng& rng);

// CSR form of an event's directed adjacency with each value encoding the
// edge's position in the canonical edge order plus one (so no stored value is
// zero). Sampling with this matrix makes every component edge traceable to
// its original edge.
CsrMatrix make_edge_id_matrix(const EventGraph& event);

// Resolves a batch sampled from make_edge_id_matrix(event): gathers node and
// edge features and labels from the event, records edge_global_ids, and
// resets the adjacency values to 1.
void gather_features(SampledBatch& batch, const EventGraph& event);

}  // namespace hitgnn
