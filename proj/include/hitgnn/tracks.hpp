#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hitgnn/sparse.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

// Components over predicted-true edges. vertex_component[v] is the smallest
// vertex id in v's component, so labels are deterministic regardless of edge
// order. tracks lists the components with at least min_track_len vertices,
// ordered by component id, vertices ascending.
struct TrackSet {
    std::vector<Index> vertex_component;
    std::vector<std::vector<Index>> tracks;
};

struct EdgeMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::uint64_t true_positives = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t false_negatives = 0;
    double threshold = 0.5;
};

// mask[i] = sigmoid(logits[i]) >= threshold.
std::vector<std::uint8_t> classify_edges(std::span<const double> logits,
                                         double threshold);

// Union-find over masked edges treated as undirected.
TrackSet connected_components(const CooMatrix& adj, std::span<const std::uint8_t> mask,
                              Index min_track_len = 3);

// Micro-averaged edge precision/recall. Precision is absent when nothing was
// predicted positive; recall is absent when there are no positive labels.
EdgeMetrics precision_recall(std::span<const std::uint8_t> mask,
                             std::span<const std::uint8_t> labels,
                             double threshold = 0.5);

}  // namespace hitgnn
