#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hitgnn/dense.hpp"
#include "hitgnn/sparse.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

// One collision event: a directed hit graph (edges point from inner to outer
// detector layer), per-hit and per-edge features, and binary edge labels.
// Edge order everywhere is the canonical (src, dst) order of `edges`.
struct EventGraph {
    std::uint64_t event_id = 0;
    Index n = 0;
    CooMatrix edges;
    DenseMatrix node_features;
    DenseMatrix edge_features;
    std::vector<std::uint8_t> labels;

    Index m() const { return edges.nnz(); }
    void validate() const;
};

struct GenConfig {
    Index n_tracks = 110;
    Index hits_min = 7;
    Index hits_max = 10;
    Index detector_layers = 12;
    Index noise_hits = 65;
    double false_edge_factor = 1.0;
    Index f_v = 6;
    Index f_e = 2;
    std::uint64_t seed = 1;

    void validate() const;
};

// Synthetic tracks as monotone paths through concentric layers with a smooth
// transverse drift; false edges join spatially near cross-track hit pairs on
// adjacent layers. Deterministic given (cfg.seed, event_id).
EventGraph generate_event(const GenConfig& cfg, std::uint64_t event_id);

void write_event(const std::filesystem::path& path, const EventGraph& event);
EventGraph read_event(const std::filesystem::path& path);

struct SplitIndices {
    std::vector<Index> train;
    std::vector<Index> val;
    std::vector<Index> test;
};

// Deterministic shuffled 80/10/10 proportional split; val and test get at
// least one event each. Requires >= 3 events.
SplitIndices split_dataset(Index n_events, std::uint64_t seed);

struct DatasetManifest {
    std::uint64_t seed = 0;
    GenConfig config;
    std::vector<std::string> event_files;  // relative to the manifest directory
    SplitIndices split;
};

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& dir);

std::vector<EventGraph> load_split(const std::filesystem::path& dir,
                                   const DatasetManifest& manifest,
                                   std::span<const Index> event_indices);

}  // namespace hitgnn
