#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hitgnn/data.hpp"
#include "hitgnn/sampler.hpp"
#include "hitgnn/trainer.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn::cli {

inline constexpr const char* kToolVersion = "hitgnn 0.1.0";

struct GenerateOptions {
    std::filesystem::path out_dir;
    std::string preset = "ex3-mini";
    Index n_events = 100;
    std::uint64_t seed = 1;
    // Overrides; negative means "keep the preset value".
    Index n_tracks = -1;
    Index hits_min = -1;
    Index hits_max = -1;
    Index detector_layers = -1;
    Index noise_hits = -1;
    double false_edge_factor = -1.0;
    Index f_v = -1;
    Index f_e = -1;
};

struct TrainOptions {
    std::filesystem::path dataset_dir;
    std::filesystem::path out_dir;
    TrainConfig config;
    bool zero_timings = false;
    bool plot = false;
};

struct EvaluateOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path dataset_dir;
    std::filesystem::path out_dir;
    std::string split = "val";
    double threshold = 0.5;
    Index min_track_len = 3;
    bool write_tracks = false;
};

struct BenchSamplingOptions {
    std::filesystem::path dataset_dir;
    std::filesystem::path out_dir;
    std::vector<Index> k_values{1, 2, 4, 8};
    Index repeats = 5;
    std::uint64_t seed = 1;
    Index event_index = -1;  // -1 picks the event with the most edges
    Index batch_size = 256;
    Index depth = 3;
    Index fanout = 6;
    bool symmetrize = true;
    bool plot = false;
};

struct BenchAllreduceOptions {
    std::filesystem::path out_dir;
    Index tensors = 34;
    Index elements = 4096;
    std::vector<Index> sizes;  // overrides tensors/elements when nonempty
    Index workers = 4;
    Index steps = 20;
    std::uint64_t seed = 1;
};

GenConfig preset_config(const std::string& name);

int cmd_generate(const GenerateOptions& opt);
int cmd_train(const TrainOptions& opt);
int cmd_evaluate(const EvaluateOptions& opt);
int cmd_bench_sampling(const BenchSamplingOptions& opt);
int cmd_bench_allreduce(const BenchAllreduceOptions& opt);

// Full argv entry point used by the binary.
int run(int argc, const char* const* argv);

}  // namespace hitgnn::cli
