#pragma once

#include <atomic>
#include <barrier>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hitgnn/data.hpp"
#include "hitgnn/ignn.hpp"
#include "hitgnn/rng.hpp"
#include "hitgnn/sampler.hpp"
#include "hitgnn/tracks.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

enum class TrainMode : std::uint8_t { minibatch, fullgraph };

TrainMode train_mode_from_string(const std::string& name);
std::string train_mode_to_string(TrainMode mode);

struct TrainConfig {
    Index batch_size = 256;  // b
    Index epochs = 30;
    Index hidden = 64;   // f
    Index layers = 8;    // L
    Index depth = 3;     // d
    Index fanout = 6;    // s
    Index bulk_batches = 1;  // k: minibatches sampled per bulk call
    Index workers = 1;       // W
    Index mlp_depth = 2;
    double learning_rate = 1e-3;
    double pos_weight = 1.0;
    std::uint64_t seed = 1;
    TrainMode mode = TrainMode::minibatch;
    bool coalesce = true;
    bool symmetrize = true;
    bool roots_only_loss = false;
    double threshold = 0.5;
    Index max_batches_per_event = 0;                       // 0 = cover all roots
    std::size_t fullgraph_budget_elements = 60'000'000;    // skip larger graphs
    Activation hidden_activation = Activation::relu;
    Activation encoder_output_activation = Activation::tanh;

    void validate() const;
};

// Shared state for W in-process workers. allreduce_mean blocks until every
// rank has arrived, then replaces each rank's buffer with the elementwise
// mean. The reduction is chunked across ranks (reduce-scatter + all-gather),
// and every element is accumulated in rank order, so the result is bitwise
// identical no matter how the buffer is split into collectives.
class InMemoryComm {
public:
    explicit InMemoryComm(int world_size);

    void allreduce_mean(int rank, std::span<double> buf);

    int world_size() const { return world_size_; }
    std::uint64_t collective_calls() const { return calls_; }
    std::uint64_t bytes_reduced() const { return bytes_; }
    double reduce_seconds() const { return static_cast<double>(reduce_ns_) * 1e-9; }
    void reset_counters();

private:
    int world_size_;
    std::barrier<> barrier_;
    std::vector<double*> bufs_;
    std::vector<std::size_t> lens_;
    std::vector<double> scratch_;
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<std::uint64_t> bytes_{0};
    std::atomic<std::uint64_t> reduce_ns_{0};
};

// Per-rank face of the communicator.
struct CommHandle {
    InMemoryComm* comm = nullptr;
    int rank = 0;

    int world_size() const { return comm->world_size(); }
    void allreduce_mean(std::span<double> buf) const { comm->allreduce_mean(rank, buf); }
};

// Runs body(rank) on world_size workers. Rank 0 runs on the calling thread
// when world_size is 1; otherwise all ranks get their own thread. The first
// exception thrown by any rank is rethrown after the join.
void run_workers(int world_size, const std::function<void(int)>& body);

// One collective over the whole flat gradient buffer.
void allreduce_coalesced(std::span<double> flat_grads, const CommHandle& comm);

// One collective per registered parameter tensor; numerically identical to
// the coalesced path.
void allreduce_per_tensor(std::span<double> flat_grads, const ModelParams& params,
                          const CommHandle& comm);

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    void init(std::size_t n);
};

// Standard Adam, beta = (0.9, 0.999), eps = 1e-8. Rejects non-finite
// gradients without touching the parameters.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate);

struct PhaseTimings {
    double sample_s = 0.0;
    double forward_s = 0.0;
    double backward_s = 0.0;
    double allreduce_s = 0.0;
    double optimizer_s = 0.0;

    double total() const {
        return sample_s + forward_s + backward_s + allreduce_s + optimizer_s;
    }
};

struct EpochMetrics {
    Index epoch = 0;
    TrainMode mode = TrainMode::minibatch;
    double loss = 0.0;
    std::optional<double> val_precision;
    std::optional<double> val_recall;
    PhaseTimings timings;
    std::uint64_t allreduce_calls = 0;
    Index skipped_graphs = 0;
    Index steps = 0;
};

// Seed-stream conventions. Sampling streams are derived per
// (seed, epoch, event, batch, root position), so the sampled subgraphs do not
// depend on how many batches a bulk call covers or on the worker count.
Rng roots_rng(std::uint64_t seed, Index epoch, Index event_ordinal);
std::uint64_t root_stream_seed(std::uint64_t seed, Index epoch, Index event_ordinal,
                               Index batch_index, Index root_pos);
Rng init_rng(std::uint64_t seed);
Rng fullgraph_order_rng(std::uint64_t seed, Index epoch);

// Components [begin, end) of a batch as a standalone batch with rebased ids.
SampledBatch slice_components(const SampledBatch& batch, Index begin, Index end);

// The contiguous component range rank r of world_size owns.
std::pair<Index, Index> worker_component_range(Index n_components, int rank,
                                               int world_size);

std::vector<double> predict_logits(const ModelParams& params, const CooMatrix& adj,
                                   const DenseMatrix& x, const DenseMatrix& y);

EdgeMetrics evaluate_events(const ModelParams& params,
                            std::span<const EventGraph> events, double threshold);

// Data-parallel trainer. Each rank owns a full parameter replica and an
// optimizer state; replicas stay identical because every rank applies the
// same averaged gradients.
class Trainer {
public:
    Trainer(TrainConfig cfg, std::vector<EventGraph> train_events,
            std::vector<EventGraph> val_events);

    EpochMetrics run_epoch(Index epoch);
    std::vector<EpochMetrics> train();

    const ModelParams& params() const { return replicas_[0]; }
    const TrainConfig& config() const { return cfg_; }
    InMemoryComm& comm() { return comm_; }

private:
    EpochMetrics epoch_minibatch(Index epoch);
    EpochMetrics epoch_fullgraph(Index epoch);
    void train_step(const SampledBatch& batch, PhaseTimings& timings, double& loss_out);

    TrainConfig cfg_;
    std::vector<EventGraph> train_events_;
    std::vector<EventGraph> val_events_;
    std::vector<CsrMatrix> edge_id_matrices_;
    IgnnArchitecture arch_;
    std::vector<ModelParams> replicas_;
    std::vector<AdamState> adam_states_;
    InMemoryComm comm_;
};

std::string metrics_csv_header();
void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const EpochMetrics> metrics, bool zero_timings = false);

}  // namespace hitgnn
