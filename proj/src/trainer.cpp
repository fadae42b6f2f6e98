#include "hitgnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

namespace hitgnn {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Stream tags for seed derivation.
constexpr std::uint64_t kStreamInit = 0x696e6974ULL;
constexpr std::uint64_t kStreamRoots = 0x726f6f7473ULL;
constexpr std::uint64_t kStreamSample = 0x73616d706cULL;
constexpr std::uint64_t kStreamFullOrder = 0x66756c6cULL;

class StopWatch {
public:
    double lap() {
        const auto t1 = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(t1 - t0_).count();
        t0_ = t1;
        return s;
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

TrainMode train_mode_from_string(const std::string& name) {
    if (name == "minibatch") return TrainMode::minibatch;
    if (name == "fullgraph") return TrainMode::fullgraph;
    fail_invalid("unknown train mode: " + name);
}

std::string train_mode_to_string(TrainMode mode) {
    return mode == TrainMode::minibatch ? "minibatch" : "fullgraph";
}

void TrainConfig::validate() const {
    if (batch_size < 1) fail_invalid("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) fail_invalid("TrainConfig: epochs must be >= 1");
    if (workers < 1) fail_invalid("TrainConfig: workers must be >= 1");
    if (batch_size % workers != 0)
        fail_invalid("TrainConfig: batch_size (" + std::to_string(batch_size) +
                     ") must be divisible by workers (" + std::to_string(workers) + ")");
    if (bulk_batches < 1) fail_invalid("TrainConfig: bulk_batches must be >= 1");
    if (hidden < 1 || layers < 1 || mlp_depth < 1)
        fail_invalid("TrainConfig: model dimensions must be >= 1");
    if (depth < 1 || fanout < 1)
        fail_invalid("TrainConfig: sampler depth and fanout must be >= 1");
    if (!(learning_rate > 0.0)) fail_invalid("TrainConfig: learning_rate must be > 0");
    if (!(pos_weight > 0.0)) fail_invalid("TrainConfig: pos_weight must be > 0");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        fail_invalid("TrainConfig: threshold must be in [0, 1]");
    if (max_batches_per_event < 0)
        fail_invalid("TrainConfig: max_batches_per_event must be >= 0");
}

InMemoryComm::InMemoryComm(int world_size)
    : world_size_(world_size),
      barrier_(world_size),
      bufs_(static_cast<std::size_t>(world_size), nullptr),
      lens_(static_cast<std::size_t>(world_size), 0) {
    if (world_size < 1) fail_invalid("InMemoryComm: world_size must be >= 1");
}

void InMemoryComm::allreduce_mean(int rank, std::span<double> buf) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto w = static_cast<std::size_t>(world_size_);
    bufs_[static_cast<std::size_t>(rank)] = buf.data();
    lens_[static_cast<std::size_t>(rank)] = buf.size();
    barrier_.arrive_and_wait();

    const std::size_t n = lens_[0];
    bool mismatch = false;
    for (std::size_t q = 0; q < w; ++q) mismatch = mismatch || lens_[q] != n;
    if (rank == 0 && !mismatch) scratch_.resize(n);
    barrier_.arrive_and_wait();
    if (mismatch)
        fail_invalid("allreduce: buffer lengths differ across ranks");

    // Reduce-scatter: rank r owns one chunk and accumulates it in rank order,
    // so the per-element sum order never depends on the chunking.
    const std::size_t lo = n * static_cast<std::size_t>(rank) / w;
    const std::size_t hi = n * (static_cast<std::size_t>(rank) + 1) / w;
    const double inv_w = 1.0 / static_cast<double>(world_size_);
    for (std::size_t e = lo; e < hi; ++e) {
        double sum = bufs_[0][e];
        for (std::size_t q = 1; q < w; ++q) sum += bufs_[q][e];
        scratch_[e] = sum * inv_w;
    }
    barrier_.arrive_and_wait();

    // All-gather: every rank copies the full reduced buffer back.
    std::copy(scratch_.begin(), scratch_.end(), buf.begin());
    barrier_.arrive_and_wait();

    if (rank == 0) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        bytes_.fetch_add(n * sizeof(double), std::memory_order_relaxed);
        const auto t1 = std::chrono::steady_clock::now();
        reduce_ns_.fetch_add(
            static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()),
            std::memory_order_relaxed);
    }
}

void InMemoryComm::reset_counters() {
    calls_ = 0;
    bytes_ = 0;
    reduce_ns_ = 0;
}

void run_workers(int world_size, const std::function<void(int)>& body) {
    if (world_size < 1) fail_invalid("run_workers: world_size must be >= 1");
    if (world_size == 1) {
        body(0);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(world_size));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(world_size));
    for (int rank = 0; rank < world_size; ++rank) {
        threads.emplace_back([rank, &body, &errors] {
            try {
                body(rank);
            } catch (...) {
                errors[static_cast<std::size_t>(rank)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void allreduce_coalesced(std::span<double> flat_grads, const CommHandle& comm) {
    comm.allreduce_mean(flat_grads);
}

void allreduce_per_tensor(std::span<double> flat_grads, const ModelParams& params,
                          const CommHandle& comm) {
    if (flat_grads.size() != params.flat.size())
        fail_invalid("allreduce_per_tensor: gradient buffer length mismatch");
    for (const ParamSpec& spec : params.specs)
        comm.allreduce_mean(flat_grads.subspan(spec.offset, spec.size()));
}

void AdamState::init(std::size_t n) {
    first_moment.assign(n, 0.0);
    second_moment.assign(n, 0.0);
    step = 0;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate) {
    if (params.size() != grads.size())
        fail_invalid("adam_step: parameter and gradient lengths disagree");
    if (state.first_moment.size() != params.size())
        fail_invalid("adam_step: optimizer state size mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            fail_state("adam_step: non-finite gradient at element " + std::to_string(i) +
                       "; step rejected");
    ++state.step;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grads[i];
        v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grads[i] * grads[i];
        params[i] -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
    }
}

Rng roots_rng(std::uint64_t seed, Index epoch, Index event_ordinal) {
    return Rng(Rng::derive(seed, {kStreamRoots, static_cast<std::uint64_t>(epoch),
                                  static_cast<std::uint64_t>(event_ordinal)}));
}

std::uint64_t root_stream_seed(std::uint64_t seed, Index epoch, Index event_ordinal,
                               Index batch_index, Index root_pos) {
    return Rng::derive(seed, {kStreamSample, static_cast<std::uint64_t>(epoch),
                              static_cast<std::uint64_t>(event_ordinal),
                              static_cast<std::uint64_t>(batch_index),
                              static_cast<std::uint64_t>(root_pos)});
}

Rng init_rng(std::uint64_t seed) { return Rng(Rng::derive(seed, {kStreamInit})); }

Rng fullgraph_order_rng(std::uint64_t seed, Index epoch) {
    return Rng(Rng::derive(seed, {kStreamFullOrder, static_cast<std::uint64_t>(epoch)}));
}

std::pair<Index, Index> worker_component_range(Index n_components, int rank,
                                               int world_size) {
    const auto w = static_cast<Index>(world_size);
    const auto r = static_cast<Index>(rank);
    return {n_components * r / w, n_components * (r + 1) / w};
}

SampledBatch slice_components(const SampledBatch& batch, Index begin, Index end) {
    const Index n_comp = batch.n_components();
    if (begin < 0 || end < begin || end > n_comp)
        fail_invalid("slice_components: bad component range");
    const Index v0 = batch.component_offsets[static_cast<std::size_t>(begin)];
    const Index v1 = batch.component_offsets[static_cast<std::size_t>(end)];

    SampledBatch out;
    out.component_offsets.reserve(static_cast<std::size_t>(end - begin) + 1);
    for (Index c = begin; c <= end; ++c)
        out.component_offsets.push_back(batch.component_offsets[static_cast<std::size_t>(c)] - v0);

    const auto& entries = batch.adjacency.entries;
    const auto first = std::lower_bound(
        entries.begin(), entries.end(), v0,
        [](const CooEntry& e, Index v) { return e.row < v; });
    const auto last = std::lower_bound(
        entries.begin(), entries.end(), v1,
        [](const CooEntry& e, Index v) { return e.row < v; });
    out.adjacency.n_rows = out.adjacency.n_cols = v1 - v0;
    for (auto it = first; it != last; ++it)
        out.adjacency.entries.push_back({it->row - v0, it->col - v0, it->value});

    out.local_to_global.assign(batch.local_to_global.begin() + v0,
                               batch.local_to_global.begin() + v1);
    for (Index c = begin; c < end; ++c)
        out.roots_local.push_back(batch.roots_local[static_cast<std::size_t>(c)] - v0);

    const auto p0 = static_cast<Index>(first - entries.begin());
    const auto p1 = static_cast<Index>(last - entries.begin());
    if (batch.node_features.rows > 0) {
        out.node_features = DenseMatrix(v1 - v0, batch.node_features.cols);
        std::copy(batch.node_features.row_ptr(v0), batch.node_features.row_ptr(v0) + (v1 - v0) * batch.node_features.cols,
                  out.node_features.data.begin());
    }
    if (batch.edge_features.rows > 0 || batch.n_edges() == 0) {
        out.edge_features = DenseMatrix(p1 - p0, batch.edge_features.cols);
        if (p1 > p0)
            std::copy(batch.edge_features.row_ptr(p0),
                      batch.edge_features.row_ptr(p0) + (p1 - p0) * batch.edge_features.cols,
                      out.edge_features.data.begin());
    }
    if (!batch.edge_labels.empty() || batch.n_edges() == 0)
        out.edge_labels.assign(batch.edge_labels.begin() + p0, batch.edge_labels.begin() + p1);
    if (!batch.edge_global_ids.empty() || batch.n_edges() == 0)
        out.edge_global_ids.assign(batch.edge_global_ids.begin() + p0,
                                   batch.edge_global_ids.begin() + p1);
    return out;
}

std::vector<double> predict_logits(const ModelParams& params, const CooMatrix& adj,
                                   const DenseMatrix& x, const DenseMatrix& y) {
    Tape tape;
    const ForwardResult fr = ignn_forward(tape, adj, x, y, params);
    const DenseMatrix& logits = tape.value(fr.logits);
    return logits.data;
}

EdgeMetrics evaluate_events(const ModelParams& params,
                            std::span<const EventGraph> events, double threshold) {
    std::vector<std::uint8_t> all_masks;
    std::vector<std::uint8_t> all_labels;
    for (const EventGraph& event : events) {
        if (event.m() == 0) continue;
        const auto logits =
            predict_logits(params, event.edges, event.node_features, event.edge_features);
        const auto mask = classify_edges(logits, threshold);
        all_masks.insert(all_masks.end(), mask.begin(), mask.end());
        all_labels.insert(all_labels.end(), event.labels.begin(), event.labels.end());
    }
    return precision_recall(all_masks, all_labels, threshold);
}

Trainer::Trainer(TrainConfig cfg, std::vector<EventGraph> train_events,
                 std::vector<EventGraph> val_events)
    : cfg_(cfg),
      train_events_(std::move(train_events)),
      val_events_(std::move(val_events)),
      comm_(static_cast<int>(cfg.workers)) {
    cfg_.validate();
    if (train_events_.empty()) fail_invalid("Trainer: no training events");
    for (const EventGraph& event : train_events_) {
        if (event.n == 0) fail_invalid("Trainer: event graph with zero vertices");
        event.validate();
    }
    const Index f_v = train_events_.front().node_features.cols;
    const Index f_e = train_events_.front().edge_features.cols;
    for (const EventGraph& event : train_events_)
        if (event.node_features.cols != f_v || event.edge_features.cols != f_e)
            fail_invalid("Trainer: inconsistent feature widths across events");
    for (const EventGraph& event : val_events_)
        if (event.node_features.cols != f_v || event.edge_features.cols != f_e)
            fail_invalid("Trainer: validation feature widths do not match training");

    arch_.layers = cfg_.layers;
    arch_.hidden = cfg_.hidden;
    arch_.mlp_depth = cfg_.mlp_depth;
    arch_.node_in = f_v;
    arch_.edge_in = f_e;
    arch_.hidden_activation = cfg_.hidden_activation;
    arch_.encoder_output_activation = cfg_.encoder_output_activation;

    edge_id_matrices_.reserve(train_events_.size());
    for (const EventGraph& event : train_events_)
        edge_id_matrices_.push_back(make_edge_id_matrix(event));

    Rng rng = init_rng(cfg_.seed);
    ModelParams initial = init_params(arch_, rng);
    replicas_.assign(static_cast<std::size_t>(cfg_.workers), initial);
    adam_states_.resize(static_cast<std::size_t>(cfg_.workers));
    for (auto& state : adam_states_) state.init(initial.flat.size());
}

void Trainer::train_step(const SampledBatch& batch, PhaseTimings& timings,
                         double& loss_out) {
    const int w = static_cast<int>(cfg_.workers);
    std::vector<double> rank_loss(static_cast<std::size_t>(w), 0.0);
    PhaseTimings rank0;

    run_workers(w, [&](int rank) {
        StopWatch watch;
        const auto [c0, c1] = worker_component_range(batch.n_components(), rank, w);
        const SampledBatch shard = slice_components(batch, c0, c1);

        Tape tape;
        std::vector<double> grads(replicas_[static_cast<std::size_t>(rank)].flat.size(), 0.0);
        double fwd_s = 0.0, bwd_s = 0.0;
        if (shard.n_edges() > 0) {
            const ForwardResult fr =
                ignn_forward(tape, shard.adjacency, shard.node_features,
                             shard.edge_features, replicas_[static_cast<std::size_t>(rank)]);
            Tensor logits = fr.logits;
            std::vector<std::uint8_t> labels = shard.edge_labels;
            bool have_loss = true;
            if (cfg_.roots_only_loss) {
                std::vector<Index> selected;
                std::vector<std::uint8_t> selected_labels;
                std::vector<bool> is_root(static_cast<std::size_t>(shard.n_vertices()), false);
                for (Index r : shard.roots_local) is_root[static_cast<std::size_t>(r)] = true;
                for (std::size_t i = 0; i < shard.adjacency.entries.size(); ++i) {
                    const auto& e = shard.adjacency.entries[i];
                    if (is_root[static_cast<std::size_t>(e.row)] ||
                        is_root[static_cast<std::size_t>(e.col)]) {
                        selected.push_back(static_cast<Index>(i));
                        selected_labels.push_back(shard.edge_labels[i]);
                    }
                }
                if (selected.empty()) {
                    have_loss = false;
                } else {
                    logits = tape.gather_rows(logits, std::move(selected));
                    labels = std::move(selected_labels);
                }
            }
            if (have_loss) {
                const Tensor loss =
                    tape.bce_with_logits(logits, std::move(labels), cfg_.pos_weight);
                rank_loss[static_cast<std::size_t>(rank)] = tape.value(loss).data[0];
                fwd_s = watch.lap();
                tape.backward(loss);
                grads = flatten_grads(tape, fr, replicas_[static_cast<std::size_t>(rank)]);
                bwd_s = watch.lap();
            } else {
                fwd_s = watch.lap();
            }
        } else {
            fwd_s = watch.lap();
        }

        const CommHandle handle{&comm_, rank};
        watch.lap();
        if (cfg_.coalesce)
            allreduce_coalesced(grads, handle);
        else
            allreduce_per_tensor(grads, replicas_[static_cast<std::size_t>(rank)], handle);
        const double ar_s = watch.lap();

        adam_step(replicas_[static_cast<std::size_t>(rank)].flat, grads,
                  adam_states_[static_cast<std::size_t>(rank)], cfg_.learning_rate);
        const double opt_s = watch.lap();

        if (rank == 0) {
            rank0.forward_s = fwd_s;
            rank0.backward_s = bwd_s;
            rank0.allreduce_s = ar_s;
            rank0.optimizer_s = opt_s;
        }
    });

    double loss_sum = 0.0;
    for (double l : rank_loss) loss_sum += l;
    loss_out = loss_sum / static_cast<double>(w);
    timings.forward_s += rank0.forward_s;
    timings.backward_s += rank0.backward_s;
    timings.allreduce_s += rank0.allreduce_s;
    timings.optimizer_s += rank0.optimizer_s;
}

EpochMetrics Trainer::epoch_minibatch(Index epoch) {
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.mode = TrainMode::minibatch;
    const std::uint64_t calls_before = comm_.collective_calls();

    double loss_sum = 0.0;
    Index steps = 0;
    SamplerConfig scfg;
    scfg.depth = cfg_.depth;
    scfg.fanout = cfg_.fanout;
    scfg.batch_size = cfg_.batch_size;
    scfg.symmetrize = cfg_.symmetrize;

    for (std::size_t event_ordinal = 0; event_ordinal < train_events_.size();
         ++event_ordinal) {
        const EventGraph& event = train_events_[event_ordinal];
        Rng rng = roots_rng(cfg_.seed, epoch, static_cast<Index>(event_ordinal));
        auto batches = epoch_root_batches(event.n, cfg_.batch_size, rng);
        if (cfg_.max_batches_per_event > 0 &&
            static_cast<Index>(batches.size()) > cfg_.max_batches_per_event)
            batches.resize(static_cast<std::size_t>(cfg_.max_batches_per_event));

        for (std::size_t b0 = 0; b0 < batches.size(); b0 += static_cast<std::size_t>(cfg_.bulk_batches)) {
            const std::size_t b1 =
                std::min(batches.size(), b0 + static_cast<std::size_t>(cfg_.bulk_batches));
            const std::vector<std::vector<Index>> chunk(batches.begin() + static_cast<std::ptrdiff_t>(b0),
                                                        batches.begin() + static_cast<std::ptrdiff_t>(b1));
            std::vector<std::uint64_t> stream_seeds;
            for (std::size_t bi = b0; bi < b1; ++bi)
                for (std::size_t pos = 0; pos < batches[bi].size(); ++pos)
                    stream_seeds.push_back(root_stream_seed(
                        cfg_.seed, epoch, static_cast<Index>(event_ordinal),
                        static_cast<Index>(bi), static_cast<Index>(pos)));
            PerRootChoiceSource choice(std::move(stream_seeds));

            scfg.bulk_batches = static_cast<Index>(b1 - b0);
            StopWatch watch;
            auto sampled = bulk_shadow(edge_id_matrices_[event_ordinal], chunk, scfg, choice);
            for (auto& sb : sampled) gather_features(sb, event);
            metrics.timings.sample_s += watch.lap();

            for (const auto& sb : sampled) {
                double step_loss = 0.0;
                train_step(sb, metrics.timings, step_loss);
                loss_sum += step_loss;
                ++steps;
            }
        }
    }
    metrics.steps = steps;
    metrics.loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
    metrics.allreduce_calls = comm_.collective_calls() - calls_before;
    return metrics;
}

EpochMetrics Trainer::epoch_fullgraph(Index epoch) {
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.mode = TrainMode::fullgraph;
    const std::uint64_t calls_before = comm_.collective_calls();

    std::vector<Index> order(train_events_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    Rng rng = fullgraph_order_rng(cfg_.seed, epoch);
    for (Index i = static_cast<Index>(order.size()) - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    const int w = static_cast<int>(cfg_.workers);
    double loss_sum = 0.0;
    Index steps = 0;
    for (Index idx : order) {
        const EventGraph& event = train_events_[static_cast<std::size_t>(idx)];
        const std::size_t estimate =
            estimate_activation_elements(arch_, event.n, event.m());
        if (event.m() == 0 || estimate > cfg_.fullgraph_budget_elements) {
            ++metrics.skipped_graphs;
            continue;
        }

        std::vector<double> rank_loss(static_cast<std::size_t>(w), 0.0);
        PhaseTimings rank0;
        run_workers(w, [&](int rank) {
            StopWatch watch;
            Tape tape;
            const ForwardResult fr =
                ignn_forward(tape, event.edges, event.node_features, event.edge_features,
                             replicas_[static_cast<std::size_t>(rank)]);
            // Each rank trains on its contiguous slice of the edge list.
            const Index m = event.m();
            const Index e0 = m * rank / w;
            const Index e1 = m * (rank + 1) / w;
            std::vector<double> grads(replicas_[static_cast<std::size_t>(rank)].flat.size(), 0.0);
            double fwd_s = 0.0, bwd_s = 0.0;
            if (e1 > e0) {
                std::vector<Index> slice(static_cast<std::size_t>(e1 - e0));
                for (Index i = e0; i < e1; ++i) slice[static_cast<std::size_t>(i - e0)] = i;
                std::vector<std::uint8_t> labels(event.labels.begin() + e0,
                                                 event.labels.begin() + e1);
                const Tensor logits = tape.gather_rows(fr.logits, std::move(slice));
                const Tensor loss =
                    tape.bce_with_logits(logits, std::move(labels), cfg_.pos_weight);
                rank_loss[static_cast<std::size_t>(rank)] = tape.value(loss).data[0];
                fwd_s = watch.lap();
                tape.backward(loss);
                grads = flatten_grads(tape, fr, replicas_[static_cast<std::size_t>(rank)]);
                bwd_s = watch.lap();
            } else {
                fwd_s = watch.lap();
            }

            const CommHandle handle{&comm_, rank};
            watch.lap();
            if (cfg_.coalesce)
                allreduce_coalesced(grads, handle);
            else
                allreduce_per_tensor(grads, replicas_[static_cast<std::size_t>(rank)], handle);
            const double ar_s = watch.lap();
            adam_step(replicas_[static_cast<std::size_t>(rank)].flat, grads,
                      adam_states_[static_cast<std::size_t>(rank)], cfg_.learning_rate);
            const double opt_s = watch.lap();
            if (rank == 0) {
                rank0.forward_s = fwd_s;
                rank0.backward_s = bwd_s;
                rank0.allreduce_s = ar_s;
                rank0.optimizer_s = opt_s;
            }
        });

        double step_loss = 0.0;
        for (double l : rank_loss) step_loss += l;
        loss_sum += step_loss / static_cast<double>(w);
        ++steps;
        metrics.timings.forward_s += rank0.forward_s;
        metrics.timings.backward_s += rank0.backward_s;
        metrics.timings.allreduce_s += rank0.allreduce_s;
        metrics.timings.optimizer_s += rank0.optimizer_s;
    }
    if (steps == 0 && metrics.skipped_graphs > 0)
        std::fprintf(stderr,
                     "warning: fullgraph epoch %lld made no steps; all %lld graphs "
                     "exceeded the activation budget\n",
                     static_cast<long long>(epoch),
                     static_cast<long long>(metrics.skipped_graphs));
    metrics.steps = steps;
    metrics.loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
    metrics.allreduce_calls = comm_.collective_calls() - calls_before;
    return metrics;
}

EpochMetrics Trainer::run_epoch(Index epoch) {
    return cfg_.mode == TrainMode::minibatch ? epoch_minibatch(epoch)
                                             : epoch_fullgraph(epoch);
}

std::vector<EpochMetrics> Trainer::train() {
    std::vector<EpochMetrics> all;
    all.reserve(static_cast<std::size_t>(cfg_.epochs));
    for (Index epoch = 0; epoch < cfg_.epochs; ++epoch) {
        EpochMetrics metrics = run_epoch(epoch);
        if (!val_events_.empty()) {
            const EdgeMetrics val =
                evaluate_events(replicas_[0], val_events_, cfg_.threshold);
            metrics.val_precision = val.precision;
            metrics.val_recall = val.recall;
        }
        all.push_back(metrics);
    }
    return all;
}

std::string metrics_csv_header() {
    return "epoch,mode,loss,val_precision,val_recall,t_sample_s,t_train_s,"
           "t_allreduce_s,allreduce_calls,skipped_graphs";
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const EpochMetrics> metrics, bool zero_timings) {
    std::ofstream out(path);
    if (!out) fail_state("write_metrics_csv: cannot open " + path.string());
    out << metrics_csv_header() << "\n";
    for (const EpochMetrics& m : metrics) {
        const double t_sample = zero_timings ? 0.0 : m.timings.sample_s;
        const double t_train = zero_timings ? 0.0
                                            : m.timings.forward_s + m.timings.backward_s +
                                                  m.timings.optimizer_s;
        const double t_allreduce = zero_timings ? 0.0 : m.timings.allreduce_s;
        out << m.epoch << ',' << train_mode_to_string(m.mode) << ','
            << format_double("%.12g", m.loss) << ','
            << (m.val_precision ? format_double("%.12g", *m.val_precision) : "") << ','
            << (m.val_recall ? format_double("%.12g", *m.val_recall) : "") << ','
            << format_double("%.6f", t_sample) << ',' << format_double("%.6f", t_train)
            << ',' << format_double("%.6f", t_allreduce) << ',' << m.allreduce_calls
            << ',' << m.skipped_graphs << "\n";
    }
    if (!out) fail_state("write_metrics_csv: write failed for " + path.string());
}

}  // namespace hitgnn
