#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hitgnn/autodiff.hpp"
#include "hitgnn/dense.hpp"
#include "hitgnn/rng.hpp"
#include "hitgnn/sparse.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

struct IgnnArchitecture {
    Index layers = 8;     // message-passing rounds
    Index hidden = 64;    // feature width f
    Index mlp_depth = 2;  // hidden layers per MLP
    Index node_in = 6;    // input node feature width
    Index edge_in = 2;    // input edge feature width
    Activation hidden_activation = Activation::relu;
    Activation encoder_output_activation = Activation::tanh;

    void validate() const;
    friend bool operator==(const IgnnArchitecture&, const IgnnArchitecture&) = default;
};

struct ParamSpec {
    std::string name;
    Index rows = 0;
    Index cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// Indices into ModelParams::specs for one MLP: weight_specs[i] is the i-th
// linear's weight; its bias immediately follows at weight_specs[i] + 1.
struct MlpSlot {
    std::vector<std::size_t> weight_specs;
};

// Every weight matrix and bias of the model, stored back to back in one
// contiguous buffer in a registration order that is deterministic given the
// architecture. The flat view is what gets all-reduced and checkpointed.
struct ModelParams {
    IgnnArchitecture arch;
    std::vector<ParamSpec> specs;
    std::vector<double> flat;

    MlpSlot node_encoder;
    MlpSlot edge_encoder;
    std::vector<MlpSlot> message;  // one per layer
    std::vector<MlpSlot> update;   // one per layer
    MlpSlot head;

    std::span<double> param_span(std::size_t spec_idx);
    std::span<const double> param_span(std::size_t spec_idx) const;
    DenseMatrix param_matrix(std::size_t spec_idx) const;
};

// Glorot-uniform weights, zero biases; bit-deterministic given the rng seed.
ModelParams init_params(const IgnnArchitecture& arch, Rng& rng);

struct ForwardResult {
    Tensor logits;
    std::vector<Tensor> param_tensors;  // aligned with ModelParams::specs
};

// Forward pass: node/edge encoders, `layers` rounds of message passing with
// residual concatenation of the initial encodings, dual scatter-add
// aggregation at source and destination endpoints, and the edge head.
// Returns one logit per edge of `adj` (in canonical entry order).
ForwardResult ignn_forward(Tape& tape, const CooMatrix& adj, const DenseMatrix& x,
                           const DenseMatrix& y, const ModelParams& params);

// Gradients in registration order, flattened to match ModelParams::flat.
std::vector<double> flatten_grads(const std::vector<DenseMatrix>& grads,
                                  const ModelParams& params);
std::vector<double> flatten_grads(const Tape& tape, const ForwardResult& fr,
                                  const ModelParams& params);
std::vector<DenseMatrix> unflatten_grads(std::span<const double> flat,
                                         const ModelParams& params);

// Rough count of tape-retained elements for a forward+backward pass on a
// graph with n vertices and m edges; used for the full-graph skip budget.
std::size_t estimate_activation_elements(const IgnnArchitecture& arch, Index n_vertices,
                                         Index n_edges);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace hitgnn
