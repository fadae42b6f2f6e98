#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hitgnn/dense.hpp"
#include "hitgnn/types.hpp"

namespace hitgnn {

enum class Activation : std::uint8_t { relu, sigmoid, tanh };

Activation activation_from_string(const std::string& name);
std::string activation_to_string(Activation a);

// Handle into a Tape. Copyable and cheap; the tape owns all storage.
struct Tensor {
    Index rows = 0;
    Index cols = 0;
    std::uint32_t node = UINT32_MAX;

    bool valid() const { return node != UINT32_MAX; }
};

// Reverse-mode tape over dense matrices. Records exactly the operation set a
// message-passing forward pass needs and keeps every intermediate it
// constructs, since backward re-reads them. One tape per training step per
// worker; call clear() (or destroy) between steps.
class Tape {
public:
    // Leaf tensor. Rejects non-finite entries.
    Tensor input(DenseMatrix value, bool requires_grad = false);

    // x[n,p] * w[p,q] + bias[1,q], bias broadcast over rows.
    Tensor linear(Tensor x, Tensor w, Tensor bias);

    // Columns concatenated in argument order; equal row counts required.
    Tensor concat_cols(std::span<const Tensor> xs);

    // out[i] = x[idx[i]]. Repeated indices allowed; backward scatter-adds.
    Tensor gather_rows(Tensor x, std::vector<Index> idx);

    // out[v] = sum over i with idx[i] == v of y[i]; out has n_rows rows.
    Tensor scatter_add(Tensor y, std::vector<Index> idx, Index n_rows);

    Tensor activation(Tensor x, Activation kind);

    // Mean over rows of weighted binary cross-entropy on logits[m,1], in the
    // numerically stable softplus form. Positive labels are weighted by
    // pos_weight. Errors on an empty edge set.
    Tensor bce_with_logits(Tensor logits, std::vector<std::uint8_t> labels,
                           double pos_weight = 1.0);

    Tensor sum_all(Tensor x);

    // Reverse sweep from a scalar loss. Gradients accumulate additively at
    // fan-out points. Calling twice without re-recording is an error.
    void backward(Tensor loss);

    const DenseMatrix& value(Tensor t) const;

    // Gradient of the last backward() with respect to t; a zero matrix if t
    // never received one (e.g. a disconnected parameter).
    DenseMatrix grad(Tensor t) const;

    void clear();

    std::size_t node_count() const { return nodes_.size(); }
    // Elements retained for backward (all recorded values), and the high-water
    // mark across the tape's lifetime.
    std::size_t retained_elements() const { return retained_elements_; }
    std::size_t peak_retained_elements() const { return peak_retained_elements_; }

private:
    enum class OpKind : std::uint8_t {
        input,
        linear,
        concat,
        gather,
        scatter,
        activation,
        bce,
        sum
    };

    struct Node {
        OpKind kind;
        bool requires_grad = false;
        Activation act = Activation::relu;
        double pos_weight = 1.0;
        std::vector<std::uint32_t> inputs;
        std::vector<Index> idx;
        std::vector<std::uint8_t> labels;
        DenseMatrix value;
        DenseMatrix grad;  // lazily allocated during backward
    };

    const Node& node_of(Tensor t) const;
    Tensor push_node(Node node);
    DenseMatrix& grad_buffer(std::uint32_t id);
    void backward_node(std::uint32_t id);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
    std::size_t retained_elements_ = 0;
    std::size_t peak_retained_elements_ = 0;
};

}  // namespace hitgnn
