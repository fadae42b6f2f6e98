#include "hitgnn/autodiff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace hitgnn {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap emap(const DenseMatrix& m) { return ECMap(m.data.data(), m.rows, m.cols); }
EMap emap(DenseMatrix& m) { return EMap(m.data.data(), m.rows, m.cols); }

double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid_scalar(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_finite(const DenseMatrix& m, const char* where) {
    if (!m.all_finite()) fail_invalid(std::string(where) + ": non-finite entries");
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    fail_invalid("unknown activation: " + name);
}

std::string activation_to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
    }
    fail_invalid("bad activation value");
}

const Tape::Node& Tape::node_of(Tensor t) const {
    if (!t.valid() || t.node >= nodes_.size())
        fail_invalid("Tape: tensor does not belong to this tape");
    return nodes_[t.node];
}

Tensor Tape::push_node(Node node) {
    retained_elements_ += node.value.size();
    peak_retained_elements_ = std::max(peak_retained_elements_, retained_elements_);
    const Tensor t{node.value.rows, node.value.cols,
                   static_cast<std::uint32_t>(nodes_.size())};
    nodes_.push_back(std::move(node));
    return t;
}

Tensor Tape::input(DenseMatrix value, bool requires_grad) {
    check_finite(value, "Tape::input");
    Node node;
    node.kind = OpKind::input;
    node.requires_grad = requires_grad;
    node.value = std::move(value);
    return push_node(std::move(node));
}

Tensor Tape::linear(Tensor x, Tensor w, Tensor bias) {
    const auto& xn = node_of(x);
    const auto& wn = node_of(w);
    const auto& bn = node_of(bias);
    if (xn.value.cols != wn.value.rows)
        fail_invalid("linear: x has " + std::to_string(xn.value.cols) +
                     " cols but w has " + std::to_string(wn.value.rows) + " rows");
    if (bn.value.rows != 1 || bn.value.cols != wn.value.cols)
        fail_invalid("linear: bias must be 1 x " + std::to_string(wn.value.cols));

    Node node;
    node.kind = OpKind::linear;
    node.requires_grad = xn.requires_grad || wn.requires_grad || bn.requires_grad;
    node.inputs = {x.node, w.node, bias.node};
    node.value = DenseMatrix(xn.value.rows, wn.value.cols);
    emap(node.value).noalias() = emap(xn.value) * emap(wn.value);
    emap(node.value).rowwise() += emap(bn.value).row(0);
    check_finite(node.value, "linear");
    return push_node(std::move(node));
}

Tensor Tape::concat_cols(std::span<const Tensor> xs) {
    if (xs.empty()) fail_invalid("concat_cols: no inputs");
    const Index rows = node_of(xs[0]).value.rows;
    Index cols = 0;
    for (const Tensor& t : xs) {
        const auto& n = node_of(t);
        if (n.value.rows != rows) fail_invalid("concat_cols: row counts disagree");
        cols += n.value.cols;
    }
    Node node;
    node.kind = OpKind::concat;
    node.value = DenseMatrix(rows, cols);
    for (const Tensor& t : xs) {
        node.inputs.push_back(t.node);
        node.requires_grad = node.requires_grad || node_of(t).requires_grad;
    }
    Index col_base = 0;
    for (const Tensor& t : xs) {
        const auto& src = node_of(t).value;
        for (Index i = 0; i < rows; ++i)
            std::copy(src.row_ptr(i), src.row_ptr(i) + src.cols,
                      node.value.row_ptr(i) + col_base);
        col_base += src.cols;
    }
    return push_node(std::move(node));
}

Tensor Tape::gather_rows(Tensor x, std::vector<Index> idx) {
    const auto& xn = node_of(x);
    for (Index i : idx)
        if (i < 0 || i >= xn.value.rows)
            fail_invalid("gather_rows: index " + std::to_string(i) + " out of range");
    Node node;
    node.kind = OpKind::gather;
    node.requires_grad = xn.requires_grad;
    node.inputs = {x.node};
    node.value = DenseMatrix(static_cast<Index>(idx.size()), xn.value.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(xn.value.row_ptr(idx[i]), xn.value.row_ptr(idx[i]) + xn.value.cols,
                  node.value.row_ptr(static_cast<Index>(i)));
    node.idx = std::move(idx);
    return push_node(std::move(node));
}

Tensor Tape::scatter_add(Tensor y, std::vector<Index> idx, Index n_rows) {
    const auto& yn = node_of(y);
    if (static_cast<Index>(idx.size()) != yn.value.rows)
        fail_invalid("scatter_add: index list length must equal row count");
    for (Index i : idx)
        if (i < 0 || i >= n_rows)
            fail_invalid("scatter_add: index " + std::to_string(i) + " out of range");
    Node node;
    node.kind = OpKind::scatter;
    node.requires_grad = yn.requires_grad;
    node.inputs = {y.node};
    node.value = DenseMatrix(n_rows, yn.value.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = yn.value.row_ptr(static_cast<Index>(i));
        double* dst = node.value.row_ptr(idx[i]);
        for (Index c = 0; c < yn.value.cols; ++c) dst[c] += src[c];
    }
    node.idx = std::move(idx);
    return push_node(std::move(node));
}

Tensor Tape::activation(Tensor x, Activation kind) {
    const auto& xn = node_of(x);
    Node node;
    node.kind = OpKind::activation;
    node.act = kind;
    node.requires_grad = xn.requires_grad;
    node.inputs = {x.node};
    node.value = DenseMatrix(xn.value.rows, xn.value.cols);
    const std::size_t n = xn.value.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = xn.value.data[i];
        switch (kind) {
            case Activation::relu: node.value.data[i] = v > 0.0 ? v : 0.0; break;
            case Activation::sigmoid: node.value.data[i] = sigmoid_scalar(v); break;
            case Activation::tanh: node.value.data[i] = std::tanh(v); break;
        }
    }
    return push_node(std::move(node));
}

Tensor Tape::bce_with_logits(Tensor logits, std::vector<std::uint8_t> labels,
                             double pos_weight) {
    const auto& ln = node_of(logits);
    if (ln.value.cols != 1) fail_invalid("bce_with_logits: logits must be m x 1");
    if (ln.value.rows == 0) fail_invalid("bce_with_logits: empty edge set");
    if (static_cast<Index>(labels.size()) != ln.value.rows)
        fail_invalid("bce_with_logits: label count must equal logit count");
    for (std::uint8_t y : labels)
        if (y > 1) fail_invalid("bce_with_logits: labels must be 0 or 1");

    const Index m = ln.value.rows;
    double total = 0.0;
    for (Index i = 0; i < m; ++i) {
        const double z = ln.value.data[static_cast<std::size_t>(i)];
        total += labels[static_cast<std::size_t>(i)] ? pos_weight * softplus(-z)
                                                     : softplus(z);
    }
    Node node;
    node.kind = OpKind::bce;
    node.requires_grad = ln.requires_grad;
    node.inputs = {logits.node};
    node.labels = std::move(labels);
    node.pos_weight = pos_weight;
    node.value = DenseMatrix(1, 1, {total / static_cast<double>(m)});
    check_finite(node.value, "bce_with_logits");
    return push_node(std::move(node));
}

Tensor Tape::sum_all(Tensor x) {
    const auto& xn = node_of(x);
    double total = 0.0;
    for (double v : xn.value.data) total += v;
    Node node;
    node.kind = OpKind::sum;
    node.requires_grad = xn.requires_grad;
    node.inputs = {x.node};
    node.value = DenseMatrix(1, 1, {total});
    return push_node(std::move(node));
}

DenseMatrix& Tape::grad_buffer(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty() || n.grad.rows != n.value.rows || n.grad.cols != n.value.cols)
        n.grad = DenseMatrix(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::backward_node(std::uint32_t id) {
    Node& n = nodes_[id];
    const DenseMatrix& g = n.grad;
    switch (n.kind) {
        case OpKind::input:
            break;
        case OpKind::linear: {
            const Node& xn = nodes_[n.inputs[0]];
            const Node& wn = nodes_[n.inputs[1]];
            const Node& bn = nodes_[n.inputs[2]];
            if (xn.requires_grad)
                emap(grad_buffer(n.inputs[0])).noalias() += emap(g) * emap(wn.value).transpose();
            if (wn.requires_grad)
                emap(grad_buffer(n.inputs[1])).noalias() += emap(xn.value).transpose() * emap(g);
            if (bn.requires_grad)
                emap(grad_buffer(n.inputs[2])).row(0) += emap(g).colwise().sum();
            break;
        }
        case OpKind::concat: {
            Index col_base = 0;
            for (std::uint32_t in_id : n.inputs) {
                const Node& src = nodes_[in_id];
                if (src.requires_grad) {
                    DenseMatrix& gin = grad_buffer(in_id);
                    for (Index i = 0; i < g.rows; ++i) {
                        const double* gp = g.row_ptr(i) + col_base;
                        double* dp = gin.row_ptr(i);
                        for (Index c = 0; c < src.value.cols; ++c) dp[c] += gp[c];
                    }
                }
                col_base += src.value.cols;
            }
            break;
        }
        case OpKind::gather: {
            if (nodes_[n.inputs[0]].requires_grad) {
                DenseMatrix& gin = grad_buffer(n.inputs[0]);
                for (std::size_t i = 0; i < n.idx.size(); ++i) {
                    const double* gp = g.row_ptr(static_cast<Index>(i));
                    double* dp = gin.row_ptr(n.idx[i]);
                    for (Index c = 0; c < g.cols; ++c) dp[c] += gp[c];
                }
            }
            break;
        }
        case OpKind::scatter: {
            if (nodes_[n.inputs[0]].requires_grad) {
                DenseMatrix& gin = grad_buffer(n.inputs[0]);
                for (std::size_t i = 0; i < n.idx.size(); ++i) {
                    const double* gp = g.row_ptr(n.idx[i]);
                    double* dp = gin.row_ptr(static_cast<Index>(i));
                    for (Index c = 0; c < g.cols; ++c) dp[c] += gp[c];
                }
            }
            break;
        }
        case OpKind::activation: {
            if (nodes_[n.inputs[0]].requires_grad) {
                const Node& xn = nodes_[n.inputs[0]];
                DenseMatrix& gin = grad_buffer(n.inputs[0]);
                const std::size_t count = g.size();
                for (std::size_t i = 0; i < count; ++i) {
                    double d = 0.0;
                    switch (n.act) {
                        case Activation::relu:
                            d = xn.value.data[i] > 0.0 ? 1.0 : 0.0;
                            break;
                        case Activation::sigmoid: {
                            const double y = n.value.data[i];
                            d = y * (1.0 - y);
                            break;
                        }
                        case Activation::tanh: {
                            const double y = n.value.data[i];
                            d = 1.0 - y * y;
                            break;
                        }
                    }
                    gin.data[i] += g.data[i] * d;
                }
            }
            break;
        }
        case OpKind::bce: {
            if (nodes_[n.inputs[0]].requires_grad) {
                const Node& ln = nodes_[n.inputs[0]];
                DenseMatrix& gin = grad_buffer(n.inputs[0]);
                const double upstream = g.data[0];
                const double inv_m = 1.0 / static_cast<double>(ln.value.rows);
                for (Index i = 0; i < ln.value.rows; ++i) {
                    const double z = ln.value.data[static_cast<std::size_t>(i)];
                    const double s = sigmoid_scalar(z);
                    const double d = n.labels[static_cast<std::size_t>(i)]
                                         ? n.pos_weight * (s - 1.0)
                                         : s;
                    gin.data[static_cast<std::size_t>(i)] += upstream * inv_m * d;
                }
            }
            break;
        }
        case OpKind::sum: {
            if (nodes_[n.inputs[0]].requires_grad) {
                DenseMatrix& gin = grad_buffer(n.inputs[0]);
                const double upstream = g.data[0];
                for (double& v : gin.data) v += upstream;
            }
            break;
        }
    }
}

void Tape::backward(Tensor loss) {
    if (backward_done_)
        fail_state("Tape::backward: already run; re-record the tape first");
    const auto& ln = node_of(loss);
    if (ln.value.rows != 1 || ln.value.cols != 1)
        fail_invalid("Tape::backward: loss must be a 1x1 scalar");
    backward_done_ = true;
    grad_buffer(loss.node).data[0] = 1.0;
    for (std::uint32_t id = loss.node + 1; id-- > 0;) {
        if (nodes_[id].grad.data.empty()) continue;
        if (!nodes_[id].requires_grad && nodes_[id].kind != OpKind::input) continue;
        backward_node(id);
    }
}

const DenseMatrix& Tape::value(Tensor t) const { return node_of(t).value; }

DenseMatrix Tape::grad(Tensor t) const {
    const Node& n = node_of(t);
    if (n.grad.data.empty()) return DenseMatrix(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::clear() {
    nodes_.clear();
    backward_done_ = false;
    retained_elements_ = 0;
}

}  // namespace hitgnn
