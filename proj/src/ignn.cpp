#include "hitgnn/ignn.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace hitgnn {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kCheckpointVersion = 1;

struct ParamBuilder {
    ModelParams params;

    MlpSlot add_mlp(const std::string& name, Index in_width, Index out_width,
                    const IgnnArchitecture& arch) {
        MlpSlot slot;
        Index in = in_width;
        for (Index layer = 0; layer <= arch.mlp_depth; ++layer) {
            const Index out = layer == arch.mlp_depth ? out_width : arch.hidden;
            const std::string base = name + "." + std::to_string(layer);
            slot.weight_specs.push_back(params.specs.size());
            add_spec(base + ".weight", in, out);
            add_spec(base + ".bias", 1, out);
            in = out;
        }
        return slot;
    }

    void add_spec(const std::string& name, Index rows, Index cols) {
        ParamSpec spec{name, rows, cols, next_offset};
        next_offset += spec.size();
        params.specs.push_back(std::move(spec));
    }

    std::size_t next_offset = 0;
};

ModelParams build_layout(const IgnnArchitecture& arch) {
    arch.validate();
    ParamBuilder b;
    b.params.arch = arch;
    const Index f = arch.hidden;
    b.params.node_encoder = b.add_mlp("node_encoder", arch.node_in, f, arch);
    b.params.edge_encoder = b.add_mlp("edge_encoder", arch.edge_in, f, arch);
    for (Index l = 0; l < arch.layers; ++l) {
        b.params.message.push_back(
            b.add_mlp("layer." + std::to_string(l) + ".message", 6 * f, f, arch));
        b.params.update.push_back(
            b.add_mlp("layer." + std::to_string(l) + ".update", 4 * f, f, arch));
    }
    b.params.head = b.add_mlp("edge_head", 2 * f, 1, arch);
    b.params.flat.assign(b.next_offset, 0.0);
    return std::move(b.params);
}

// Applies one MLP; hidden layers use the architecture's hidden activation,
// the output passes through `out_act` when provided.
Tensor apply_mlp(Tape& tape, const ModelParams& params, const ForwardResult& fr,
                 const MlpSlot& slot, Tensor x, const Activation* out_act) {
    const Activation hidden = params.arch.hidden_activation;
    for (std::size_t i = 0; i < slot.weight_specs.size(); ++i) {
        const std::size_t w = slot.weight_specs[i];
        x = tape.linear(x, fr.param_tensors[w], fr.param_tensors[w + 1]);
        if (i + 1 < slot.weight_specs.size()) x = tape.activation(x, hidden);
    }
    if (out_act) x = tape.activation(x, *out_act);
    return x;
}

}  // namespace

void IgnnArchitecture::validate() const {
    if (layers < 1) fail_invalid("IgnnArchitecture: layers must be >= 1");
    if (hidden < 1) fail_invalid("IgnnArchitecture: hidden width must be >= 1");
    if (mlp_depth < 1) fail_invalid("IgnnArchitecture: mlp_depth must be >= 1");
    if (node_in < 1 || edge_in < 1)
        fail_invalid("IgnnArchitecture: feature widths must be >= 1");
}

std::span<double> ModelParams::param_span(std::size_t spec_idx) {
    const ParamSpec& s = specs[spec_idx];
    return {flat.data() + s.offset, s.size()};
}

std::span<const double> ModelParams::param_span(std::size_t spec_idx) const {
    const ParamSpec& s = specs[spec_idx];
    return {flat.data() + s.offset, s.size()};
}

DenseMatrix ModelParams::param_matrix(std::size_t spec_idx) const {
    const ParamSpec& s = specs[spec_idx];
    return DenseMatrix(s.rows, s.cols,
                       std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(s.offset),
                                           flat.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size())));
}

ModelParams init_params(const IgnnArchitecture& arch, Rng& rng) {
    ModelParams params = build_layout(arch);
    for (std::size_t i = 0; i < params.specs.size(); ++i) {
        const ParamSpec& spec = params.specs[i];
        auto dst = params.param_span(i);
        if (spec.name.ends_with(".bias")) continue;  // biases stay zero
        const double limit = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
        for (double& v : dst) v = rng.uniform(-limit, limit);
    }
    return params;
}

ForwardResult ignn_forward(Tape& tape, const CooMatrix& adj, const DenseMatrix& x,
                           const DenseMatrix& y, const ModelParams& params) {
    const IgnnArchitecture& arch = params.arch;
    if (!adj.is_canonical()) fail_invalid("ignn_forward: adjacency must be canonical");
    if (adj.n_rows != adj.n_cols) fail_invalid("ignn_forward: adjacency must be square");
    if (x.rows != adj.n_rows)
        fail_invalid("ignn_forward: node feature rows (" + std::to_string(x.rows) +
                     ") != vertex count (" + std::to_string(adj.n_rows) + ")");
    if (y.rows != adj.nnz())
        fail_invalid("ignn_forward: edge feature rows (" + std::to_string(y.rows) +
                     ") != edge count (" + std::to_string(adj.nnz()) + ")");
    if (x.cols != arch.node_in || y.cols != arch.edge_in)
        fail_invalid("ignn_forward: feature widths do not match architecture");

    ForwardResult fr;
    fr.param_tensors.reserve(params.specs.size());
    for (std::size_t i = 0; i < params.specs.size(); ++i) {
        const ParamSpec& s = params.specs[i];
        auto src = params.param_span(i);
        fr.param_tensors.push_back(tape.input(
            DenseMatrix(s.rows, s.cols, std::vector<double>(src.begin(), src.end())),
            /*requires_grad=*/true));
    }

    std::vector<Index> rows, cols;
    rows.reserve(adj.entries.size());
    cols.reserve(adj.entries.size());
    for (const auto& e : adj.entries) {
        rows.push_back(e.row);
        cols.push_back(e.col);
    }

    const Activation enc_act = arch.encoder_output_activation;
    const Activation hid_act = arch.hidden_activation;
    const Tensor x_in = tape.input(x);
    const Tensor y_in = tape.input(y);
    const Tensor x0 = apply_mlp(tape, params, fr, params.node_encoder, x_in, &enc_act);
    const Tensor y0 = apply_mlp(tape, params, fr, params.edge_encoder, y_in, &enc_act);

    Tensor xl = x0;
    Tensor yl = y0;
    for (Index l = 0; l < arch.layers; ++l) {
        const Tensor xp = tape.concat_cols(std::array{xl, x0});
        const Tensor yp = tape.concat_cols(std::array{yl, y0});
        const Tensor x_src = tape.gather_rows(xp, rows);
        const Tensor x_dst = tape.gather_rows(xp, cols);
        const Tensor msg_in = tape.concat_cols(std::array{yp, x_src, x_dst});
        yl = apply_mlp(tape, params, fr, params.message[static_cast<std::size_t>(l)],
                       msg_in, &hid_act);
        const Tensor m_src = tape.scatter_add(yl, rows, adj.n_rows);
        const Tensor m_dst = tape.scatter_add(yl, cols, adj.n_rows);
        const Tensor upd_in = tape.concat_cols(std::array{m_src, m_dst, xp});
        xl = apply_mlp(tape, params, fr, params.update[static_cast<std::size_t>(l)],
                       upd_in, &hid_act);
    }

    const Tensor head_in = tape.concat_cols(std::array{yl, y0});
    fr.logits = apply_mlp(tape, params, fr, params.head, head_in, nullptr);
    return fr;
}

std::vector<double> flatten_grads(const std::vector<DenseMatrix>& grads,
                                  const ModelParams& params) {
    if (grads.size() != params.specs.size())
        fail_invalid("flatten_grads: expected " + std::to_string(params.specs.size()) +
                     " gradients, got " + std::to_string(grads.size()));
    std::vector<double> flat(params.flat.size(), 0.0);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        const ParamSpec& s = params.specs[i];
        if (grads[i].rows != s.rows || grads[i].cols != s.cols)
            fail_invalid("flatten_grads: missing or misshapen gradient for " + s.name);
        std::copy(grads[i].data.begin(), grads[i].data.end(), flat.begin() + static_cast<std::ptrdiff_t>(s.offset));
    }
    return flat;
}

std::vector<double> flatten_grads(const Tape& tape, const ForwardResult& fr,
                                  const ModelParams& params) {
    std::vector<DenseMatrix> grads;
    grads.reserve(fr.param_tensors.size());
    for (const Tensor& t : fr.param_tensors) grads.push_back(tape.grad(t));
    return flatten_grads(grads, params);
}

std::vector<DenseMatrix> unflatten_grads(std::span<const double> flat,
                                         const ModelParams& params) {
    if (flat.size() != params.flat.size())
        fail_invalid("unflatten_grads: buffer length mismatch");
    std::vector<DenseMatrix> grads;
    grads.reserve(params.specs.size());
    for (const ParamSpec& s : params.specs)
        grads.emplace_back(s.rows, s.cols,
                           std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(s.offset),
                                               flat.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size())));
    return grads;
}

std::size_t estimate_activation_elements(const IgnnArchitecture& arch, Index n_vertices,
                                         Index n_edges) {
    const auto n = static_cast<std::size_t>(n_vertices);
    const auto m = static_cast<std::size_t>(n_edges);
    const auto f = static_cast<std::size_t>(arch.hidden);
    const auto depth = static_cast<std::size_t>(arch.mlp_depth);
    const std::size_t encoders = (n + m) * f * (depth + 2);
    const std::size_t per_layer = m * f * (2 + 4 + 6 + 2 * depth + 2) + n * f * (2 + 2 + 4 + 2 * depth + 2);
    return encoders + per_layer * static_cast<std::size_t>(arch.layers) + m * (2 * f + depth + 1);
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    ordered_json arch{
        {"layers", params.arch.layers},
        {"hidden", params.arch.hidden},
        {"mlp_depth", params.arch.mlp_depth},
        {"node_in", params.arch.node_in},
        {"edge_in", params.arch.edge_in},
        {"hidden_activation", activation_to_string(params.arch.hidden_activation)},
        {"encoder_output_activation",
         activation_to_string(params.arch.encoder_output_activation)},
    };
    ordered_json manifest = ordered_json::array();
    for (const ParamSpec& s : params.specs)
        manifest.push_back(ordered_json{
            {"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
    ordered_json doc{
        {"format_version", kCheckpointVersion},
        {"arch", std::move(arch)},
        {"manifest", std::move(manifest)},
        {"flat", params.flat},
    };
    std::ofstream out(path);
    if (!out) fail_state("save_checkpoint: cannot open " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) fail_state("save_checkpoint: write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_state("load_checkpoint: cannot open " + path.string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail_state("load_checkpoint: parse error in " + path.string() + ": " + e.what());
    }
    if (doc.value("format_version", -1) != kCheckpointVersion)
        fail_state("load_checkpoint: unsupported format_version in " + path.string());
    const auto& arch_doc = doc.at("arch");
    IgnnArchitecture arch;
    arch.layers = arch_doc.at("layers").get<Index>();
    arch.hidden = arch_doc.at("hidden").get<Index>();
    arch.mlp_depth = arch_doc.at("mlp_depth").get<Index>();
    arch.node_in = arch_doc.at("node_in").get<Index>();
    arch.edge_in = arch_doc.at("edge_in").get<Index>();
    arch.hidden_activation =
        activation_from_string(arch_doc.at("hidden_activation").get<std::string>());
    arch.encoder_output_activation = activation_from_string(
        arch_doc.at("encoder_output_activation").get<std::string>());

    ModelParams params = build_layout(arch);
    const auto& manifest = doc.at("manifest");
    if (manifest.size() != params.specs.size())
        fail_state("load_checkpoint: manifest does not match architecture layout");
    for (std::size_t i = 0; i < params.specs.size(); ++i) {
        const auto& entry = manifest[i];
        const ParamSpec& s = params.specs[i];
        if (entry.at("name").get<std::string>() != s.name ||
            entry.at("rows").get<Index>() != s.rows ||
            entry.at("cols").get<Index>() != s.cols ||
            entry.at("offset").get<std::size_t>() != s.offset)
            fail_state("load_checkpoint: manifest entry " + std::to_string(i) +
                       " does not match registration order");
    }
    const auto flat = doc.at("flat").get<std::vector<double>>();
    if (flat.size() != params.flat.size())
        fail_state("load_checkpoint: parameter buffer length mismatch");
    params.flat = flat;
    return params;
}

}  // namespace hitgnn
