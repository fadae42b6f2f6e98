#include "hitgnn/data.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_set>

#include "hitgnn/rng.hpp"

namespace hitgnn {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kEventFormatVersion = 1;
constexpr int kManifestFormatVersion = 1;

constexpr double kInnerRadius = 1.0;
constexpr double kLayerGap = 1.0;
constexpr double kMaxCurvature = 0.10;   // transverse drift, radians per layer
constexpr double kMaxZSlope = 0.5;       // dz per unit radius
constexpr double kPhiNoise = 0.01;
constexpr double kZNoise = 0.02;
constexpr double kPhiWindow = 0.45;      // false-edge candidate window
constexpr double kZWindow = 1.1;
constexpr double kCandidatePercentile = 0.9;

struct Hit {
    double r = 0.0;
    double phi = 0.0;
    double z = 0.0;
    Index layer = 0;
    Index track = -1;  // -1 marks a noise hit
};

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

double hit_distance(const Hit& a, const Hit& b) {
    const double xa = a.r * std::cos(a.phi), ya = a.r * std::sin(a.phi);
    const double xb = b.r * std::cos(b.phi), yb = b.r * std::sin(b.phi);
    const double dz = a.z - b.z;
    return std::sqrt((xa - xb) * (xa - xb) + (ya - yb) * (ya - yb) + dz * dz);
}

void fill_node_features(DenseMatrix& out, Index row, const Hit& h, double r_scale,
                        Index n_layers, Rng& rng) {
    std::vector<double> channels{
        h.r * std::cos(h.phi) / r_scale,
        h.r * std::sin(h.phi) / r_scale,
        h.z / r_scale,
        h.r / r_scale,
        std::cos(h.phi),
        std::sin(h.phi),
        static_cast<double>(h.layer) / static_cast<double>(n_layers),
        h.z / std::max(h.r, 1e-9),
    };
    for (Index c = 0; c < out.cols; ++c)
        out.at(row, c) = c < static_cast<Index>(channels.size())
                             ? channels[static_cast<std::size_t>(c)]
                             : 0.1 * rng.normal();
}

void fill_edge_features(DenseMatrix& out, Index row, const Hit& src, const Hit& dst,
                        Rng& rng) {
    const double dphi = wrap_angle(dst.phi - src.phi);
    const double dz = dst.z - src.z;
    const double dr = dst.r - src.r;
    std::vector<double> channels{
        dphi,
        dz,
        dr,
        hit_distance(src, dst),
        dphi / std::max(dr, 1e-9),
        dz / std::max(dr, 1e-9),
    };
    for (Index c = 0; c < out.cols; ++c)
        out.at(row, c) = c < static_cast<Index>(channels.size())
                             ? channels[static_cast<std::size_t>(c)]
                             : 0.1 * rng.normal();
}

}  // namespace

void EventGraph::validate() const {
    if (n < 0) fail_invalid("EventGraph: negative vertex count");
    if (edges.n_rows != n || edges.n_cols != n)
        fail_invalid("EventGraph: adjacency shape does not match vertex count");
    if (!edges.is_canonical()) fail_invalid("EventGraph: edges not canonical");
    for (const auto& e : edges.entries)
        if (e.row == e.col) fail_invalid("EventGraph: self-loop at vertex " +
                                         std::to_string(e.row));
    if (node_features.rows != n)
        fail_invalid("EventGraph: node feature rows != vertex count");
    if (edge_features.rows != m())
        fail_invalid("EventGraph: edge feature rows != edge count");
    if (static_cast<Index>(labels.size()) != m())
        fail_invalid("EventGraph: label count != edge count");
    for (std::uint8_t label : labels)
        if (label > 1) fail_invalid("EventGraph: labels must be 0 or 1");
}

void GenConfig::validate() const {
    if (n_tracks < 1) fail_invalid("GenConfig: n_tracks must be >= 1");
    if (hits_min < 1 || hits_max < hits_min)
        fail_invalid("GenConfig: hits range must satisfy 1 <= min <= max");
    if (hits_max > detector_layers)
        fail_invalid("GenConfig: infeasible geometry, more hits per track (" +
                     std::to_string(hits_max) + ") than detector layers (" +
                     std::to_string(detector_layers) + ")");
    if (noise_hits < 0) fail_invalid("GenConfig: noise_hits must be >= 0");
    if (false_edge_factor < 0.0) fail_invalid("GenConfig: false_edge_factor must be >= 0");
    if (f_v < 3) fail_invalid("GenConfig: f_v must be >= 3 (spatial dims)");
    if (f_e < 1) fail_invalid("GenConfig: f_e must be >= 1");
}

EventGraph generate_event(const GenConfig& cfg, std::uint64_t event_id) {
    cfg.validate();
    Rng rng(Rng::derive(cfg.seed, {0x6576656e74ULL, event_id}));

    const double r_outer =
        kInnerRadius + kLayerGap * static_cast<double>(cfg.detector_layers - 1);

    // Lay down track hits, then noise hits.
    std::vector<Hit> hits;
    std::vector<std::pair<Index, Index>> true_pairs;  // generation-order ids
    for (Index t = 0; t < cfg.n_tracks; ++t) {
        const Index len = cfg.hits_min + static_cast<Index>(rng.bounded(
                              static_cast<std::uint64_t>(cfg.hits_max - cfg.hits_min + 1)));
        const Index start_layer = static_cast<Index>(
            rng.bounded(static_cast<std::uint64_t>(cfg.detector_layers - len + 1)));
        const double phi0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double curvature = rng.uniform(-kMaxCurvature, kMaxCurvature);
        const double z_slope = rng.uniform(-kMaxZSlope, kMaxZSlope);
        const double z_vertex = rng.uniform(-0.5, 0.5);
        for (Index j = 0; j < len; ++j) {
            const Index layer = start_layer + j;
            const double r = kInnerRadius + kLayerGap * static_cast<double>(layer);
            Hit h;
            h.r = r;
            h.phi = wrap_angle(phi0 + curvature * static_cast<double>(j) +
                               kPhiNoise * rng.normal());
            h.z = z_vertex + z_slope * r + kZNoise * rng.normal();
            h.layer = layer;
            h.track = t;
            hits.push_back(h);
            if (j > 0)
                true_pairs.emplace_back(static_cast<Index>(hits.size()) - 2,
                                        static_cast<Index>(hits.size()) - 1);
        }
    }
    for (Index i = 0; i < cfg.noise_hits; ++i) {
        Hit h;
        h.layer = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(cfg.detector_layers)));
        h.r = kInnerRadius + kLayerGap * static_cast<double>(h.layer);
        h.phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
        h.z = rng.uniform(-(kMaxZSlope * r_outer + 0.5), kMaxZSlope * r_outer + 0.5);
        hits.push_back(h);
    }

    const Index n = static_cast<Index>(hits.size());

    // Relabel vertices with a random permutation so ids carry no track info.
    std::vector<Index> new_id(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) new_id[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(new_id[static_cast<std::size_t>(i)], new_id[static_cast<std::size_t>(j)]);
    }

    // False-edge candidates: spatially near cross-track pairs on adjacent
    // layers, found with a phi-sorted sweep per layer.
    std::vector<std::vector<Index>> by_layer(static_cast<std::size_t>(cfg.detector_layers));
    for (Index i = 0; i < n; ++i)
        by_layer[static_cast<std::size_t>(hits[static_cast<std::size_t>(i)].layer)].push_back(i);
    for (auto& layer_hits : by_layer)
        std::sort(layer_hits.begin(), layer_hits.end(), [&](Index a, Index b) {
            return hits[static_cast<std::size_t>(a)].phi < hits[static_cast<std::size_t>(b)].phi;
        });

    struct Candidate {
        Index src, dst;
        double dist;
    };
    std::vector<Candidate> candidates;
    for (Index layer = 0; layer + 1 < cfg.detector_layers; ++layer) {
        const auto& inner = by_layer[static_cast<std::size_t>(layer)];
        const auto& outer = by_layer[static_cast<std::size_t>(layer + 1)];
        for (Index u : inner) {
            const Hit& hu = hits[static_cast<std::size_t>(u)];
            for (Index v : outer) {
                const Hit& hv = hits[static_cast<std::size_t>(v)];
                if (hu.track >= 0 && hu.track == hv.track) continue;
                if (std::abs(wrap_angle(hv.phi - hu.phi)) > kPhiWindow) continue;
                if (std::abs(hv.z - hu.z) > kZWindow) continue;
                candidates.push_back({u, v, hit_distance(hu, hv)});
            }
        }
    }

    const auto n_true = static_cast<Index>(true_pairs.size());
    const auto n_false_target = static_cast<Index>(
        std::llround(cfg.false_edge_factor * static_cast<double>(n_true)));
    std::vector<Candidate> eligible = candidates;
    if (!eligible.empty()) {
        std::vector<double> dists;
        dists.reserve(eligible.size());
        for (const auto& c : eligible) dists.push_back(c.dist);
        std::sort(dists.begin(), dists.end());
        const auto cut = static_cast<std::size_t>(
            kCandidatePercentile * static_cast<double>(dists.size() - 1));
        const double threshold = dists[cut];
        std::erase_if(eligible, [&](const Candidate& c) { return c.dist > threshold; });
    }
    for (std::size_t i = eligible.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(eligible[i - 1], eligible[j]);
    }
    if (static_cast<Index>(eligible.size()) > n_false_target)
        eligible.resize(static_cast<std::size_t>(n_false_target));

    // Assemble edges in relabeled ids, sorted canonically; labels and features
    // follow that order.
    struct EdgeRec {
        Index src, dst;
        Index gen_src, gen_dst;
        std::uint8_t label;
    };
    std::vector<EdgeRec> edge_recs;
    edge_recs.reserve(true_pairs.size() + eligible.size());
    for (const auto& [u, v] : true_pairs)
        edge_recs.push_back({new_id[static_cast<std::size_t>(u)],
                             new_id[static_cast<std::size_t>(v)], u, v, 1});
    for (const auto& c : eligible)
        edge_recs.push_back({new_id[static_cast<std::size_t>(c.src)],
                             new_id[static_cast<std::size_t>(c.dst)], c.src, c.dst, 0});
    std::sort(edge_recs.begin(), edge_recs.end(), [](const EdgeRec& a, const EdgeRec& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });

    EventGraph event;
    event.event_id = event_id;
    event.n = n;
    event.edges.n_rows = event.edges.n_cols = n;
    event.node_features = DenseMatrix(n, cfg.f_v);
    event.edge_features = DenseMatrix(static_cast<Index>(edge_recs.size()), cfg.f_e);
    for (Index i = 0; i < n; ++i)
        fill_node_features(event.node_features, new_id[static_cast<std::size_t>(i)],
                           hits[static_cast<std::size_t>(i)], r_outer,
                           cfg.detector_layers, rng);
    for (std::size_t i = 0; i < edge_recs.size(); ++i) {
        const EdgeRec& rec = edge_recs[i];
        event.edges.entries.push_back({rec.src, rec.dst, 1.0});
        event.labels.push_back(rec.label);
        fill_edge_features(event.edge_features, static_cast<Index>(i),
                           hits[static_cast<std::size_t>(rec.gen_src)],
                           hits[static_cast<std::size_t>(rec.gen_dst)], rng);
    }
    event.validate();
    return event;
}

void write_event(const std::filesystem::path& path, const EventGraph& event) {
    event.validate();
    ordered_json doc;
    doc["format_version"] = kEventFormatVersion;
    doc["event_id"] = event.event_id;
    doc["num_vertices"] = event.n;
    doc["num_edges"] = event.m();
    ordered_json src = ordered_json::array(), dst = ordered_json::array();
    for (const auto& e : event.edges.entries) {
        src.push_back(e.row);
        dst.push_back(e.col);
    }
    doc["edge_src"] = std::move(src);
    doc["edge_dst"] = std::move(dst);
    ordered_json nf = ordered_json::array();
    for (Index i = 0; i < event.node_features.rows; ++i)
        nf.push_back(std::vector<double>(event.node_features.row_ptr(i),
                                         event.node_features.row_ptr(i) +
                                             event.node_features.cols));
    doc["node_features"] = std::move(nf);
    ordered_json ef = ordered_json::array();
    for (Index i = 0; i < event.edge_features.rows; ++i)
        ef.push_back(std::vector<double>(event.edge_features.row_ptr(i),
                                         event.edge_features.row_ptr(i) +
                                             event.edge_features.cols));
    doc["edge_features"] = std::move(ef);
    doc["labels"] = event.labels;

    std::ofstream out(path);
    if (!out) fail_state("write_event: cannot open " + path.string());
    out << doc.dump() << "\n";
    if (!out) fail_state("write_event: write failed for " + path.string());
}

EventGraph read_event(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_state("read_event: cannot open " + path.string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail_state("read_event: parse error in " + path.string() + ": " + e.what());
    }
    if (doc.value("format_version", -1) != kEventFormatVersion)
        fail_state("read_event: unsupported format_version in " + path.string());

    EventGraph event;
    try {
        event.event_id = doc.at("event_id").get<std::uint64_t>();
        event.n = doc.at("num_vertices").get<Index>();
        const auto m = doc.at("num_edges").get<Index>();
        const auto& src = doc.at("edge_src");
        const auto& dst = doc.at("edge_dst");
        if (static_cast<Index>(src.size()) != m || static_cast<Index>(dst.size()) != m)
            fail_state("read_event: " + path.string() + ": num_edges=" + std::to_string(m) +
                       " but edge_src/edge_dst have " + std::to_string(src.size()) + "/" +
                       std::to_string(dst.size()) + " entries");
        event.edges.n_rows = event.edges.n_cols = event.n;
        for (Index i = 0; i < m; ++i)
            event.edges.entries.push_back({src[static_cast<std::size_t>(i)].get<Index>(),
                                           dst[static_cast<std::size_t>(i)].get<Index>(), 1.0});
        const auto& nf = doc.at("node_features");
        if (static_cast<Index>(nf.size()) != event.n)
            fail_state("read_event: " + path.string() + ": node_features has " +
                       std::to_string(nf.size()) + " rows, expected " +
                       std::to_string(event.n));
        const Index f_v = event.n > 0 ? static_cast<Index>(nf[0].size()) : 0;
        event.node_features = DenseMatrix(event.n, f_v);
        for (Index i = 0; i < event.n; ++i) {
            const auto row = nf[static_cast<std::size_t>(i)].get<std::vector<double>>();
            if (static_cast<Index>(row.size()) != f_v)
                fail_state("read_event: " + path.string() + ": ragged node_features at row " +
                           std::to_string(i));
            std::copy(row.begin(), row.end(), event.node_features.row_ptr(i));
        }
        const auto& ef = doc.at("edge_features");
        if (static_cast<Index>(ef.size()) != m)
            fail_state("read_event: " + path.string() + ": edge_features has " +
                       std::to_string(ef.size()) + " rows, expected " + std::to_string(m));
        const Index f_e = m > 0 ? static_cast<Index>(ef[0].size()) : 0;
        event.edge_features = DenseMatrix(m, f_e);
        for (Index i = 0; i < m; ++i) {
            const auto row = ef[static_cast<std::size_t>(i)].get<std::vector<double>>();
            if (static_cast<Index>(row.size()) != f_e)
                fail_state("read_event: " + path.string() + ": ragged edge_features at row " +
                           std::to_string(i));
            std::copy(row.begin(), row.end(), event.edge_features.row_ptr(i));
        }
        event.labels = doc.at("labels").get<std::vector<std::uint8_t>>();
    } catch (const ordered_json::exception& e) {
        fail_state("read_event: " + path.string() + ": " + e.what());
    }
    try {
        event.validate();
    } catch (const std::exception& e) {
        fail_state("read_event: " + path.string() + ": invariant violation: " + e.what());
    }
    return event;
}

SplitIndices split_dataset(Index n_events, std::uint64_t seed) {
    if (n_events < 3) fail_invalid("split_dataset: need at least 3 events");
    std::vector<Index> order(static_cast<std::size_t>(n_events));
    for (Index i = 0; i < n_events; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(Rng::derive(seed, {0x73706c6974ULL}));
    for (Index i = n_events - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    const Index n_val = std::max<Index>(1, n_events / 10);
    const Index n_test = std::max<Index>(1, n_events / 10);
    const Index n_train = n_events - n_val - n_test;
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    return split;
}

namespace {

ordered_json gen_config_to_json(const GenConfig& cfg) {
    return ordered_json{
        {"n_tracks", cfg.n_tracks},       {"hits_min", cfg.hits_min},
        {"hits_max", cfg.hits_max},       {"detector_layers", cfg.detector_layers},
        {"noise_hits", cfg.noise_hits},   {"false_edge_factor", cfg.false_edge_factor},
        {"f_v", cfg.f_v},                 {"f_e", cfg.f_e},
        {"seed", cfg.seed},
    };
}

GenConfig gen_config_from_json(const ordered_json& doc) {
    GenConfig cfg;
    cfg.n_tracks = doc.at("n_tracks").get<Index>();
    cfg.hits_min = doc.at("hits_min").get<Index>();
    cfg.hits_max = doc.at("hits_max").get<Index>();
    cfg.detector_layers = doc.at("detector_layers").get<Index>();
    cfg.noise_hits = doc.at("noise_hits").get<Index>();
    cfg.false_edge_factor = doc.at("false_edge_factor").get<double>();
    cfg.f_v = doc.at("f_v").get<Index>();
    cfg.f_e = doc.at("f_e").get<Index>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest) {
    ordered_json events = ordered_json::array();
    for (std::size_t i = 0; i < manifest.event_files.size(); ++i) {
        std::string split = "train";
        const auto idx = static_cast<Index>(i);
        if (std::find(manifest.split.val.begin(), manifest.split.val.end(), idx) !=
            manifest.split.val.end())
            split = "val";
        else if (std::find(manifest.split.test.begin(), manifest.split.test.end(), idx) !=
                 manifest.split.test.end())
            split = "test";
        events.push_back(ordered_json{{"file", manifest.event_files[i]}, {"split", split}});
    }
    ordered_json doc{
        {"format_version", kManifestFormatVersion},
        {"seed", manifest.seed},
        {"generator", gen_config_to_json(manifest.config)},
        {"events", std::move(events)},
    };
    std::ofstream out(dir / "manifest.json");
    if (!out) fail_state("write_manifest: cannot open " + (dir / "manifest.json").string());
    out << doc.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) fail_state("read_manifest: cannot open " + (dir / "manifest.json").string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail_state("read_manifest: parse error: " + std::string(e.what()));
    }
    if (doc.value("format_version", -1) != kManifestFormatVersion)
        fail_state("read_manifest: unsupported format_version");
    DatasetManifest manifest;
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    manifest.config = gen_config_from_json(doc.at("generator"));
    Index idx = 0;
    for (const auto& entry : doc.at("events")) {
        manifest.event_files.push_back(entry.at("file").get<std::string>());
        const auto split = entry.at("split").get<std::string>();
        if (split == "train")
            manifest.split.train.push_back(idx);
        else if (split == "val")
            manifest.split.val.push_back(idx);
        else if (split == "test")
            manifest.split.test.push_back(idx);
        else
            fail_state("read_manifest: unknown split '" + split + "'");
        ++idx;
    }
    return manifest;
}

std::vector<EventGraph> load_split(const std::filesystem::path& dir,
                                   const DatasetManifest& manifest,
                                   std::span<const Index> event_indices) {
    std::vector<EventGraph> events;
    events.reserve(event_indices.size());
    for (Index idx : event_indices) {
        if (idx < 0 || idx >= static_cast<Index>(manifest.event_files.size()))
            fail_invalid("load_split: event index out of range");
        events.push_back(read_event(dir / manifest.event_files[static_cast<std::size_t>(idx)]));
    }
    return events;
}

}  // namespace hitgnn
