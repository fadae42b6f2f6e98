#include "hitgnn/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "hitgnn/svg.hpp"
#include "hitgnn/tracks.hpp"

namespace hitgnn::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

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

std::string fmt_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail_state("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_run_manifest(const std::filesystem::path& dir, const std::string& command,
                        std::uint64_t seed, ordered_json options) {
    ordered_json doc{
        {"format_version", 1},
        {"tool", kToolVersion},
        {"command", command},
        {"seed", seed},
        {"options", std::move(options)},
    };
    std::ofstream out(dir / "run_manifest.json");
    if (!out) fail_state("cannot write run manifest in " + dir.string());
    out << doc.dump(2) << "\n";
}

ordered_json train_config_json(const TrainConfig& cfg) {
    return ordered_json{
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"hidden", cfg.hidden},
        {"layers", cfg.layers},
        {"depth", cfg.depth},
        {"fanout", cfg.fanout},
        {"bulk_batches", cfg.bulk_batches},
        {"workers", cfg.workers},
        {"mlp_depth", cfg.mlp_depth},
        {"learning_rate", cfg.learning_rate},
        {"pos_weight", cfg.pos_weight},
        {"seed", cfg.seed},
        {"mode", train_mode_to_string(cfg.mode)},
        {"coalesce", cfg.coalesce},
        {"symmetrize", cfg.symmetrize},
        {"roots_only_loss", cfg.roots_only_loss},
        {"threshold", cfg.threshold},
        {"max_batches_per_event", cfg.max_batches_per_event},
        {"fullgraph_budget_elements", cfg.fullgraph_budget_elements},
        {"hidden_activation", activation_to_string(cfg.hidden_activation)},
        {"encoder_output_activation",
         activation_to_string(cfg.encoder_output_activation)},
    };
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

GenConfig preset_config(const std::string& name) {
    GenConfig cfg;
    if (name == "ex3-mini") {
        cfg.n_tracks = 110;
        cfg.hits_min = 7;
        cfg.hits_max = 10;
        cfg.detector_layers = 12;
        cfg.noise_hits = 65;
        cfg.false_edge_factor = 1.0;
        cfg.f_v = 6;
        cfg.f_e = 2;
    } else if (name == "ex3") {
        cfg.n_tracks = 1500;
        cfg.hits_min = 7;
        cfg.hits_max = 10;
        cfg.detector_layers = 12;
        cfg.noise_hits = 250;
        cfg.false_edge_factor = 3.25;
        cfg.f_v = 6;
        cfg.f_e = 2;
    } else if (name == "ctd-mini") {
        cfg.n_tracks = 110;
        cfg.hits_min = 7;
        cfg.hits_max = 10;
        cfg.detector_layers = 12;
        cfg.noise_hits = 65;
        cfg.false_edge_factor = 1.0;
        cfg.f_v = 14;
        cfg.f_e = 8;
    } else if (name == "bench") {
        cfg.n_tracks = 5500;
        cfg.hits_min = 8;
        cfg.hits_max = 12;
        cfg.detector_layers = 14;
        cfg.noise_hits = 1000;
        cfg.false_edge_factor = 1.2;
        cfg.f_v = 6;
        cfg.f_e = 2;
    } else {
        fail_invalid("unknown preset '" + name + "' (ex3-mini, ex3, ctd-mini, bench)");
    }
    return cfg;
}

int cmd_generate(const GenerateOptions& opt) {
    if (opt.n_events < 3) fail_invalid("generate: need at least 3 events");
    GenConfig cfg = preset_config(opt.preset);
    if (opt.n_tracks >= 0) cfg.n_tracks = opt.n_tracks;
    if (opt.hits_min >= 0) cfg.hits_min = opt.hits_min;
    if (opt.hits_max >= 0) cfg.hits_max = opt.hits_max;
    if (opt.detector_layers >= 0) cfg.detector_layers = opt.detector_layers;
    if (opt.noise_hits >= 0) cfg.noise_hits = opt.noise_hits;
    if (opt.false_edge_factor >= 0.0) cfg.false_edge_factor = opt.false_edge_factor;
    if (opt.f_v >= 0) cfg.f_v = opt.f_v;
    if (opt.f_e >= 0) cfg.f_e = opt.f_e;
    cfg.seed = opt.seed;
    cfg.validate();

    ensure_dir(opt.out_dir);
    DatasetManifest manifest;
    manifest.seed = opt.seed;
    manifest.config = cfg;
    for (Index i = 0; i < opt.n_events; ++i) {
        const EventGraph event = generate_event(cfg, static_cast<std::uint64_t>(i));
        char name[32];
        std::snprintf(name, sizeof(name), "event_%05lld.json", static_cast<long long>(i));
        write_event(opt.out_dir / name, event);
        manifest.event_files.emplace_back(name);
    }
    manifest.split = split_dataset(opt.n_events, opt.seed);
    write_manifest(opt.out_dir, manifest);

    write_run_manifest(opt.out_dir, "generate", opt.seed,
                       ordered_json{{"preset", opt.preset},
                                    {"n_events", opt.n_events},
                                    {"n_tracks", cfg.n_tracks},
                                    {"hits_min", cfg.hits_min},
                                    {"hits_max", cfg.hits_max},
                                    {"detector_layers", cfg.detector_layers},
                                    {"noise_hits", cfg.noise_hits},
                                    {"false_edge_factor", cfg.false_edge_factor},
                                    {"f_v", cfg.f_v},
                                    {"f_e", cfg.f_e},
                                    {"out_dir", opt.out_dir.string()}});
    std::cout << "generated " << opt.n_events << " events in " << opt.out_dir.string()
              << " (train/val/test = " << manifest.split.train.size() << "/"
              << manifest.split.val.size() << "/" << manifest.split.test.size() << ")\n";
    return 0;
}

int cmd_train(const TrainOptions& opt) {
    opt.config.validate();
    ensure_dir(opt.out_dir);
    const DatasetManifest manifest = read_manifest(opt.dataset_dir);
    auto train_events = load_split(opt.dataset_dir, manifest, manifest.split.train);
    auto val_events = load_split(opt.dataset_dir, manifest, manifest.split.val);

    Trainer trainer(opt.config, std::move(train_events), std::move(val_events));
    const auto metrics = trainer.train();
    write_metrics_csv(opt.out_dir / "metrics.csv", metrics, opt.zero_timings);
    save_checkpoint(opt.out_dir / "checkpoint.json", trainer.params());

    ordered_json options = train_config_json(opt.config);
    options["dataset_dir"] = opt.dataset_dir.string();
    options["out_dir"] = opt.out_dir.string();
    options["zero_timings"] = opt.zero_timings;
    write_run_manifest(opt.out_dir, "train", opt.config.seed, std::move(options));

    if (opt.plot) {
        try {
            SvgSeries loss{"train loss", {}};
            SvgSeries prec{"val precision", {}};
            SvgSeries rec{"val recall", {}};
            std::vector<std::string> epochs;
            SvgSeries t_sample{"sampling", {}};
            SvgSeries t_train{"training", {}};
            for (const auto& m : metrics) {
                loss.values.push_back(m.loss);
                prec.values.push_back(m.val_precision.value_or(0.0));
                rec.values.push_back(m.val_recall.value_or(0.0));
                epochs.push_back(std::to_string(m.epoch));
                t_sample.values.push_back(m.timings.sample_s);
                t_train.values.push_back(m.timings.forward_s + m.timings.backward_s +
                                         m.timings.allreduce_s + m.timings.optimizer_s);
            }
            write_line_chart_svg(opt.out_dir / "convergence.svg",
                                 "Validation precision/recall and train loss", "epoch",
                                 {prec, rec, loss});
            write_bar_chart_svg(opt.out_dir / "epoch_time.svg",
                                "Epoch time breakdown (s)", epochs, {t_sample, t_train});
        } catch (const std::exception& e) {
            std::cerr << "warning: plot emission failed: " << e.what() << "\n";
        }
    }

    if (!metrics.empty()) {
        const auto& last = metrics.back();
        std::cout << "trained " << metrics.size() << " epochs; final loss "
                  << fmt_double("%.6f", last.loss);
        if (last.val_precision)
            std::cout << ", val precision " << fmt_double("%.4f", *last.val_precision);
        if (last.val_recall)
            std::cout << ", val recall " << fmt_double("%.4f", *last.val_recall);
        std::cout << "\n";
    }
    return 0;
}

int cmd_evaluate(const EvaluateOptions& opt) {
    ensure_dir(opt.out_dir);
    const ModelParams params = load_checkpoint(opt.checkpoint);
    const DatasetManifest manifest = read_manifest(opt.dataset_dir);
    const std::vector<Index>* indices = nullptr;
    if (opt.split == "train")
        indices = &manifest.split.train;
    else if (opt.split == "val")
        indices = &manifest.split.val;
    else if (opt.split == "test")
        indices = &manifest.split.test;
    else
        fail_invalid("evaluate: unknown split '" + opt.split + "'");
    const auto events = load_split(opt.dataset_dir, manifest, *indices);
    if (events.empty()) fail_invalid("evaluate: split '" + opt.split + "' is empty");
    for (const EventGraph& event : events)
        if (event.node_features.cols != params.arch.node_in ||
            event.edge_features.cols != params.arch.edge_in)
            fail_invalid("evaluate: checkpoint expects feature widths " +
                         std::to_string(params.arch.node_in) + "/" +
                         std::to_string(params.arch.edge_in) + " but dataset has " +
                         std::to_string(event.node_features.cols) + "/" +
                         std::to_string(event.edge_features.cols));

    std::ofstream report(opt.out_dir / "evaluation.csv");
    if (!report) fail_state("evaluate: cannot write evaluation.csv");
    report << "event,threshold,precision,recall,tp,fp,fn,edges,tracks\n";

    std::vector<std::uint8_t> all_masks, all_labels;
    std::vector<std::vector<double>> per_event_logits;
    for (const EventGraph& event : events) {
        auto logits =
            predict_logits(params, event.edges, event.node_features, event.edge_features);
        const auto mask = classify_edges(logits, opt.threshold);
        const auto em = precision_recall(mask, event.labels, opt.threshold);
        const auto tracks = connected_components(event.edges, mask, opt.min_track_len);
        report << event.event_id << ',' << fmt_double("%.4f", opt.threshold) << ','
               << (em.precision ? fmt_double("%.12g", *em.precision) : "") << ','
               << (em.recall ? fmt_double("%.12g", *em.recall) : "") << ','
               << em.true_positives << ',' << em.false_positives << ','
               << em.false_negatives << ',' << event.m() << ',' << tracks.tracks.size()
               << "\n";
        all_masks.insert(all_masks.end(), mask.begin(), mask.end());
        all_labels.insert(all_labels.end(), event.labels.begin(), event.labels.end());
        per_event_logits.push_back(std::move(logits));
    }
    const auto aggregate = precision_recall(all_masks, all_labels, opt.threshold);
    report << "aggregate," << fmt_double("%.4f", opt.threshold) << ','
           << (aggregate.precision ? fmt_double("%.12g", *aggregate.precision) : "") << ','
           << (aggregate.recall ? fmt_double("%.12g", *aggregate.recall) : "") << ','
           << aggregate.true_positives << ',' << aggregate.false_positives << ','
           << aggregate.false_negatives << ',' << all_labels.size() << ",\n";

    std::ofstream curve(opt.out_dir / "pr_curve.csv");
    if (!curve) fail_state("evaluate: cannot write pr_curve.csv");
    curve << "threshold,precision,recall,tp,fp,fn\n";
    for (int t = 1; t < 50; ++t) {
        const double threshold = static_cast<double>(t) / 50.0;
        std::vector<std::uint8_t> masks;
        std::size_t event_idx = 0;
        for (const EventGraph& event : events) {
            const auto mask = classify_edges(per_event_logits[event_idx++], threshold);
            masks.insert(masks.end(), mask.begin(), mask.end());
            (void)event;
        }
        const auto em = precision_recall(masks, all_labels, threshold);
        curve << fmt_double("%.4f", threshold) << ','
              << (em.precision ? fmt_double("%.12g", *em.precision) : "") << ','
              << (em.recall ? fmt_double("%.12g", *em.recall) : "") << ','
              << em.true_positives << ',' << em.false_positives << ',' << em.false_negatives
              << "\n";
    }

    if (opt.write_tracks) {
        std::ofstream tracks_out(opt.out_dir / "tracks.csv");
        if (!tracks_out) fail_state("evaluate: cannot write tracks.csv");
        tracks_out << "event,track,vertices\n";
        std::size_t event_idx = 0;
        for (const EventGraph& event : events) {
            const auto mask = classify_edges(per_event_logits[event_idx++], opt.threshold);
            const auto tracks = connected_components(event.edges, mask, opt.min_track_len);
            for (std::size_t t = 0; t < tracks.tracks.size(); ++t) {
                tracks_out << event.event_id << ',' << t << ',';
                for (std::size_t v = 0; v < tracks.tracks[t].size(); ++v)
                    tracks_out << (v ? " " : "") << tracks.tracks[t][v];
                tracks_out << "\n";
            }
        }
    }

    write_run_manifest(opt.out_dir, "evaluate", 0,
                       ordered_json{{"checkpoint", opt.checkpoint.string()},
                                    {"dataset_dir", opt.dataset_dir.string()},
                                    {"split", opt.split},
                                    {"threshold", opt.threshold},
                                    {"min_track_len", opt.min_track_len},
                                    {"out_dir", opt.out_dir.string()}});
    std::cout << "evaluated " << events.size() << " events; precision "
              << (aggregate.precision ? fmt_double("%.4f", *aggregate.precision) : "n/a")
              << ", recall "
              << (aggregate.recall ? fmt_double("%.4f", *aggregate.recall) : "n/a") << "\n";
    return 0;
}

int cmd_bench_sampling(const BenchSamplingOptions& opt) {
    if (opt.repeats < 1) fail_invalid("bench-sampling: repeats must be >= 1");
    ensure_dir(opt.out_dir);
    const DatasetManifest manifest = read_manifest(opt.dataset_dir);

    // Pick the requested event, or the one with the most edges.
    Index pick = opt.event_index;
    if (pick < 0) {
        Index best_edges = -1;
        for (std::size_t i = 0; i < manifest.event_files.size(); ++i) {
            const auto event = read_event(opt.dataset_dir / manifest.event_files[i]);
            if (event.m() > best_edges) {
                best_edges = event.m();
                pick = static_cast<Index>(i);
            }
        }
    }
    if (pick < 0 || pick >= static_cast<Index>(manifest.event_files.size()))
        fail_invalid("bench-sampling: event index out of range");
    const EventGraph event =
        read_event(opt.dataset_dir / manifest.event_files[static_cast<std::size_t>(pick)]);
    const CsrMatrix adj = make_edge_id_matrix(event);

    std::ofstream csv(opt.out_dir / "bench_sampling.csv");
    if (!csv) fail_state("bench-sampling: cannot write bench_sampling.csv");
    csv << "k,roots_per_batch,depth,fanout,event_vertices,event_edges,repeats,"
           "t_bulk_median_s,t_sequential_median_s,speedup\n";

    std::vector<std::string> k_labels;
    SvgSeries bulk_series{"bulk", {}};
    SvgSeries seq_series{"sequential", {}};
    for (Index k : opt.k_values) {
        if (k < 1) fail_invalid("bench-sampling: k must be >= 1");
        Index b = opt.batch_size;
        if (k * b > event.n) b = std::max<Index>(1, event.n / k);

        SamplerConfig scfg;
        scfg.depth = opt.depth;
        scfg.fanout = opt.fanout;
        scfg.batch_size = b;
        scfg.bulk_batches = k;
        scfg.symmetrize = opt.symmetrize;

        std::vector<double> t_bulk, t_seq;
        for (Index rep = 0; rep < opt.repeats; ++rep) {
            // Identical root sets per (seed, k, repeat) for both samplers.
            Rng rng(Rng::derive(opt.seed, {0x62656e6368ULL, static_cast<std::uint64_t>(k),
                                           static_cast<std::uint64_t>(rep)}));
            auto all_batches = epoch_root_batches(event.n, b, rng);
            if (static_cast<Index>(all_batches.size()) < k)
                fail_invalid("bench-sampling: event too small for k=" + std::to_string(k) +
                             " batches of " + std::to_string(b));
            all_batches.resize(static_cast<std::size_t>(k));

            std::vector<std::uint64_t> stream_seeds;
            for (Index bi = 0; bi < k; ++bi)
                for (std::size_t pos = 0; pos < all_batches[static_cast<std::size_t>(bi)].size(); ++pos)
                    stream_seeds.push_back(
                        Rng::derive(opt.seed, {0x7374726dULL, static_cast<std::uint64_t>(k),
                                               static_cast<std::uint64_t>(rep),
                                               static_cast<std::uint64_t>(bi),
                                               static_cast<std::uint64_t>(pos)}));

            {
                PerRootChoiceSource choice(stream_seeds);
                StopWatch watch;
                const auto batches = bulk_shadow(adj, all_batches, scfg, choice);
                t_bulk.push_back(watch.lap());
                if (static_cast<Index>(batches.size()) != k)
                    fail_state("bench-sampling: bulk sampler returned wrong batch count");
            }
            {
                StopWatch watch;
                std::size_t seed_base = 0;
                for (Index bi = 0; bi < k; ++bi) {
                    const auto& roots = all_batches[static_cast<std::size_t>(bi)];
                    PerRootChoiceSource choice(std::vector<std::uint64_t>(
                        stream_seeds.begin() + static_cast<std::ptrdiff_t>(seed_base),
                        stream_seeds.begin() + static_cast<std::ptrdiff_t>(seed_base + roots.size())));
                    seed_base += roots.size();
                    (void)shadow_reference(adj, roots, scfg, choice);
                }
                t_seq.push_back(watch.lap());
            }
        }
        const double bulk_med = median(t_bulk);
        const double seq_med = median(t_seq);
        csv << k << ',' << b << ',' << opt.depth << ',' << opt.fanout << ',' << event.n
            << ',' << event.m() << ',' << opt.repeats << ','
            << fmt_double("%.6f", bulk_med) << ',' << fmt_double("%.6f", seq_med) << ','
            << fmt_double("%.4f", seq_med / bulk_med) << "\n";
        k_labels.push_back("k=" + std::to_string(k));
        bulk_series.values.push_back(bulk_med);
        seq_series.values.push_back(seq_med);
        std::cout << "k=" << k << ": bulk " << fmt_double("%.4f", bulk_med)
                  << " s, sequential " << fmt_double("%.4f", seq_med) << " s, speedup "
                  << fmt_double("%.2f", seq_med / bulk_med) << "x\n";
    }

    if (opt.plot) {
        try {
            write_bar_chart_svg(opt.out_dir / "bench_sampling.svg",
                                "Bulk vs sequential sampling time (s)", k_labels,
                                {bulk_series, seq_series});
        } catch (const std::exception& e) {
            std::cerr << "warning: plot emission failed: " << e.what() << "\n";
        }
    }

    write_run_manifest(opt.out_dir, "bench-sampling", opt.seed,
                       ordered_json{{"dataset_dir", opt.dataset_dir.string()},
                                    {"event_index", pick},
                                    {"k_values", opt.k_values},
                                    {"repeats", opt.repeats},
                                    {"batch_size", opt.batch_size},
                                    {"depth", opt.depth},
                                    {"fanout", opt.fanout},
                                    {"symmetrize", opt.symmetrize},
                                    {"out_dir", opt.out_dir.string()}});
    return 0;
}

int cmd_bench_allreduce(const BenchAllreduceOptions& opt) {
    if (opt.workers < 1) fail_invalid("bench-allreduce: workers must be >= 1");
    if (opt.steps < 1) fail_invalid("bench-allreduce: steps must be >= 1");
    ensure_dir(opt.out_dir);

    std::vector<Index> sizes = opt.sizes;
    if (sizes.empty()) {
        if (opt.tensors < 1 || opt.elements < 1)
            fail_invalid("bench-allreduce: tensors and elements must be >= 1");
        sizes.assign(static_cast<std::size_t>(opt.tensors), opt.elements);
    }
    std::size_t total = 0;
    for (Index s : sizes) {
        if (s < 1) fail_invalid("bench-allreduce: tensor sizes must be >= 1");
        total += static_cast<std::size_t>(s);
    }

    const int w = static_cast<int>(opt.workers);
    std::vector<std::vector<double>> buffers(static_cast<std::size_t>(w));
    Rng rng(Rng::derive(opt.seed, {0x616c6c72ULL}));
    for (auto& buf : buffers) {
        buf.resize(total);
        for (double& v : buf) v = rng.uniform(-1.0, 1.0);
    }

    const auto run_mode = [&](bool coalesced) {
        InMemoryComm comm(w);
        std::vector<std::vector<double>> work = buffers;
        double wall = 0.0;
        run_workers(w, [&](int rank) {
            const CommHandle handle{&comm, rank};
            StopWatch watch;
            for (Index step = 0; step < opt.steps; ++step) {
                std::span<double> buf(work[static_cast<std::size_t>(rank)]);
                if (coalesced) {
                    handle.allreduce_mean(buf);
                } else {
                    std::size_t offset = 0;
                    for (Index s : sizes) {
                        handle.allreduce_mean(buf.subspan(offset, static_cast<std::size_t>(s)));
                        offset += static_cast<std::size_t>(s);
                    }
                }
            }
            if (rank == 0) wall = watch.lap();
        });
        return std::pair<double, std::uint64_t>{wall, comm.collective_calls()};
    };

    const auto [t_coalesced, calls_coalesced] = run_mode(true);
    const auto [t_per_tensor, calls_per_tensor] = run_mode(false);

    std::ofstream csv(opt.out_dir / "bench_allreduce.csv");
    if (!csv) fail_state("bench-allreduce: cannot write bench_allreduce.csv");
    csv << "tensors,total_elements,workers,steps,t_coalesced_s,t_per_tensor_s,"
           "calls_coalesced_per_step,calls_per_tensor_per_step\n";
    csv << sizes.size() << ',' << total << ',' << w << ',' << opt.steps << ','
        << fmt_double("%.6f", t_coalesced) << ',' << fmt_double("%.6f", t_per_tensor) << ','
        << calls_coalesced / static_cast<std::uint64_t>(opt.steps) << ','
        << calls_per_tensor / static_cast<std::uint64_t>(opt.steps) << "\n";

    write_run_manifest(opt.out_dir, "bench-allreduce", opt.seed,
                       ordered_json{{"tensors", sizes.size()},
                                    {"total_elements", total},
                                    {"workers", opt.workers},
                                    {"steps", opt.steps},
                                    {"out_dir", opt.out_dir.string()}});
    std::cout << "coalesced: " << fmt_double("%.6f", t_coalesced) << " s ("
              << calls_coalesced / static_cast<std::uint64_t>(opt.steps)
              << " call/step), per-tensor: " << fmt_double("%.6f", t_per_tensor) << " s ("
              << calls_per_tensor / static_cast<std::uint64_t>(opt.steps)
              << " calls/step)\n";
    return 0;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Edge-classification GNN training on particle hit graphs with bulk "
                 "subgraph sampling"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic event dataset");
    generate->set_config("--config");
    generate->add_option("--out", gen.out_dir, "Output dataset directory")->required();
    generate->add_option("--preset", gen.preset,
                         "Dataset preset: ex3-mini, ex3, ctd-mini, bench")
        ->capture_default_str();
    generate->add_option("--n-events", gen.n_events, "Number of events")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    generate->add_option("--n-tracks", gen.n_tracks, "Tracks per event (preset override)");
    generate->add_option("--hits-min", gen.hits_min, "Min hits per track (preset override)");
    generate->add_option("--hits-max", gen.hits_max, "Max hits per track (preset override)");
    generate->add_option("--detector-layers", gen.detector_layers,
                         "Detector layers (preset override)");
    generate->add_option("--noise-hits", gen.noise_hits, "Noise hits (preset override)");
    generate->add_option("--false-edge-factor", gen.false_edge_factor,
                         "False edges per true edge (preset override)");
    generate->add_option("--f-v", gen.f_v, "Node feature width (preset override)");
    generate->add_option("--f-e", gen.f_e, "Edge feature width (preset override)");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train the interaction GNN");
    train_cmd->set_config("--config");
    train_cmd->add_option("--dataset", train.dataset_dir, "Dataset directory")->required();
    train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
    train_cmd->add_option("--batch-size", train.config.batch_size, "Roots per minibatch (b)")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train.config.epochs, "Training epochs")
        ->capture_default_str();
    train_cmd->add_option("--hidden", train.config.hidden, "Hidden width (f)")
        ->capture_default_str();
    train_cmd->add_option("--layers", train.config.layers, "Message-passing rounds (L)")
        ->capture_default_str();
    train_cmd->add_option("--depth", train.config.depth, "Sampling depth (d)")
        ->capture_default_str();
    train_cmd->add_option("--fanout", train.config.fanout, "Sampling fanout (s)")
        ->capture_default_str();
    train_cmd->add_option("--bulk-batches", train.config.bulk_batches,
                          "Minibatches sampled per bulk call (k)")
        ->capture_default_str();
    train_cmd->add_option("--workers", train.config.workers, "Data-parallel workers (W)")
        ->capture_default_str();
    train_cmd->add_option("--mlp-depth", train.config.mlp_depth, "Hidden layers per MLP")
        ->capture_default_str();
    train_cmd->add_option("--learning-rate", train.config.learning_rate, "Adam learning rate")
        ->capture_default_str();
    train_cmd->add_option("--pos-weight", train.config.pos_weight,
                          "Positive-label loss weight")
        ->capture_default_str();
    train_cmd->add_option("--seed", train.config.seed, "Run seed")->capture_default_str();
    std::string mode = "minibatch";
    train_cmd->add_option("--mode", mode, "minibatch or fullgraph")->capture_default_str();
    train_cmd->add_flag("--coalesce,!--no-coalesce", train.config.coalesce,
                        "Coalesce gradients into one all-reduce call")
        ->capture_default_str();
    train_cmd->add_flag("--symmetrize,!--no-symmetrize", train.config.symmetrize,
                        "Sample on the symmetrized adjacency")
        ->capture_default_str();
    train_cmd->add_flag("--roots-only-loss", train.config.roots_only_loss,
                        "Restrict the loss to edges incident to batch roots");
    train_cmd->add_option("--threshold", train.config.threshold,
                          "Validation decision threshold")
        ->capture_default_str();
    train_cmd->add_option("--max-batches-per-event", train.config.max_batches_per_event,
                          "Minibatches per event per epoch (0 = cover all roots)")
        ->capture_default_str();
    train_cmd->add_option("--fullgraph-budget", train.config.fullgraph_budget_elements,
                          "Activation-element budget before a graph is skipped")
        ->capture_default_str();
    std::string hidden_act = "relu", encoder_act = "tanh";
    train_cmd->add_option("--activation", hidden_act, "Hidden activation")
        ->capture_default_str();
    train_cmd->add_option("--encoder-activation", encoder_act,
                          "Encoder output activation")
        ->capture_default_str();
    train_cmd->add_flag("--zero-timings", train.zero_timings,
                        "Write timing columns as zero for byte-reproducible metrics");
    train_cmd->add_flag("--plot", train.plot, "Emit SVG charts");

    EvaluateOptions eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a split");
    eval_cmd->set_config("--config");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--dataset", eval.dataset_dir, "Dataset directory")->required();
    eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
    eval_cmd->add_option("--split", eval.split, "train, val or test")->capture_default_str();
    eval_cmd->add_option("--threshold", eval.threshold, "Decision threshold")
        ->capture_default_str();
    eval_cmd->add_option("--min-track-len", eval.min_track_len,
                         "Minimum vertices for a reported track")
        ->capture_default_str();
    eval_cmd->add_flag("--tracks", eval.write_tracks, "Write per-track listing");

    BenchSamplingOptions bench_s;
    auto* bench_s_cmd =
        app.add_subcommand("bench-sampling", "Time bulk vs sequential ShaDow sampling");
    bench_s_cmd->set_config("--config");
    bench_s_cmd->add_option("--dataset", bench_s.dataset_dir, "Dataset directory")->required();
    bench_s_cmd->add_option("--out", bench_s.out_dir, "Output directory")->required();
    bench_s_cmd->add_option("--k", bench_s.k_values, "Bulk batch counts to time")
        ->capture_default_str();
    bench_s_cmd->add_option("--repeats", bench_s.repeats, "Repeats per k (median reported)")
        ->capture_default_str();
    bench_s_cmd->add_option("--seed", bench_s.seed, "Root-set seed")->capture_default_str();
    bench_s_cmd->add_option("--event-index", bench_s.event_index,
                            "Event to sample (-1 = most edges)")
        ->capture_default_str();
    bench_s_cmd->add_option("--batch-size", bench_s.batch_size, "Roots per batch")
        ->capture_default_str();
    bench_s_cmd->add_option("--depth", bench_s.depth, "Sampling depth")->capture_default_str();
    bench_s_cmd->add_option("--fanout", bench_s.fanout, "Sampling fanout")
        ->capture_default_str();
    bench_s_cmd->add_flag("--symmetrize,!--no-symmetrize", bench_s.symmetrize,
                          "Sample on the symmetrized adjacency")
        ->capture_default_str();
    bench_s_cmd->add_flag("--plot", bench_s.plot, "Emit SVG chart");

    BenchAllreduceOptions bench_a;
    auto* bench_a_cmd =
        app.add_subcommand("bench-allreduce", "Time coalesced vs per-tensor all-reduce");
    bench_a_cmd->set_config("--config");
    bench_a_cmd->add_option("--out", bench_a.out_dir, "Output directory")->required();
    bench_a_cmd->add_option("--tensors", bench_a.tensors, "Number of tensors")
        ->capture_default_str();
    bench_a_cmd->add_option("--elements", bench_a.elements, "Elements per tensor")
        ->capture_default_str();
    bench_a_cmd->add_option("--sizes", bench_a.sizes,
                            "Explicit tensor sizes (overrides --tensors/--elements)");
    bench_a_cmd->add_option("--workers", bench_a.workers, "Worker count (W)")
        ->capture_default_str();
    bench_a_cmd->add_option("--steps", bench_a.steps, "Steps to time")->capture_default_str();
    bench_a_cmd->add_option("--seed", bench_a.seed, "Buffer fill seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*train_cmd) {
            train.config.mode = train_mode_from_string(mode);
            train.config.hidden_activation = activation_from_string(hidden_act);
            train.config.encoder_output_activation = activation_from_string(encoder_act);
            return cmd_train(train);
        }
        if (*eval_cmd) return cmd_evaluate(eval);
        if (*bench_s_cmd) return cmd_bench_sampling(bench_s);
        if (*bench_a_cmd) return cmd_bench_allreduce(bench_a);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace hitgnn::cli
