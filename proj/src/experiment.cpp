#include "meshres/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "meshres/decimate.hpp"
#include "meshres/geometry.hpp"
#include "meshres/mesh_io.hpp"
#include "meshres/parallel.hpp"
#include "meshres/rng.hpp"
#include "meshres/upsample.hpp"

namespace meshres {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
    if (resolutions.empty())
        throw ConfigError("resolutions must not be empty");
    if (!std::is_sorted(resolutions.begin(), resolutions.end()))
        throw ConfigError("resolutions must be sorted ascending");
    for (int r : resolutions)
        if (r < 4)
            throw ConfigError("resolutions must be >= 4");
    if (test_fraction <= 0.0 || test_fraction >= 1.0 || val_fraction_of_train < 0.0 ||
        val_fraction_of_train >= 1.0)
        throw ConfigError("split fractions out of range");
    if (augment_copies < 0 || knn_k < 1 || timing_repeats < 3)
        throw ConfigError("invalid augment_copies / knn_k / timing_repeats");
    model.validate();
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["resolutions"] = resolutions;
    j["eval_resolutions"] = eval_resolutions;
    j["test_fraction"] = test_fraction;
    j["val_fraction_of_train"] = val_fraction_of_train;
    j["augment_copies"] = augment_copies;
    j["seed"] = seed;
    j["model"] = nlohmann::json::parse(model.to_json());
    j["train"] = nlohmann::json::parse(train.to_json());
    j["knn_k"] = knn_k;
    j["normalize_features"] = normalize_features;
    j["timing_repeats"] = timing_repeats;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("resolutions"))
        c.resolutions = j["resolutions"].get<std::vector<int>>();
    if (j.contains("eval_resolutions"))
        c.eval_resolutions = j["eval_resolutions"].get<std::vector<int>>();
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.val_fraction_of_train = j.value("val_fraction_of_train", c.val_fraction_of_train);
    c.augment_copies = j.value("augment_copies", c.augment_copies);
    c.seed = j.value("seed", c.seed);
    if (j.contains("model"))
        c.model = ModelConfig::from_json(j["model"].dump());
    if (j.contains("train"))
        c.train = TrainConfig::from_json(j["train"].dump());
    c.knn_k = j.value("knn_k", c.knn_k);
    c.normalize_features = j.value("normalize_features", c.normalize_features);
    c.timing_repeats = j.value("timing_repeats", c.timing_repeats);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

IngestResult ingest_dataset(const fs::path& root, std::optional<double> crop_keep) {
    if (!fs::is_directory(root))
        throw IoError(root.string() + " is not a directory");
    std::vector<fs::path> mesh_files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_regular_file())
            continue;
        std::string ext = entry.path().extension().string();
        if (ext == ".obj" || ext == ".ply" || ext == ".stl")
            mesh_files.push_back(entry.path());
    }
    std::sort(mesh_files.begin(), mesh_files.end());

    IngestResult result;
    for (const fs::path& mesh_path : mesh_files) {
        fs::path sidecar = mesh_path;
        sidecar.replace_extension(".labels.json");
        if (!fs::exists(sidecar)) {
            sidecar = mesh_path;
            sidecar.replace_extension(".json");
        }
        if (!fs::exists(sidecar)) {
            result.skipped.emplace_back(mesh_path.filename().string(), "no label sidecar");
            continue;
        }
        try {
            TriangleMesh mesh = load_mesh(mesh_path);
            LabeledMesh labeled = apply_labels(mesh, load_labels(sidecar));
            if (crop_keep)
                labeled = crop_base(labeled, *crop_keep);
            labeled.validate();
            result.surfaces.push_back(std::move(labeled));
            result.names.push_back(mesh_path.stem().string());
        } catch (const ThirdMolarError&) {
            result.skipped.emplace_back(mesh_path.filename().string(), "third molar");
        } catch (const Error& e) {
            result.skipped.emplace_back(mesh_path.filename().string(), e.what());
        }
    }
    if (result.surfaces.empty())
        throw EmptyResultError("no usable scans under " + root.string());
    return result;
}

SplitResult split(const std::vector<LabeledMesh>& dataset, const ExperimentConfig& config) {
    config.validate();
    const int n = static_cast<int>(dataset.size());
    if (n < 5)
        throw DatasetTooSmallError("need at least 5 surfaces, got " + std::to_string(n));

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i)
        order[i] = i;
    Rng rng(config.seed ^ 0x5911fda5ULL);
    for (int i = n; i > 1; --i)
        std::swap(order[i - 1], order[static_cast<int>(rng.next_below(i))]);

    int test_count = std::max(1, static_cast<int>(n * config.test_fraction));
    int remaining = n - test_count;
    int val_count = static_cast<int>(remaining * config.val_fraction_of_train);

    SplitResult out;
    auto take = [&](int from, int count, std::vector<DatasetEntry>& dst) {
        for (int i = from; i < from + count; ++i)
            dst.push_back({dataset[order[i]], order[i], false});
    };
    take(0, test_count, out.test);
    take(test_count, val_count, out.val);
    take(test_count + val_count, remaining - val_count, out.train);

    // Augment only the train/val partitions, after splitting; copies keep
    // their origin's provenance id.
    auto expand = [&](std::vector<DatasetEntry>& part) {
        size_t originals = part.size();
        for (size_t i = 0; i < originals; ++i) {
            for (int c = 0; c < config.augment_copies; ++c) {
                Rng stream = Rng::keyed(config.seed,
                                        static_cast<std::uint64_t>(part[i].provenance),
                                        static_cast<std::uint64_t>(c));
                AugmentConfig acfg = config.augment;
                auto [augmented, sample] = augment_surface(part[i].surface, acfg, stream);
                (void)sample;
                part.push_back({std::move(augmented), part[i].provenance, true});
            }
        }
    };
    expand(out.train);
    expand(out.val);
    return out;
}

namespace {

struct PreparedPartition {
    std::vector<LabeledMesh> meshes;
    std::vector<LabeledFeatures> feats;
};

PreparedPartition prepare(const std::vector<DatasetEntry>& part, int target_faces,
                          bool normalize) {
    PreparedPartition out;
    out.meshes.resize(part.size());
    out.feats.resize(part.size());
    parallel_for(part.size(), [&](size_t i) {
        DecimationConfig dc;
        dc.target_faces = target_faces;
        out.meshes[i] = decimate(part[i].surface, dc);
        out.feats[i] = featurize(out.meshes[i], normalize);
    });
    return out;
}

void write_predictions(const fs::path& path, const std::vector<DatasetEntry>& test,
                       const std::vector<std::vector<ClassId>>& preds) {
    nlohmann::json j;
    j["surfaces"] = nlohmann::json::array();
    for (size_t i = 0; i < preds.size(); ++i) {
        nlohmann::json s;
        s["provenance"] = test[i].provenance;
        nlohmann::json labels = nlohmann::json::array();
        for (ClassId c : preds[i])
            labels.push_back(static_cast<int>(c));
        s["labels"] = labels;
        j["surfaces"].push_back(s);
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << j.dump() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
}

} // namespace

std::vector<ReportRow> to_report_rows(const std::vector<RunRecord>& records) {
    std::vector<ReportRow> rows;
    rows.reserve(records.size());
    for (const RunRecord& r : records)
        rows.push_back({r.train_res, r.eval_res, r.report});
    return rows;
}

std::string emit_report(const std::vector<RunRecord>& records, const std::string& format) {
    std::vector<ReportRow> rows = to_report_rows(records);
    if (format == "csv")
        return report_table_csv(rows) + "\n" + per_class_table_csv(rows);
    if (format == "md")
        return report_table_markdown(rows);
    if (format == "json-lines")
        return report_json_lines(rows);
    throw ConfigError("unknown report format '" + format + "'");
}

SweepResult run_sweep(const std::vector<LabeledMesh>& dataset, const ExperimentConfig& config,
                      const fs::path& out_dir) {
    config.validate();
    SplitResult parts = split(dataset, config);
    fs::create_directories(out_dir);

    SweepResult result;

    // Ground truth at each eval resolution: test surfaces decimated once,
    // labels carried along.
    std::vector<int> eval_needed;
    for (int e : config.eval_resolutions)
        if (e > config.resolutions.front())
            eval_needed.push_back(e);
    std::vector<std::vector<LabeledMesh>> eval_gt(eval_needed.size());
    for (size_t i = 0; i < eval_needed.size(); ++i) {
        eval_gt[i].resize(parts.test.size());
        parallel_for(parts.test.size(), [&](size_t s) {
            DecimationConfig dc;
            dc.target_faces = eval_needed[i];
            eval_gt[i][s] = decimate(parts.test[s].surface, dc);
        });
    }
    auto eval_gt_for = [&](int res) -> const std::vector<LabeledMesh>& {
        for (size_t i = 0; i < eval_needed.size(); ++i)
            if (eval_needed[i] == res)
                return eval_gt[i];
        throw ConfigError("missing eval ground truth");
    };

    for (int train_res : config.resolutions) {
        try {
            fs::path run_dir = out_dir / std::to_string(train_res);
            fs::create_directories(run_dir);

            PreparedPartition train_p = prepare(parts.train, train_res, config.normalize_features);
            PreparedPartition val_p = prepare(parts.val, train_res, config.normalize_features);
            PreparedPartition test_p = prepare(parts.test, train_res, config.normalize_features);

            fs::path ckpt = run_dir / "model.mrck";
            ModelParams params;
            double train_seconds = 0.0;
            if (fs::exists(ckpt)) {
                params = load_checkpoint(ckpt); // resumable unit
            } else {
                auto t0 = std::chrono::steady_clock::now();
                auto [trained, history] =
                    train(train_p.feats, val_p.feats, config.model, config.train);
                auto t1 = std::chrono::steady_clock::now();
                train_seconds = std::chrono::duration<double>(t1 - t0).count();
                params = std::move(trained);
                save_checkpoint(ckpt, params);
                (void)history;
            }

            // Native evaluation on the held-out test set.
            ConfusionMatrix cm;
            std::vector<std::vector<ClassId>> preds(test_p.feats.size());
            for (size_t i = 0; i < test_p.feats.size(); ++i) {
                Prediction p = predict(params, test_p.feats[i].features);
                cm += confusion(test_p.feats[i].labels, p.labels);
                preds[i] = std::move(p.labels);
            }
            RunRecord native;
            native.train_res = train_res;
            native.report = compute_metrics(cm);
            native.report.inference_ms =
                measure_inference(params, test_p.feats.front().features, config.timing_repeats)
                    .mean_ms;
            native.checkpoint = ckpt.string();
            native.train_seconds = train_seconds;
            write_predictions(run_dir / "pred_native.json", parts.test, preds);

            std::vector<RunRecord> run_records{native};

            for (int eval_res : config.eval_resolutions) {
                if (eval_res <= train_res)
                    continue;
                const std::vector<LabeledMesh>& gt = eval_gt_for(eval_res);
                TransferConfig tc;
                tc.k = config.knn_k;
                ConfusionMatrix cm_up;
                std::vector<std::vector<ClassId>> up_preds(test_p.meshes.size());
                for (size_t i = 0; i < test_p.meshes.size(); ++i) {
                    LabeledMesh low_pred{test_p.meshes[i].mesh, preds[i]};
                    LabeledMesh up = upsample_prediction(low_pred, gt[i].mesh, tc);
                    cm_up += confusion(gt[i].labels, up.labels);
                    up_preds[i] = std::move(up.labels);
                }
                RunRecord rec;
                rec.train_res = train_res;
                rec.eval_res = eval_res;
                rec.report = compute_metrics(cm_up);
                rec.checkpoint = ckpt.string();
                run_records.push_back(rec);
                write_predictions(run_dir / ("pred_to_" + std::to_string(eval_res) + ".json"),
                                  parts.test, up_preds);
            }

            write_text(run_dir / "report.csv", emit_report(run_records, "csv"));
            for (RunRecord& r : run_records)
                result.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            result.errors.push_back("train_res " + std::to_string(train_res) + ": " + e.what());
        }
    }

    write_text(out_dir / "report.csv", report_table_csv(to_report_rows(result.records)));
    write_text(out_dir / "report_per_class.csv",
               per_class_table_csv(to_report_rows(result.records)));
    write_text(out_dir / "report.jsonl", emit_report(result.records, "json-lines"));
    return result;
}

} // namespace meshres
