// meshres — one binary exposing every pipeline stage as a subcommand.
// Exit codes: 0 success, 1 usage, 2 data error, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "meshres/decimate.hpp"
#include "meshres/experiment.hpp"
#include "meshres/features.hpp"
#include "meshres/geometry.hpp"
#include "meshres/mesh_io.hpp"
#include "meshres/metrics.hpp"
#include "meshres/model.hpp"
#include "meshres/synth.hpp"
#include "meshres/upsample.hpp"

namespace fs = std::filesystem;
using namespace meshres;

namespace {

int g_verbosity = 1; // 0 quiet, 1 normal, 2 verbose

void log_info(const std::string& msg) {
    if (g_verbosity >= 1)
        std::cerr << msg << '\n';
}
void log_debug(const std::string& msg) {
    if (g_verbosity >= 2)
        std::cerr << msg << '\n';
}

bool is_data_error(const Error& e) {
    return dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
           dynamic_cast<const ValidationError*>(&e) ||
           dynamic_cast<const DegenerateFaceError*>(&e) ||
           dynamic_cast<const IsolatedVertexError*>(&e) ||
           dynamic_cast<const EmptyResultError*>(&e) ||
           dynamic_cast<const ThirdMolarError*>(&e) ||
           dynamic_cast<const UnknownLabelError*>(&e) ||
           dynamic_cast<const InsufficientSourceError*>(&e) ||
           dynamic_cast<const LengthMismatchError*>(&e) ||
           dynamic_cast<const RangeError*>(&e) ||
           dynamic_cast<const DatasetTooSmallError*>(&e);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<ClassId> face_labels_from_file(const fs::path& path, size_t expected) {
    LabelFile lf = load_labels(path);
    if (lf.mode != LabelFile::Mode::Face)
        throw ParseError(path.string() + ": expected face-mode labels");
    if (expected && lf.labels.size() != expected)
        throw LengthMismatchError(path.string() + ": label count mismatch");
    std::vector<ClassId> out;
    out.reserve(lf.labels.size());
    for (int v : lf.labels) {
        if (!class_id_valid(v))
            throw RangeError(path.string() + ": label out of class range");
        out.push_back(static_cast<ClassId>(v));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-resolution tooth-segmentation pipeline"};
    app.require_subcommand(1);

    bool quiet = false, verbose = false;
    app.add_flag("--quiet", quiet, "suppress progress logging");
    app.add_flag("--verbose", verbose, "extra diagnostics");

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic labeled jaws");
    int synth_count = 10;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    SynthJawSpec synth_spec;
    synth_cmd->add_option("--count", synth_count, "number of jaws");
    synth_cmd->add_option("--seed", synth_seed, "rng seed");
    synth_cmd->add_option("--out-dir", synth_out, "output directory")->required();
    synth_cmd->add_option("--cells", synth_spec.cells_target, "minimum face count");
    synth_cmd->add_option("--teeth", synth_spec.tooth_count, "teeth per jaw (<= 14)");

    // ---- decimate ----
    auto* dec_cmd = app.add_subcommand("decimate", "quadric edge-collapse decimation");
    std::string dec_in, dec_labels, dec_out, dec_out_labels;
    DecimationConfig dec_cfg;
    bool dec_no_boundary = false;
    dec_cmd->add_option("--in", dec_in, "input mesh")->required();
    dec_cmd->add_option("--labels", dec_labels, "label sidecar")->required();
    dec_cmd->add_option("--target", dec_cfg.target_faces, "target face count")->required();
    dec_cmd->add_option("--out", dec_out, "output mesh (OBJ)")->required();
    dec_cmd->add_option("--out-labels", dec_out_labels, "output label sidecar")->required();
    dec_cmd->add_flag("--no-preserve-boundary", dec_no_boundary, "allow free boundary collapses");

    // ---- featurize ----
    auto* feat_cmd = app.add_subcommand("featurize", "build 24-d per-cell features");
    std::string feat_in, feat_labels, feat_out;
    bool feat_no_norm = false;
    feat_cmd->add_option("--in", feat_in, "input mesh")->required();
    feat_cmd->add_option("--labels", feat_labels, "label sidecar")->required();
    feat_cmd->add_option("--out", feat_out, "output .mrft file")->required();
    feat_cmd->add_flag("--no-normalize", feat_no_norm, "skip pose normalization");

    // ---- augment ----
    auto* aug_cmd = app.add_subcommand("augment", "expand a dataset with augmented copies");
    std::string aug_in, aug_out;
    AugmentConfig aug_cfg;
    aug_cmd->add_option("--in-dir", aug_in, "directory of meshes + label sidecars")->required();
    aug_cmd->add_option("--copies", aug_cfg.copies, "augmented copies per surface");
    aug_cmd->add_option("--seed", aug_cfg.seed, "rng seed");
    aug_cmd->add_option("--p-axis", aug_cfg.p_axis, "per-axis activation probability");
    aug_cmd->add_option("--out-dir", aug_out, "output directory")->required();

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the segmentation model");
    std::string train_data, train_val, train_cfg_path, train_out;
    std::optional<std::uint64_t> train_seed;
    train_cmd->add_option("--data", train_data, "directory of .mrft training files")->required();
    train_cmd->add_option("--val-dir", train_val, "directory of .mrft validation files");
    train_cmd->add_option("--config", train_cfg_path, "JSON with model/train configs");
    train_cmd->add_option("--out", train_out, "output checkpoint (.mrck)")->required();
    train_cmd->add_option("--seed", [&train_seed](const std::vector<std::string>& v) {
        train_seed = std::stoull(v.front());
        return true;
    }, "rng seed (overrides config)");

    // ---- predict ----
    auto* pred_cmd = app.add_subcommand("predict", "run inference on a feature file");
    std::string pred_model, pred_in, pred_out;
    pred_cmd->add_option("--model", pred_model, "checkpoint (.mrck)")->required();
    pred_cmd->add_option("--in", pred_in, "input .mrft file")->required();
    pred_cmd->add_option("--out", pred_out, "output prediction sidecar")->required();

    // ---- upsample ----
    auto* up_cmd = app.add_subcommand("upsample", "KNN label transfer to a finer mesh");
    std::string up_pred, up_low, up_high, up_out;
    TransferConfig up_cfg;
    up_cmd->add_option("--pred", up_pred, "low-res prediction sidecar")->required();
    up_cmd->add_option("--low", up_low, "low-res mesh")->required();
    up_cmd->add_option("--high", up_high, "high-res mesh")->required();
    up_cmd->add_option("--k", up_cfg.k, "neighbors");
    up_cmd->add_option("--out", up_out, "output prediction sidecar")->required();

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "segmentation metrics for gt vs pred");
    std::string eval_gt, eval_pred, eval_out;
    eval_cmd->add_option("--gt", eval_gt, "ground-truth label sidecar")->required();
    eval_cmd->add_option("--pred", eval_pred, "prediction label sidecar")->required();
    eval_cmd->add_option("--out", eval_out, "output report CSV");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "full resolution sweep");
    std::string sweep_cfg_path, sweep_data, sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    sweep_cmd->add_option("--config", sweep_cfg_path, "experiment config JSON")->required();
    sweep_cmd->add_option("--data-dir", sweep_data, "dataset directory")->required();
    sweep_cmd->add_option("--out-dir", sweep_out, "run output directory")->required();
    sweep_cmd->add_option("--seed", [&sweep_seed](const std::vector<std::string>& v) {
        sweep_seed = std::stoull(v.front());
        return true;
    }, "rng seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }
    g_verbosity = quiet ? 0 : (verbose ? 2 : 1);

    try {
        if (synth_cmd->parsed()) {
            fs::create_directories(synth_out);
            synth_spec.seed = synth_seed;
            std::vector<LabeledMesh> jaws = synth_generate(synth_spec, synth_count);
            for (size_t i = 0; i < jaws.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "jaw_%03zu", i);
                save_obj(fs::path(synth_out) / (std::string(name) + ".obj"), jaws[i].mesh);
                save_labels(fs::path(synth_out) / (std::string(name) + ".labels.json"),
                            jaws[i].labels);
                log_debug(std::string("wrote ") + name);
            }
            log_info("generated " + std::to_string(jaws.size()) + " jaws in " + synth_out);
        } else if (dec_cmd->parsed()) {
            TriangleMesh mesh = load_mesh(dec_in);
            LabeledMesh labeled = apply_labels(mesh, load_labels(dec_labels));
            dec_cfg.preserve_boundary = !dec_no_boundary;
            LabeledMesh out = decimate(labeled, dec_cfg);
            save_obj(dec_out, out.mesh);
            save_labels(dec_out_labels, out.labels);
            log_info("decimated " + std::to_string(labeled.mesh.face_count()) + " -> " +
                     std::to_string(out.mesh.face_count()) + " faces");
        } else if (feat_cmd->parsed()) {
            TriangleMesh mesh = load_mesh(feat_in);
            LabeledMesh labeled = apply_labels(mesh, load_labels(feat_labels));
            LabeledFeatures lf = featurize(labeled, !feat_no_norm);
            save_features(feat_out, lf);
            log_info("wrote " + std::to_string(lf.features.rows) + " feature rows to " + feat_out);
        } else if (aug_cmd->parsed()) {
            IngestResult ingest = ingest_dataset(aug_in);
            std::vector<LabeledMesh> expanded = expand_dataset(ingest.surfaces, aug_cfg);
            fs::create_directories(aug_out);
            for (size_t i = 0; i < expanded.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "surface_%04zu", i);
                save_obj(fs::path(aug_out) / (std::string(name) + ".obj"), expanded[i].mesh);
                save_labels(fs::path(aug_out) / (std::string(name) + ".labels.json"),
                            expanded[i].labels);
            }
            log_info("expanded " + std::to_string(ingest.surfaces.size()) + " -> " +
                     std::to_string(expanded.size()) + " surfaces");
        } else if (train_cmd->parsed()) {
            ModelConfig mcfg;
            TrainConfig tcfg;
            if (!train_cfg_path.empty()) {
                nlohmann::json j = nlohmann::json::parse(read_file(train_cfg_path));
                if (j.contains("model"))
                    mcfg = ModelConfig::from_json(j["model"].dump());
                if (j.contains("train"))
                    tcfg = TrainConfig::from_json(j["train"].dump());
            }
            if (train_seed)
                tcfg.seed = *train_seed;
            auto load_dir = [](const std::string& dir) {
                std::vector<LabeledFeatures> out;
                std::vector<fs::path> files;
                for (const auto& e : fs::directory_iterator(dir))
                    if (e.path().extension() == ".mrft")
                        files.push_back(e.path());
                std::sort(files.begin(), files.end());
                for (const fs::path& f : files)
                    out.push_back(load_features(f));
                return out;
            };
            std::vector<LabeledFeatures> train_set = load_dir(train_data);
            std::vector<LabeledFeatures> val_set;
            if (!train_val.empty())
                val_set = load_dir(train_val);
            auto [params, history] = train(train_set, val_set, mcfg, tcfg);
            save_checkpoint(train_out, params);
            log_info("trained " + std::to_string(history.train_loss.size()) + " epochs, final loss " +
                     std::to_string(history.train_loss.empty() ? 0.0 : history.train_loss.back()));
        } else if (pred_cmd->parsed()) {
            ModelParams params = load_checkpoint(pred_model);
            LabeledFeatures lf = load_features(pred_in);
            Prediction p = predict(params, lf.features);
            save_labels(pred_out, p.labels);
            log_info("predicted " + std::to_string(p.labels.size()) + " cells");
        } else if (up_cmd->parsed()) {
            TriangleMesh low = load_mesh(up_low);
            TriangleMesh high = load_mesh(up_high);
            std::vector<ClassId> pred = face_labels_from_file(up_pred, low.faces.size());
            LabeledMesh low_pred{low, pred};
            LabeledMesh out = upsample_prediction(low_pred, high, up_cfg);
            save_labels(up_out, out.labels);
            log_info("transferred labels to " + std::to_string(out.labels.size()) + " cells");
        } else if (eval_cmd->parsed()) {
            std::vector<ClassId> gt = face_labels_from_file(eval_gt, 0);
            std::vector<ClassId> pred = face_labels_from_file(eval_pred, 0);
            MetricsReport rep = compute_metrics(confusion(gt, pred));
            ReportRow row{static_cast<int>(gt.size()), std::nullopt, rep};
            std::string csv = report_table_csv({row}) + "\n" + per_class_table_csv({row});
            if (!eval_out.empty()) {
                std::ofstream out(eval_out);
                if (!out)
                    throw IoError("cannot write " + eval_out);
                out << csv;
            }
            std::cout << csv;
        } else if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::from_file(sweep_cfg_path);
            if (sweep_seed)
                cfg.seed = *sweep_seed;
            IngestResult ingest = ingest_dataset(sweep_data);
            for (const auto& [file, reason] : ingest.skipped)
                log_info("skipped " + file + ": " + reason);
            log_info("ingested " + std::to_string(ingest.surfaces.size()) + " surfaces, skipped " +
                     std::to_string(ingest.skipped.size()));
            SweepResult res = run_sweep(ingest.surfaces, cfg, sweep_out);
            for (const std::string& err : res.errors)
                std::cerr << "run failed: " << err << '\n';
            log_info("sweep wrote " + std::to_string(res.records.size()) + " records to " +
                     sweep_out);
            if (!res.errors.empty())
                return 3;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_data_error(e) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
