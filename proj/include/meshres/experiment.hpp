// End-to-end orchestration: ingestion, splitting with augmentation,
// the per-resolution train/evaluate/upsample sweep, and report emission.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meshres/augment.hpp"
#include "meshres/metrics.hpp"
#include "meshres/model.hpp"
#include "meshres/synth.hpp"

namespace meshres {

struct ExperimentConfig {
    std::vector<int> resolutions = {2000, 4000, 6000, 8000, 10000, 16000};
    std::vector<int> eval_resolutions = {10000, 16000};
    double test_fraction = 0.2;
    double val_fraction_of_train = 0.2;
    int augment_copies = 4;
    std::uint64_t seed = 0;
    ModelConfig model;
    TrainConfig train;
    AugmentConfig augment;
    int knn_k = 3;
    bool normalize_features = true;
    int timing_repeats = 3;

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct IngestResult {
    std::vector<LabeledMesh> surfaces;
    std::vector<std::string> names;                         // stems of kept files
    std::vector<std::pair<std::string, std::string>> skipped; // (file, reason)
};

// Scans `root` for mesh files with label sidecars ("<stem>.labels.json" or
// "<stem>.json"). Per-file failures are recorded and skipped; throws
// EmptyResultError only when nothing usable remains. `crop_keep` applies
// crop_base before validation when set.
IngestResult ingest_dataset(const std::filesystem::path& root,
                            std::optional<double> crop_keep = std::nullopt);

struct DatasetEntry {
    LabeledMesh surface;
    int provenance = -1; // original surface index, shared with its copies
    bool augmented = false;
};

struct SplitResult {
    std::vector<DatasetEntry> train, val, test;
};

// Seeded shuffle, 20% test (floor, >= 1), 20% of the remainder as
// validation; train and val are then expanded with augmented copies. A
// provenance id never crosses partitions.
SplitResult split(const std::vector<LabeledMesh>& dataset, const ExperimentConfig& config);

struct RunRecord {
    int train_res = 0;
    std::optional<int> eval_res;
    MetricsReport report;
    std::string checkpoint;
    double train_seconds = 0.0;
};

struct SweepResult {
    std::vector<RunRecord> records;
    std::vector<std::string> errors; // per-run failures, sweep continues
};

// For every training resolution: decimate -> featurize -> train (or reuse an
// existing checkpoint in out_dir) -> evaluate natively, then upsample test
// predictions to every higher eval resolution and evaluate against labels
// carried to that resolution. Writes per-run artifacts under
// out_dir/<train_res>/ and combined reports under out_dir.
SweepResult run_sweep(const std::vector<LabeledMesh>& dataset, const ExperimentConfig& config,
                      const std::filesystem::path& out_dir);

// "csv" (aggregate + per-class tables), "md", or "json-lines".
std::string emit_report(const std::vector<RunRecord>& records, const std::string& format);

std::vector<ReportRow> to_report_rows(const std::vector<RunRecord>& records);

} // namespace meshres
