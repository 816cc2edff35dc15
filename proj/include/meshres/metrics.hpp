// Segmentation metrics: confusion matrix, per-class DSC/SEN/PPV, overall
// accuracy, and the report tables keyed by (train resolution, eval
// resolution).
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshres/mesh.hpp"

namespace meshres {

struct ConfusionMatrix {
    // counts[g][p] = cells with ground truth g predicted p
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t total() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

ConfusionMatrix confusion(const std::vector<ClassId>& gt, const std::vector<ClassId>& pred);

struct ClassMetrics {
    // A metric is NaN when undefined for the class (no relevant cells).
    double dsc = 0.0, sen = 0.0, ppv = 0.0;
    bool included = false; // TP + FP + FN > 0
};

struct MetricsReport {
    std::array<ClassMetrics, kNumClasses> per_class{};
    double oa = 0.0;
    bool oa_defined = false; // false only for empty input
    double macro_dsc = 0.0, macro_sen = 0.0, macro_ppv = 0.0;
    double micro_dsc = 0.0, micro_sen = 0.0, micro_ppv = 0.0;
    std::int64_t cell_count = 0;
    std::optional<double> inference_ms;
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

// One row of the aggregate table (the overall-results schema).
struct ReportRow {
    int train_res = 0;
    std::optional<int> eval_res; // set for upsampled rows
    MetricsReport report;
};

// "<res>K" when divisible by 1000, plus " (to <eval>)" for upsampled rows.
std::string row_label(const ReportRow& row);

// Aggregate table: label, cell count, OA, DSC, SEN, PPV, inference ms. Rows
// ordered by ascending train resolution, native before upsampled.
std::string report_table_csv(std::vector<ReportRow> rows);

// Per-class DSC table, columns BG, T1..T7, same row order.
std::string per_class_table_csv(std::vector<ReportRow> rows);

std::string report_table_markdown(std::vector<ReportRow> rows);

// One JSON object per row; numeric values identical to the CSV source data.
std::string report_json_lines(std::vector<ReportRow> rows);

void sort_rows(std::vector<ReportRow>& rows);

} // namespace meshres
