#include "meshres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace meshres {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    if (std::isnan(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
} // namespace

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row)
            t += v;
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    for (int g = 0; g < kNumClasses; ++g)
        for (int p = 0; p < kNumClasses; ++p)
            counts[g][p] += o.counts[g][p];
    return *this;
}

ConfusionMatrix confusion(const std::vector<ClassId>& gt, const std::vector<ClassId>& pred) {
    if (gt.size() != pred.size())
        throw LengthMismatchError("gt length " + std::to_string(gt.size()) + " != pred length " +
                                  std::to_string(pred.size()));
    ConfusionMatrix cm;
    for (size_t i = 0; i < gt.size(); ++i) {
        if (!class_id_valid(gt[i]) || !class_id_valid(pred[i]))
            throw RangeError("label out of class range at index " + std::to_string(i));
        ++cm.counts[gt[i]][pred[i]];
    }
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    MetricsReport rep;
    rep.cell_count = cm.total();

    std::int64_t trace = 0;
    double sum_dsc = 0, sum_sen = 0, sum_ppv = 0;
    int n_dsc = 0, n_sen = 0, n_ppv = 0;
    std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;

    for (int c = 0; c < kNumClasses; ++c) {
        std::int64_t tp = cm.counts[c][c];
        std::int64_t fn = 0, fp = 0;
        for (int j = 0; j < kNumClasses; ++j) {
            if (j == c)
                continue;
            fn += cm.counts[c][j];
            fp += cm.counts[j][c];
        }
        trace += tp;
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;

        ClassMetrics& m = rep.per_class[c];
        m.included = (tp + fp + fn) > 0;
        if (m.included) {
            m.dsc = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
            sum_dsc += m.dsc;
            ++n_dsc;
        } else {
            m.dsc = kNaN;
        }
        if (tp + fn > 0) {
            m.sen = tp / static_cast<double>(tp + fn);
            if (m.included) {
                sum_sen += m.sen;
                ++n_sen;
            }
        } else {
            m.sen = kNaN;
        }
        if (tp + fp > 0) {
            m.ppv = tp / static_cast<double>(tp + fp);
            if (m.included) {
                sum_ppv += m.ppv;
                ++n_ppv;
            }
        } else {
            m.ppv = kNaN;
        }
    }

    rep.oa_defined = rep.cell_count > 0;
    rep.oa = rep.oa_defined ? trace / static_cast<double>(rep.cell_count) : kNaN;
    rep.macro_dsc = n_dsc ? sum_dsc / n_dsc : kNaN;
    rep.macro_sen = n_sen ? sum_sen / n_sen : kNaN;
    rep.macro_ppv = n_ppv ? sum_ppv / n_ppv : kNaN;
    if (tp_all + fp_all + fn_all > 0) {
        rep.micro_dsc = 2.0 * tp_all / static_cast<double>(2 * tp_all + fp_all + fn_all);
        rep.micro_sen = tp_all / static_cast<double>(tp_all + fn_all);
        rep.micro_ppv = tp_all / static_cast<double>(tp_all + fp_all);
    } else {
        rep.micro_dsc = rep.micro_sen = rep.micro_ppv = kNaN;
    }
    return rep;
}

std::string row_label(const ReportRow& row) {
    auto res_str = [](int r) {
        return r % 1000 == 0 ? std::to_string(r / 1000) + "K" : std::to_string(r);
    };
    std::string s = res_str(row.train_res);
    if (row.eval_res)
        s += " (to " + res_str(*row.eval_res) + ")";
    return s;
}

void sort_rows(std::vector<ReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.train_res != b.train_res)
            return a.train_res < b.train_res;
        if (a.eval_res.has_value() != b.eval_res.has_value())
            return !a.eval_res.has_value(); // native first
        if (a.eval_res && b.eval_res)
            return *a.eval_res < *b.eval_res;
        return false;
    });
}

std::string report_table_csv(std::vector<ReportRow> rows) {
    sort_rows(rows);
    std::ostringstream out;
    out << "input_size,cells,oa,dsc,sen,ppv,inference_ms\n";
    for (const ReportRow& r : rows) {
        out << row_label(r) << ',' << r.report.cell_count << ',' << fmt(r.report.oa) << ','
            << fmt(r.report.macro_dsc) << ',' << fmt(r.report.macro_sen) << ','
            << fmt(r.report.macro_ppv) << ',';
        if (r.report.inference_ms)
            out << fmt(*r.report.inference_ms);
        out << '\n';
    }
    return out.str();
}

std::string per_class_table_csv(std::vector<ReportRow> rows) {
    sort_rows(rows);
    std::ostringstream out;
    out << "resolution,BG,T1,T2,T3,T4,T5,T6,T7\n";
    for (const ReportRow& r : rows) {
        out << row_label(r);
        for (int c = 0; c < kNumClasses; ++c)
            out << ',' << fmt(r.report.per_class[c].dsc);
        out << '\n';
    }
    return out.str();
}

std::string report_table_markdown(std::vector<ReportRow> rows) {
    sort_rows(rows);
    std::ostringstream out;
    out << "| Input Size | OA | DSC | SEN | PPV | Inference (ms) |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const ReportRow& r : rows) {
        out << "| " << row_label(r) << " | " << fmt(r.report.oa) << " | "
            << fmt(r.report.macro_dsc) << " | " << fmt(r.report.macro_sen) << " | "
            << fmt(r.report.macro_ppv) << " | ";
        if (r.report.inference_ms)
            out << fmt(*r.report.inference_ms);
        out << " |\n";
    }
    return out.str();
}

std::string report_json_lines(std::vector<ReportRow> rows) {
    sort_rows(rows);
    std::ostringstream out;
    for (const ReportRow& r : rows) {
        nlohmann::json j;
        j["input_size"] = row_label(r);
        j["train_res"] = r.train_res;
        if (r.eval_res)
            j["eval_res"] = *r.eval_res;
        j["cells"] = r.report.cell_count;
        auto put = [&j](const char* key, double v) {
            if (std::isnan(v))
                j[key] = nullptr;
            else
                j[key] = v;
        };
        put("oa", r.report.oa);
        put("dsc", r.report.macro_dsc);
        put("sen", r.report.macro_sen);
        put("ppv", r.report.macro_ppv);
        put("micro_dsc", r.report.micro_dsc);
        nlohmann::json per_class = nlohmann::json::array();
        for (int c = 0; c < kNumClasses; ++c) {
            if (std::isnan(r.report.per_class[c].dsc))
                per_class.push_back(nullptr);
            else
                per_class.push_back(r.report.per_class[c].dsc);
        }
        j["per_class_dsc"] = per_class;
        if (r.report.inference_ms)
            j["inference_ms"] = *r.report.inference_ms;
        out << j.dump() << '\n';
    }
    return out.str();
}

} // namespace meshres
