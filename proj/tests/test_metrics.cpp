#include <doctest.h>

#include <cmath>

#include "meshres/metrics.hpp"
#include "meshres/rng.hpp"

using namespace meshres;

namespace {

// Naive per-element counting oracle, kept independent of ConfusionMatrix.
struct OracleMetrics {
    double dsc[8], sen[8], ppv[8], oa;
    bool has_dsc[8], has_sen[8], has_ppv[8];
};

OracleMetrics oracle(const std::vector<ClassId>& gt, const std::vector<ClassId>& pred) {
    OracleMetrics o{};
    long correct = 0;
    for (size_t i = 0; i < gt.size(); ++i)
        if (gt[i] == pred[i])
            ++correct;
    o.oa = gt.empty() ? std::nan("") : correct / double(gt.size());
    for (int c = 0; c < 8; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < gt.size(); ++i) {
            if (gt[i] == c && pred[i] == c) ++tp;
            if (gt[i] != c && pred[i] == c) ++fp;
            if (gt[i] == c && pred[i] != c) ++fn;
        }
        o.has_dsc[c] = tp + fp + fn > 0;
        o.has_sen[c] = tp + fn > 0;
        o.has_ppv[c] = tp + fp > 0;
        o.dsc[c] = o.has_dsc[c] ? 2.0 * tp / (2.0 * tp + fp + fn) : std::nan("");
        o.sen[c] = o.has_sen[c] ? double(tp) / (tp + fn) : std::nan("");
        o.ppv[c] = o.has_ppv[c] ? double(tp) / (tp + fp) : std::nan("");
    }
    return o;
}

} // namespace

TEST_CASE("perfect prediction scores 1 everywhere defined") {
    std::vector<ClassId> labels = {0, 1, 2, 3, 7, 7, 0};
    MetricsReport rep = compute_metrics(confusion(labels, labels));
    CHECK(rep.oa == doctest::Approx(1.0));
    CHECK(rep.macro_dsc == doctest::Approx(1.0));
    for (int c : {0, 1, 2, 3, 7}) {
        CHECK(rep.per_class[c].included);
        CHECK(rep.per_class[c].dsc == doctest::Approx(1.0));
    }
    CHECK_FALSE(rep.per_class[4].included);
}

TEST_CASE("hand-computed confusion and metrics") {
    std::vector<ClassId> gt = {0, 0, 1, 1};
    std::vector<ClassId> pred = {0, 1, 1, 1};
    ConfusionMatrix cm = confusion(gt, pred);
    CHECK(cm.counts[0][0] == 1);
    CHECK(cm.counts[0][1] == 1);
    CHECK(cm.counts[1][1] == 2);
    CHECK(cm.total() == 4);

    MetricsReport rep = compute_metrics(cm);
    CHECK(rep.oa == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rep.per_class[0].dsc == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rep.per_class[0].sen == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.per_class[0].ppv == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.per_class[1].dsc == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(rep.per_class[1].sen == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.per_class[1].ppv == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("empty inputs produce a zero matrix with excluded OA") {
    MetricsReport rep = compute_metrics(confusion({}, {}));
    CHECK(rep.cell_count == 0);
    CHECK_FALSE(rep.oa_defined);
    CHECK(std::isnan(rep.oa));
}

TEST_CASE("confusion validates lengths and ranges") {
    CHECK_THROWS_AS(confusion({0, 1}, {0}), LengthMismatchError);
    CHECK_THROWS_AS(confusion({9}, {0}), RangeError);
}

TEST_CASE("random label pairs match the counting oracle exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng.next_below(256);
        std::vector<ClassId> gt(n), pred(n);
        for (size_t i = 0; i < n; ++i) {
            gt[i] = static_cast<ClassId>(rng.next_below(8));
            pred[i] = static_cast<ClassId>(rng.next_below(8));
        }
        MetricsReport rep = compute_metrics(confusion(gt, pred));
        OracleMetrics o = oracle(gt, pred);
        CHECK(rep.oa == doctest::Approx(o.oa).epsilon(1e-15));
        for (int c = 0; c < 8; ++c) {
            CHECK(rep.per_class[c].included == o.has_dsc[c]);
            if (o.has_dsc[c])
                CHECK(rep.per_class[c].dsc == doctest::Approx(o.dsc[c]).epsilon(1e-15));
            if (o.has_sen[c])
                CHECK(rep.per_class[c].sen == doctest::Approx(o.sen[c]).epsilon(1e-15));
            if (o.has_ppv[c])
                CHECK(rep.per_class[c].ppv == doctest::Approx(o.ppv[c]).epsilon(1e-15));
        }
    }
}

TEST_CASE("DSC is the harmonic mean of SEN and PPV when both are defined") {
    Rng rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng.next_below(128);
        std::vector<ClassId> gt(n), pred(n);
        for (size_t i = 0; i < n; ++i) {
            gt[i] = static_cast<ClassId>(rng.next_below(4));
            pred[i] = static_cast<ClassId>(rng.next_below(4));
        }
        MetricsReport rep = compute_metrics(confusion(gt, pred));
        for (int c = 0; c < 8; ++c) {
            const ClassMetrics& m = rep.per_class[c];
            if (std::isnan(m.sen) || std::isnan(m.ppv) || (m.sen + m.ppv) == 0.0)
                continue;
            double harmonic = 2.0 * m.sen * m.ppv / (m.sen + m.ppv);
            CHECK(std::abs(m.dsc - harmonic) <= 1e-12);
        }
    }
}

TEST_CASE("OA equals the frequency-weighted mean of per-class SEN") {
    Rng rng(41);
    std::vector<ClassId> gt(512), pred(512);
    for (size_t i = 0; i < gt.size(); ++i) {
        gt[i] = static_cast<ClassId>(rng.next_below(8));
        pred[i] = static_cast<ClassId>(rng.next_below(8));
    }
    ConfusionMatrix cm = confusion(gt, pred);
    MetricsReport rep = compute_metrics(cm);
    double weighted = 0.0;
    for (int c = 0; c < 8; ++c) {
        std::int64_t freq = 0;
        for (int j = 0; j < 8; ++j)
            freq += cm.counts[c][j];
        if (freq > 0)
            weighted += rep.per_class[c].sen * freq;
    }
    CHECK(std::abs(rep.oa - weighted / 512.0) <= 1e-12);
}

TEST_CASE("metrics are invariant under element permutation") {
    Rng rng(43);
    std::vector<ClassId> gt(100), pred(100);
    for (size_t i = 0; i < gt.size(); ++i) {
        gt[i] = static_cast<ClassId>(rng.next_below(8));
        pred[i] = static_cast<ClassId>(rng.next_below(8));
    }
    MetricsReport a = compute_metrics(confusion(gt, pred));
    // reverse both in lockstep
    std::reverse(gt.begin(), gt.end());
    std::reverse(pred.begin(), pred.end());
    MetricsReport b = compute_metrics(confusion(gt, pred));
    CHECK(a.oa == b.oa);
    for (int c = 0; c < 8; ++c)
        if (a.per_class[c].included)
            CHECK(a.per_class[c].dsc == b.per_class[c].dsc);
}

TEST_CASE("report rows format, order, and empty case") {
    CHECK(report_table_csv({}) == "input_size,cells,oa,dsc,sen,ppv,inference_ms\n");
    CHECK(per_class_table_csv({}) == "resolution,BG,T1,T2,T3,T4,T5,T6,T7\n");

    std::vector<ClassId> labels = {0, 1, 2};
    MetricsReport rep = compute_metrics(confusion(labels, labels));
    rep.inference_ms = 158.93;

    ReportRow native{16000, std::nullopt, rep};
    ReportRow upsampled{8000, 16000, rep};
    std::vector<ReportRow> rows = {native, upsampled};
    sort_rows(rows);
    CHECK(rows[0].train_res == 8000);
    CHECK(row_label(rows[0]) == "8K (to 16K)");
    CHECK(row_label(rows[1]) == "16K");

    std::string csv = report_table_csv({native, upsampled});
    CHECK(csv.find("8K (to 16K)") != std::string::npos);
    CHECK(csv.find("158.93") != std::string::npos);

    std::string per_class = per_class_table_csv({native});
    CHECK(per_class.rfind("resolution,BG,T1,T2,T3,T4,T5,T6,T7\n", 0) == 0);

    std::string jsonl = report_json_lines({native, upsampled});
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
}
