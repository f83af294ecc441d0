#pragma once

#include <string>
#include <vector>

namespace clonefuse {

struct Prediction {
    double prob;  // predicted probability of the positive class
    int label;    // ground truth in {0,1}
};

struct Metrics {
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

// Threshold 0.5 (inclusive) converts probabilities to labels. Undefined
// ratios (zero denominators) are reported as 0.
Metrics compute_metrics(const std::vector<Prediction>& predictions);

Metrics metrics_from_counts(size_t tp, size_t fp, size_t fn, size_t tn);

enum class RowSource { paper, artifact };

struct ComparisonRow {
    std::string approach;
    double precision;
    double recall;
    double f_measure;
    RowSource source;
};

// The six results reported for the IR-Plag benchmark, kept verbatim so
// reports never conflate cited numbers with measured ones.
const std::vector<ComparisonRow>& paper_comparison_rows();

enum class TableFormat { markdown, csv };

// Emits the cited rows plus any extra rows, sorted by f-measure ascending
// (stable, so equal scores keep their input order).
std::string compare_table(const std::vector<ComparisonRow>& extra_rows, TableFormat format);

}  // namespace clonefuse
