#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kgi/pairs.hpp"

namespace kgi {

enum class Method { KgEmbedding, TextReuse, LdaKl, DocEmbedding };

inline constexpr Method kAllMethods[] = {Method::KgEmbedding, Method::TextReuse, Method::LdaKl,
                                         Method::DocEmbedding};

std::string method_name(Method m);  // kg_embedding, text_reuse, lda_kl, doc_embedding
Method parse_method(std::string_view s);

// Maps a method's raw score onto "higher = more similar". Divergences and
// distances are negated; similarities and counts pass through.
double oriented_score(Method m, double raw);

struct ScoredEntry {
    std::string pair_id;
    PairLabel label = PairLabel::Negative;
    double score = 0.0;  // oriented

    bool operator==(const ScoredEntry&) const = default;
};

struct ScoredPairs {
    std::string method;
    std::vector<ScoredEntry> entries;

    std::vector<double> positives() const;
    std::vector<double> negatives() const;
};

enum class PValueMethod { Auto, Exact, Normal };

struct RankSumResult {
    double u = 0.0;           // Mann-Whitney U of the positive group (midranks)
    double p = 1.0;           // one-sided, positives higher
    double neg_log10_p = 0.0;
    bool exact = false;
    bool degenerate = false;  // every score identical; p fixed at 0.5
};

// Auto uses the exact permutation distribution of the midrank sum when
// n1*n2 <= 20, and also when the smaller group has at most eight members
// and the enumeration is affordable. Otherwise it uses the normal
// approximation with tie-corrected variance and continuity correction.
RankSumResult rank_sum_test(const std::vector<double>& pos, const std::vector<double>& neg,
                            PValueMethod method = PValueMethod::Auto);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // +inf for the (0, 0) anchor

    bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// One vertex per distinct score, thresholds descending, trapezoid AUC.
RocCurve roc_curve(const std::vector<double>& pos, const std::vector<double>& neg);

// [#(pos > neg) + 0.5 #(pos == neg)] / (n+ n-), by direct comparison.
double auc_pairwise(const std::vector<double>& pos, const std::vector<double>& neg);

struct ThresholdChoice {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// A pair is predicted positive iff score >= threshold.
ThresholdChoice classify_at(double threshold, const std::vector<double>& pos, const std::vector<double>& neg);

// The ROC vertex maximizing Youden's J = TPR - FPR; ties go to the higher
// threshold.
ThresholdChoice optimal_threshold(const RocCurve& roc, const std::vector<double>& pos, const std::vector<double>& neg);

// Best F1 over every distinct score used as a threshold.
ThresholdChoice max_f1_threshold(const std::vector<double>& pos, const std::vector<double>& neg);

struct MethodReport {
    std::string method;
    RankSumResult rank_sum;
    RocCurve roc;
    ThresholdChoice chosen;
    double f1_maxsweep = 0.0;
};

struct EvaluationReport {
    std::vector<MethodReport> methods;  // in input order
};

// Every method must have scored the same labeled pair set.
EvaluationReport build_report(const std::vector<ScoredPairs>& scored);

}  // namespace kgi
