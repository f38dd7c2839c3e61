#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgi/evaluation.hpp"

namespace kgi {

// One line of report.csv.
struct ReportRow {
    std::string method;
    double u_stat = 0.0;
    double neg_log10_p = 0.0;
    double auc = 0.0;
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f1_maxsweep = 0.0;

    bool operator==(const ReportRow&) const = default;
};

ReportRow report_row(const MethodReport& m);

// Numbers are written with 12 significant digits.
std::string report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& content);

void write_report_csv(const std::filesystem::path& path, const EvaluationReport& report);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

// roc_<method>.csv with columns fpr,tpr,threshold.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);

// Every method's curve over the chance diagonal, as a standalone SVG.
std::string roc_svg(const EvaluationReport& report);

// Writes report.csv, one roc_<method>.csv per method and roc.svg into dir.
void write_report_files(const std::filesystem::path& dir, const EvaluationReport& report);

// Raw per-method scores: doc_a,doc_b,label,score.
struct RawScore {
    PairSample pair;
    double score = 0.0;
};

void write_scores_csv(const std::filesystem::path& path, const std::vector<RawScore>& scores);
std::vector<RawScore> read_scores_csv(const std::filesystem::path& path);

// Orients raw scores for evaluation.
ScoredPairs to_scored_pairs(Method method, const std::vector<RawScore>& scores);

}  // namespace kgi
