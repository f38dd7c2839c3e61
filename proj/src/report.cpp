#include "kgi/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgi/csv.hpp"
#include "kgi/errors.hpp"

namespace kgi {

namespace {

const std::vector<std::string> kReportHeader{"method",    "u_stat", "neg_log10_p", "auc", "threshold",
                                             "precision", "recall", "f1",          "f1_maxsweep"};
const std::vector<std::string> kScoresHeader{"doc_a", "doc_b", "label", "score"};

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

ReportRow report_row(const MethodReport& m) {
    return {m.method,           m.rank_sum.u,        m.rank_sum.neg_log10_p, m.roc.auc,    m.chosen.threshold,
            m.chosen.precision, m.chosen.recall,     m.chosen.f1,            m.f1_maxsweep};
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::string out = csv::join(kReportHeader) + "\n";
    for (const auto& r : rows) {
        out += csv::join({r.method, csv::format_double12(r.u_stat), csv::format_double12(r.neg_log10_p),
                          csv::format_double12(r.auc), csv::format_double12(r.threshold),
                          csv::format_double12(r.precision), csv::format_double12(r.recall),
                          csv::format_double12(r.f1), csv::format_double12(r.f1_maxsweep)});
        out += "\n";
    }
    return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    std::vector<ReportRow> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (header) {
            if (f != kReportHeader) throw ParseError("unexpected report header", "header");
            header = false;
            continue;
        }
        if (f.size() != kReportHeader.size()) throw ParseError("report row has wrong field count", f.empty() ? "" : f[0]);
        rows.push_back({f[0], csv::parse_double(f[1]), csv::parse_double(f[2]), csv::parse_double(f[3]),
                        csv::parse_double(f[4]), csv::parse_double(f[5]), csv::parse_double(f[6]),
                        csv::parse_double(f[7]), csv::parse_double(f[8])});
    }
    if (header) throw ParseError("report is empty", "header");
    return rows;
}

void write_report_csv(const std::filesystem::path& path, const EvaluationReport& report) {
    std::vector<ReportRow> rows;
    for (const auto& m : report.methods) rows.push_back(report_row(m));
    write_text(path, report_csv(rows));
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_report_csv(ss.str());
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
    std::vector<std::vector<std::string>> rows{{"fpr", "tpr", "threshold"}};
    for (const auto& p : roc.points)
        rows.push_back({csv::format_double(p.fpr), csv::format_double(p.tpr), csv::format_double(p.threshold)});
    csv::write_file(path, rows);
}

std::string roc_svg(const EvaluationReport& report) {
    constexpr double size = 400.0, margin = 50.0;
    constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const auto x = [&](double fpr) { return margin + fpr * size; };
    const auto y = [&](double tpr) { return margin + (1.0 - tpr) * size; };
    char buf[128];
    std::string svg;
    std::snprintf(buf, sizeof buf, R"(<svg xmlns="http://www.w3.org/2000/svg" width="%g" height="%g">)",
                  size + 2 * margin + 160, size + 2 * margin);
    svg += buf;
    svg += "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, R"(<rect x="%g" y="%g" width="%g" height="%g" fill="none" stroke="black"/>)",
                  margin, margin, size, size);
    svg += buf;
    svg += "\n";
    std::snprintf(buf, sizeof buf,
                  R"(<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="gray" stroke-dasharray="4 4"/>)", x(0), y(0),
                  x(1), y(1));
    svg += buf;
    svg += "\n";
    std::snprintf(buf, sizeof buf, R"(<text x="%g" y="%g" text-anchor="middle" font-size="12">FPR</text>)",
                  margin + size / 2, size + margin + 35);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  R"svg(<text x="15" y="%g" text-anchor="middle" font-size="12" transform="rotate(-90 15 %g)">TPR</text>)svg",
                  margin + size / 2, margin + size / 2);
    svg += buf;
    svg += "\n";
    for (std::size_t i = 0; i < report.methods.size(); ++i) {
        const auto& m = report.methods[i];
        const char* color = colors[i % std::size(colors)];
        svg += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + std::string(color) + "\" points=\"";
        for (const auto& p : m.roc.points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x(p.fpr), y(p.tpr));
            svg += buf;
        }
        svg += "\"/>\n";
        std::snprintf(buf, sizeof buf, R"(<text x="%g" y="%g" font-size="12" fill="%s">)", size + margin + 10,
                      margin + 15 + 18 * static_cast<double>(i), color);
        svg += buf;
        std::snprintf(buf, sizeof buf, " (AUC %.3f)</text>\n", m.roc.auc);
        svg += m.method + buf;
    }
    svg += "</svg>\n";
    return svg;
}

void write_report_files(const std::filesystem::path& dir, const EvaluationReport& report) {
    std::filesystem::create_directories(dir);
    write_report_csv(dir / "report.csv", report);
    for (const auto& m : report.methods) write_roc_csv(dir / ("roc_" + m.method + ".csv"), m.roc);
    write_text(dir / "roc.svg", roc_svg(report));
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<RawScore>& scores) {
    std::vector<std::vector<std::string>> rows{kScoresHeader};
    for (const auto& s : scores)
        rows.push_back({s.pair.doc_a, s.pair.doc_b, to_string(s.pair.label), csv::format_double(s.score)});
    csv::write_file(path, rows);
}

std::vector<RawScore> read_scores_csv(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows.front() != kScoresHeader) throw ParseError("bad scores header in " + path.string(), "header");
    std::vector<RawScore> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw ParseError("scores row " + std::to_string(i) + " has wrong field count", path.string());
        RawScore s;
        s.pair = make_pair_sample(r[0], r[1], parse_label(r[2]), "");
        s.score = csv::parse_double(r[3]);
        out.push_back(std::move(s));
    }
    return out;
}

ScoredPairs to_scored_pairs(Method method, const std::vector<RawScore>& scores) {
    ScoredPairs sp;
    sp.method = method_name(method);
    for (const auto& s : scores) sp.entries.push_back({pair_id(s.pair), s.pair.label, oriented_score(method, s.score)});
    return sp;
}

}  // namespace kgi
