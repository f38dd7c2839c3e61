#include "kgi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "kgi/errors.hpp"

namespace kgi {

std::string method_name(Method m) {
    switch (m) {
        case Method::KgEmbedding: return "kg_embedding";
        case Method::TextReuse: return "text_reuse";
        case Method::LdaKl: return "lda_kl";
        case Method::DocEmbedding: return "doc_embedding";
    }
    return "unknown";
}

Method parse_method(std::string_view s) {
    for (const auto m : kAllMethods) {
        if (method_name(m) == s) return m;
    }
    throw ArgumentError("unknown method '" + std::string(s) + "'");
}

double oriented_score(Method m, double raw) {
    switch (m) {
        case Method::KgEmbedding:
        case Method::TextReuse: return raw;
        case Method::LdaKl:
        case Method::DocEmbedding: return -raw;
    }
    return raw;
}

std::vector<double> ScoredPairs::positives() const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.label == PairLabel::Positive) out.push_back(e.score);
    }
    return out;
}

std::vector<double> ScoredPairs::negatives() const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.label == PairLabel::Negative) out.push_back(e.score);
    }
    return out;
}

namespace {

void check_groups(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) throw ArgumentError("metrics need at least one positive and one negative score");
    for (const auto* group : {&pos, &neg}) {
        for (const double v : *group) {
            if (!std::isfinite(v)) throw NumericError("non-finite score");
        }
    }
}

constexpr double kExactBudget = 2e8;

// -log10 of the upper normal tail P(Z >= z).
double neg_log10_upper_tail(double z) {
    const double x = z / std::numbers::sqrt2;
    if (x < 26.0) return -std::log10(0.5 * std::erfc(x));
    // erfc(x) ~ exp(-x^2) / (x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6))
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
    const double ln_p = std::log(0.5) - x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series);
    return -ln_p / std::numbers::ln10;
}

}  // namespace

RankSumResult rank_sum_test(const std::vector<double>& pos, const std::vector<double>& neg, PValueMethod method) {
    check_groups(pos, neg);
    const std::size_t n1 = pos.size(), n2 = neg.size(), N = n1 + n2;

    std::vector<std::pair<double, bool>> all;
    all.reserve(N);
    for (const double v : pos) all.emplace_back(v, true);
    for (const double v : neg) all.emplace_back(v, false);
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    // Doubled midranks keep tied ranks integral.
    std::vector<std::uint64_t> rank2(N);
    std::uint64_t pos_rank2 = 0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < N;) {
        std::size_t j = i;
        while (j < N && all[j].first == all[i].first) ++j;
        const std::uint64_t r2 = (i + 1) + j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) {
            rank2[k] = r2;
            if (all[k].second) pos_rank2 += r2;
        }
        i = j;
    }

    RankSumResult res;
    const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2), dN = static_cast<double>(N);
    res.u = static_cast<double>(pos_rank2) / 2.0 - d1 * (d1 + 1.0) / 2.0;
    if (all.front().first == all.back().first) {
        res.degenerate = true;
        res.p = 0.5;
        res.neg_log10_p = -std::log10(0.5);
        return res;
    }

    const double k = static_cast<double>(std::min(n1, n2));
    const bool affordable = 2.0 * k * k * dN * dN <= kExactBudget;
    bool exact = method == PValueMethod::Exact;
    if (method == PValueMethod::Auto) exact = n1 * n2 <= 20 || (std::min(n1, n2) <= 8 && affordable);
    if (exact && !affordable && method == PValueMethod::Exact)
        throw ArgumentError("exact rank-sum enumeration too large for these group sizes");

    if (exact) {
        // Distribution of the doubled rank sum of the smaller group.
        const bool track_pos = n1 <= n2;
        const std::size_t kk = track_pos ? n1 : n2;
        const std::size_t max_sum = 2 * N * kk;
        std::vector<std::vector<long double>> ways(kk + 1, std::vector<long double>(max_sum + 1, 0.0L));
        ways[0][0] = 1.0L;
        for (std::size_t i = 0; i < N; ++i) {
            const auto r = rank2[i];
            for (std::size_t j = std::min(i + 1, kk); j >= 1; --j) {
                auto& dst = ways[j];
                const auto& src = ways[j - 1];
                for (std::size_t s = max_sum - r + 1; s-- > 0;) {
                    if (src[s] != 0.0L) dst[s + r] += src[s];
                }
            }
        }
        const auto& dist = ways[kk];
        long double total = 0.0L, tail = 0.0L;
        const std::uint64_t total_rank2 = static_cast<std::uint64_t>(N) * (N + 1);
        for (std::size_t s = 0; s <= max_sum; ++s) {
            if (dist[s] == 0.0L) continue;
            total += dist[s];
            const bool in_tail = track_pos ? s >= pos_rank2 : s <= total_rank2 - pos_rank2;
            if (in_tail) tail += dist[s];
        }
        res.exact = true;
        res.p = static_cast<double>(tail / total);
        res.neg_log10_p = res.p >= 1.0 ? 0.0 : -std::log10(res.p);
        return res;
    }

    const double mu = d1 * d2 / 2.0;
    const double var = d1 * d2 / 12.0 * ((dN + 1.0) - tie_term / (dN * (dN - 1.0)));
    if (!(var > 0.0)) {
        res.degenerate = true;
        res.p = 0.5;
        res.neg_log10_p = -std::log10(0.5);
        return res;
    }
    const double z = (res.u - mu - 0.5) / std::sqrt(var);
    res.p = 0.5 * std::erfc(z / std::numbers::sqrt2);
    res.neg_log10_p = neg_log10_upper_tail(z);
    return res;
}

RocCurve roc_curve(const std::vector<double>& pos, const std::vector<double>& neg) {
    check_groups(pos, neg);
    std::vector<std::pair<double, bool>> all;
    for (const double v : pos) all.emplace_back(v, true);
    for (const double v : neg) all.emplace_back(v, false);
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first > r.first; });

    const auto np = static_cast<std::uint64_t>(pos.size());
    const auto nn = static_cast<std::uint64_t>(neg.size());
    RocCurve roc;
    roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::uint64_t tp = 0, fp = 0;
    // Twice the area in units of one (pos, neg) cell; exact in integers.
    std::uint64_t area2 = 0;
    for (std::size_t i = 0; i < all.size();) {
        const double s = all[i].first;
        std::uint64_t dtp = 0, dfp = 0;
        for (; i < all.size() && all[i].first == s; ++i) (all[i].second ? dtp : dfp) += 1;
        area2 += dfp * (2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        roc.points.push_back({static_cast<double>(fp) / static_cast<double>(nn),
                              static_cast<double>(tp) / static_cast<double>(np), s});
    }
    roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(np) * static_cast<double>(nn));
    return roc;
}

double auc_pairwise(const std::vector<double>& pos, const std::vector<double>& neg) {
    check_groups(pos, neg);
    double wins = 0.0;
    for (const double p : pos) {
        for (const double n : neg) {
            if (p > n) wins += 1.0;
            else if (p == n) wins += 0.5;
        }
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

ThresholdChoice classify_at(double threshold, const std::vector<double>& pos, const std::vector<double>& neg) {
    std::size_t tp = 0, fp = 0;
    for (const double v : pos) tp += v >= threshold;
    for (const double v : neg) fp += v >= threshold;
    ThresholdChoice c;
    c.threshold = threshold;
    c.recall = pos.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(pos.size());
    c.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    c.f1 = tp == 0 ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    return c;
}

ThresholdChoice optimal_threshold(const RocCurve& roc, const std::vector<double>& pos, const std::vector<double>& neg) {
    check_groups(pos, neg);
    if (roc.points.size() < 2) throw ArgumentError("ROC curve has no finite thresholds");
    const auto np = static_cast<double>(pos.size());
    const auto nn = static_cast<double>(neg.size());
    // Compare J on integer counts so exact ties stay ties.
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    double threshold = roc.points[1].threshold;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        const auto tp = static_cast<std::int64_t>(std::llround(roc.points[i].tpr * np));
        const auto fp = static_cast<std::int64_t>(std::llround(roc.points[i].fpr * nn));
        const std::int64_t j = tp * static_cast<std::int64_t>(neg.size()) - fp * static_cast<std::int64_t>(pos.size());
        if (j > best) {
            best = j;
            threshold = roc.points[i].threshold;
        }
    }
    return classify_at(threshold, pos, neg);
}

ThresholdChoice max_f1_threshold(const std::vector<double>& pos, const std::vector<double>& neg) {
    check_groups(pos, neg);
    std::set<double, std::greater<>> thresholds(pos.begin(), pos.end());
    thresholds.insert(neg.begin(), neg.end());
    ThresholdChoice best;
    best.f1 = -1.0;
    for (const double t : thresholds) {
        const auto c = classify_at(t, pos, neg);
        if (c.f1 > best.f1) best = c;
    }
    return best;
}

EvaluationReport build_report(const std::vector<ScoredPairs>& scored) {
    if (scored.empty()) throw ArgumentError("no methods to report");
    const auto key_set = [](const ScoredPairs& s) {
        std::map<std::string, PairLabel> keys;
        for (const auto& e : s.entries) {
            if (!keys.emplace(e.pair_id, e.label).second)
                throw ArgumentError("method " + s.method + " scored pair " + e.pair_id + " twice");
        }
        return keys;
    };
    const auto reference = key_set(scored.front());
    EvaluationReport report;
    for (const auto& s : scored) {
        if (key_set(s) != reference)
            throw ArgumentError("method " + s.method + " scored a different pair set than " + scored.front().method);
        const auto pos = s.positives();
        const auto neg = s.negatives();
        MethodReport m;
        m.method = s.method;
        m.rank_sum = rank_sum_test(pos, neg);
        m.roc = roc_curve(pos, neg);
        m.chosen = optimal_threshold(m.roc, pos, neg);
        m.f1_maxsweep = max_f1_threshold(pos, neg).f1;
        report.methods.push_back(std::move(m));
    }
    return report;
}

}  // namespace kgi
