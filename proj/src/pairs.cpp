#include "kgi/pairs.hpp"

#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "kgi/csv.hpp"
#include "kgi/errors.hpp"
#include "kgi/random.hpp"

namespace kgi {

std::string to_string(PairLabel label) { return label == PairLabel::Positive ? "positive" : "negative"; }

PairLabel parse_label(std::string_view s) {
    if (s == "positive" || s == "1") return PairLabel::Positive;
    if (s == "negative" || s == "0") return PairLabel::Negative;
    throw ParseError("unknown pair label '" + std::string(s) + "'", "label");
}

PairSample make_pair_sample(std::string a, std::string b, PairLabel label, std::string subject) {
    if (a == b) throw ArgumentError("a pair needs two distinct documents ('" + a + "')");
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b), label, std::move(subject)};
}

std::string pair_id(const PairSample& p) { return p.doc_a + "|" + p.doc_b; }

std::size_t default_negative_count(std::size_t positives) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(positives) * kNegativesPerPositive));
}

PairSampling sample_pairs(const Corpus& corpus, std::int64_t n_positive, std::int64_t n_negative, std::uint64_t seed) {
    if (n_positive < 0 || n_negative < 0) throw ArgumentError("pair counts must be non-negative");
    std::vector<PairSample> positives;
    std::vector<PairSample> negatives;
    bool any_subject_pair = false;
    for (const auto& subject : corpus.subjects()) {
        const auto ids = corpus.ids_in_subject(subject);  // sorted
        any_subject_pair = any_subject_pair || ids.size() >= 2;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                const bool linked = citation_exists(corpus, ids[i], ids[j]);
                (linked ? positives : negatives)
                    .push_back({ids[i], ids[j], linked ? PairLabel::Positive : PairLabel::Negative, subject});
            }
        }
    }
    if (!any_subject_pair && (n_positive > 0 || n_negative > 0)) {
        throw ArgumentError("no subject has two or more documents to pair");
    }

    PairSampling out;
    const auto draw = [&](std::vector<PairSample>& pool, std::size_t want, std::uint64_t tag, std::size_t& shortfall,
                          const char* name) {
        rng::Engine engine(rng::derive(seed, tag));
        // partial Fisher-Yates: the first `take` slots become the sample
        const std::size_t take = std::min(want, pool.size());
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(rng::uniform_index(engine, pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        if (take < want) {
            shortfall = want - take;
            spdlog::warn("requested {} {} pairs, only {} available", want, name, pool.size());
        }
        for (std::size_t i = 0; i < take; ++i) out.pairs.push_back(std::move(pool[i]));
    };
    draw(positives, static_cast<std::size_t>(n_positive), 1, out.positive_shortfall, "positive");
    draw(negatives, static_cast<std::size_t>(n_negative), 2, out.negative_shortfall, "negative");
    return out;
}

PairSplit split_pairs(const std::vector<PairSample>& pairs, double train_fraction, std::uint64_t seed) {
    if (pairs.empty()) throw ArgumentError("cannot split an empty pair set");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train fraction must lie in (0, 1)");

    std::vector<PairSample> strata[2];
    for (const auto& p : pairs) strata[static_cast<int>(p.label)].push_back(p);

    const auto total_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pairs.size())));
    std::size_t take[2];
    double remainder[2];
    std::size_t assigned = 0;
    for (int s = 0; s < 2; ++s) {
        const double exact = train_fraction * static_cast<double>(strata[s].size());
        take[s] = static_cast<std::size_t>(std::floor(exact));
        remainder[s] = exact - static_cast<double>(take[s]);
        assigned += take[s];
    }
    while (assigned < total_train) {
        int s = -1;
        // positive stratum wins ties
        for (int k = 1; k >= 0; --k) {
            if (take[k] < strata[k].size() && (s < 0 || remainder[k] > remainder[s])) s = k;
        }
        if (s < 0) break;
        ++take[s];
        remainder[s] = -1.0;
        ++assigned;
    }

    PairSplit split;
    for (int s = 1; s >= 0; --s) {
        rng::Engine engine(rng::derive(seed, 100 + static_cast<std::uint64_t>(s)));
        rng::shuffle(strata[s], engine);
        for (std::size_t i = 0; i < strata[s].size(); ++i) {
            (i < take[s] ? split.train : split.test).push_back(std::move(strata[s][i]));
        }
    }
    return split;
}

void write_pairs_csv(const std::filesystem::path& path, const std::vector<PairSample>& pairs) {
    std::vector<std::vector<std::string>> rows{{"doc_a", "doc_b", "label", "subject"}};
    for (const auto& p : pairs) rows.push_back({p.doc_a, p.doc_b, to_string(p.label), p.subject});
    csv::write_file(path, rows);
}

std::vector<PairSample> read_pairs_csv(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"doc_a", "doc_b", "label", "subject"}) {
        throw ParseError(path.string() + ": expected header doc_a,doc_b,label,subject");
    }
    std::vector<PairSample> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 4) throw ParseError(path.string() + ": row " + std::to_string(i) + " has " +
                                                  std::to_string(rows[i].size()) + " fields");
        out.push_back(make_pair_sample(rows[i][0], rows[i][1], parse_label(rows[i][2]), rows[i][3]));
    }
    return out;
}

}  // namespace kgi
