#include "kgi/lda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "kgi/errors.hpp"
#include "kgi/random.hpp"
#include "kgi/text.hpp"

namespace kgi {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

const std::set<std::string, std::less<>>& stopwords() {
    static const std::set<std::string, std::less<>> words{
        "a",       "about",   "above",  "after",   "again",   "against", "all",     "also",   "am",      "an",
        "and",     "any",     "are",    "as",      "at",      "be",      "because", "been",   "before",  "being",
        "below",   "between", "both",   "but",     "by",      "can",     "could",   "did",    "do",      "does",
        "doing",   "down",    "during", "each",    "et",      "few",     "for",     "from",   "further", "had",
        "has",     "have",    "having", "he",      "her",     "here",    "hers",    "herself", "him",    "himself",
        "his",     "how",     "however", "i",      "if",      "in",      "into",    "is",     "it",      "its",
        "itself",  "may",     "me",     "might",   "more",    "most",    "must",    "my",     "myself",  "no",
        "nor",     "not",     "of",     "off",     "on",      "once",    "one",     "only",   "or",      "other",
        "our",     "ours",    "ourselves", "out",  "over",    "own",     "same",    "she",    "should",  "so",
        "some",    "such",    "than",   "that",    "the",     "their",   "theirs",  "them",   "themselves", "then",
        "there",   "these",   "they",   "this",    "those",   "through", "thus",    "to",     "too",     "under",
        "until",   "up",      "upon",   "us",      "very",    "was",     "we",      "were",   "what",    "when",
        "where",   "whether", "which",  "while",   "who",     "whom",    "why",     "will",   "with",    "within",
        "without", "would",   "you",    "your",    "yours",   "yourself", "yourselves"};
    return words;
}

std::size_t sample_topic(std::vector<double>& weights, rng::Engine& engine) {
    double total = 0.0;
    for (auto& w : weights) {
        total += w;
        w = total;
    }
    const double u = rng::uniform01(engine) * total;
    const auto it = std::upper_bound(weights.begin(), weights.end(), u);
    return std::min(static_cast<std::size_t>(it - weights.begin()), weights.size() - 1);
}

}  // namespace

void LdaConfig::validate() const {
    if (topics < 2) throw ArgumentError("LDA needs at least two topics");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ArgumentError("LDA alpha and beta must be positive");
    if (train_sweeps == 0 || infer_sweeps == 0) throw ArgumentError("LDA sweep counts must be positive");
}

std::vector<std::string> lda_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : text::tokenize_words(text)) {
        if (t.word.size() < 2) continue;
        if (std::all_of(t.word.begin(), t.word.end(), [](unsigned char c) { return c >= '0' && c <= '9'; })) continue;
        if (stopwords().count(t.word)) continue;
        out.push_back(std::move(t.word));
    }
    return out;
}

LdaModel LdaModel::fit(const std::vector<std::string>& texts, const LdaConfig& config) {
    config.validate();
    std::vector<std::vector<std::string>> docs;
    std::set<std::string> words;
    for (const auto& t : texts) {
        docs.push_back(lda_tokens(t));
        words.insert(docs.back().begin(), docs.back().end());
    }
    if (words.empty()) throw ArgumentError("LDA vocabulary is empty");

    LdaModel m;
    m.config_ = config;
    m.vocab_.assign(words.begin(), words.end());
    std::unordered_map<std::string_view, std::uint32_t> index;
    for (std::size_t w = 0; w < m.vocab_.size(); ++w) index.emplace(m.vocab_[w], static_cast<std::uint32_t>(w));

    const std::size_t K = config.topics;
    const std::size_t V = m.vocab_.size();
    m.counts_.assign(V * K, 0);
    m.totals_.assign(K, 0);

    rng::Engine engine(rng::derive(config.seed, 0x4c4441));
    std::vector<std::vector<std::uint32_t>> ids(docs.size());
    std::vector<std::vector<std::uint32_t>> z(docs.size());
    std::vector<std::vector<std::uint32_t>> doc_topic(docs.size(), std::vector<std::uint32_t>(K, 0));
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& w : docs[d]) {
            const auto wid = index.at(w);
            const auto k = static_cast<std::uint32_t>(rng::uniform_index(engine, K));
            ids[d].push_back(wid);
            z[d].push_back(k);
            ++doc_topic[d][k];
            ++m.counts_[wid * K + k];
            ++m.totals_[k];
        }
    }

    const double vbeta = static_cast<double>(V) * config.beta;
    std::vector<double> weights(K);
    for (std::size_t sweep = 0; sweep < config.train_sweeps; ++sweep) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            auto& ndk = doc_topic[d];
            for (std::size_t i = 0; i < ids[d].size(); ++i) {
                const auto w = ids[d][i];
                const auto old = z[d][i];
                --ndk[old];
                --m.counts_[w * K + old];
                --m.totals_[old];
                const std::uint32_t* nkw = &m.counts_[w * K];
                for (std::size_t k = 0; k < K; ++k) {
                    weights[k] = (ndk[k] + config.alpha) * (nkw[k] + config.beta) /
                                 (static_cast<double>(m.totals_[k]) + vbeta);
                }
                const auto k = static_cast<std::uint32_t>(sample_topic(weights, engine));
                z[d][i] = k;
                ++ndk[k];
                ++m.counts_[w * K + k];
                ++m.totals_[k];
            }
        }
    }
    return m;
}

Eigen::VectorXd LdaModel::infer(std::string_view text) const {
    const std::size_t K = config_.topics;
    const std::size_t V = vocab_.size();
    std::vector<std::uint32_t> ids;
    for (const auto& w : lda_tokens(text)) {
        const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), w);
        if (it != vocab_.end() && *it == w) ids.push_back(static_cast<std::uint32_t>(it - vocab_.begin()));
    }
    Eigen::VectorXd theta(static_cast<Eigen::Index>(K));
    if (ids.empty()) {
        theta.setConstant(1.0 / static_cast<double>(K));
        return theta;
    }

    rng::Engine engine(rng::derive(config_.seed, text::fnv1a64(text)));
    const double vbeta = static_cast<double>(V) * config_.beta;
    std::vector<std::uint32_t> z(ids.size());
    std::vector<std::uint32_t> ndk(K, 0);
    for (auto& k : z) {
        k = static_cast<std::uint32_t>(rng::uniform_index(engine, K));
        ++ndk[k];
    }
    std::vector<double> weights(K);
    for (std::size_t sweep = 0; sweep < config_.infer_sweeps; ++sweep) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            --ndk[z[i]];
            const std::uint32_t* nkw = &counts_[ids[i] * K];
            for (std::size_t k = 0; k < K; ++k) {
                weights[k] = (ndk[k] + config_.alpha) * (nkw[k] + config_.beta) /
                             (static_cast<double>(totals_[k]) + vbeta);
            }
            z[i] = static_cast<std::uint32_t>(sample_topic(weights, engine));
            ++ndk[z[i]];
        }
    }
    for (std::size_t k = 0; k < K; ++k) theta[static_cast<Eigen::Index>(k)] = ndk[k] + config_.alpha;
    theta /= theta.sum();
    return theta;
}

void LdaModel::save(const std::filesystem::path& path) const {
    json j;
    j["format"] = "kgi-lda";
    j["version"] = kFormatVersion;
    j["config"] = {{"topics", config_.topics},           {"alpha", config_.alpha},
                   {"beta", config_.beta},               {"train_sweeps", config_.train_sweeps},
                   {"infer_sweeps", config_.infer_sweeps}, {"seed", config_.seed}};
    j["vocabulary"] = vocab_;
    // Sparse per-topic counts: [[word, count], ...]
    const std::size_t K = config_.topics;
    json topics = json::array();
    for (std::size_t k = 0; k < K; ++k) {
        json row = json::array();
        for (std::size_t w = 0; w < vocab_.size(); ++w) {
            if (const auto c = counts_[w * K + k]) row.push_back({w, c});
        }
        topics.push_back(std::move(row));
    }
    j["topic_word"] = std::move(topics);

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write LDA model " + path.string());
        out << j.dump() << '\n';
        if (!out) throw Error("cannot write LDA model " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

LdaModel LdaModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open LDA model " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("LDA model " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "kgi-lda") throw ParseError("not an LDA model: " + path.string(), "format");
        if (j.at("version").get<int>() != kFormatVersion) throw ParseError("unsupported LDA model version", "version");
        LdaModel m;
        const auto& c = j.at("config");
        m.config_.topics = c.at("topics").get<std::size_t>();
        m.config_.alpha = c.at("alpha").get<double>();
        m.config_.beta = c.at("beta").get<double>();
        m.config_.train_sweeps = c.at("train_sweeps").get<std::size_t>();
        m.config_.infer_sweeps = c.at("infer_sweeps").get<std::size_t>();
        m.config_.seed = c.at("seed").get<std::uint64_t>();
        m.config_.validate();
        m.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
        if (m.vocab_.empty() || !std::is_sorted(m.vocab_.begin(), m.vocab_.end()))
            throw ParseError("LDA vocabulary must be sorted and non-empty", "vocabulary");
        const std::size_t K = m.config_.topics;
        const auto& rows = j.at("topic_word");
        if (rows.size() != K) throw ParseError("LDA topic count mismatch", "topic_word");
        m.counts_.assign(m.vocab_.size() * K, 0);
        m.totals_.assign(K, 0);
        for (std::size_t k = 0; k < K; ++k) {
            for (const auto& entry : rows[k]) {
                const auto w = entry.at(0).get<std::size_t>();
                const auto count = entry.at(1).get<std::uint32_t>();
                if (w >= m.vocab_.size()) throw ParseError("LDA word index out of range", "topic_word");
                m.counts_[w * K + k] = count;
                m.totals_[k] += count;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError("LDA model " + path.string() + ": " + e.what());
    }
}

}  // namespace kgi
