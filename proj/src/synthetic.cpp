#include "kgi/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "kgi/errors.hpp"
#include "kgi/random.hpp"

namespace kgi {

namespace {

constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "te", "vo", "zu", "pra", "sti", "gor",
                                      "fen", "dal", "qui", "bre", "mon", "tis", "har", "wel", "cyn", "dro", "jas", "ulm"};
constexpr const char* kRelations[] = {"drives", "inhibits", "requires", "produces", "explains", "modulates",
                                      "predicts", "depends on"};

class WordMaker {
public:
    explicit WordMaker(rng::Engine& e) : engine_(e) {}

    std::string fresh() {
        for (;;) {
            std::string w;
            const auto syllables = 2 + rng::uniform_index(engine_, 3);
            for (std::uint64_t i = 0; i < syllables; ++i) w += kSyllables[rng::uniform_index(engine_, std::size(kSyllables))];
            if (used_.insert(w).second) return w;
        }
    }

private:
    rng::Engine& engine_;
    std::set<std::string> used_;
};

struct Motif {
    std::vector<std::string> labels;
    std::vector<Triple> triples;
};

// Concepts pool[order[from]], ..., pool[order[from + size - 1]].
Motif make_motif(const std::vector<std::string>& pool, const std::vector<std::size_t>& order, std::size_t from,
                 rng::Engine& e, std::size_t size) {
    Motif m;
    for (std::size_t i = 0; i < size; ++i) m.labels.push_back(pool[order[from + i]]);
    const auto rel = [&] { return std::string(kRelations[rng::uniform_index(e, std::size(kRelations))]); };
    for (std::size_t i = 0; i + 1 < size; ++i) m.triples.push_back({m.labels[i], rel(), m.labels[i + 1]});
    if (size > 2) m.triples.push_back({m.labels[size - 1], rel(), m.labels[0]});
    if (size > 3) m.triples.push_back({m.labels[0], rel(), m.labels[size / 2]});
    return m;
}

std::string sentence(const Triple& t) { return "The " + t.head + " " + t.relation + " the " + t.tail + ". "; }

Document make_document(const std::string& id, const std::string& subject, const std::vector<Triple>& triples,
                       const std::vector<std::string>& vocabulary, rng::Engine& e) {
    const auto filler = [&](std::size_t min_chars) {
        std::string s;
        while (s.size() < min_chars) {
            for (int w = 0; w < 8; ++w) {
                s += vocabulary[rng::uniform_index(e, vocabulary.size())];
                s += w == 7 ? ". " : " ";
            }
        }
        return s;
    };
    Document d;
    d.id = id;
    d.subject = subject;
    d.text = "Title " + id + ". " + filler(320) + "\n\n";
    for (const auto& t : triples) d.text += sentence(t);
    d.text += "\n\n" + filler(600) + "\n\nReferences. " + filler(2050);
    return d;
}

}  // namespace

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& config) {
    if (config.pairs == 0) throw ArgumentError("synthetic dataset needs at least one pair");
    if (config.motif_size < 2 || config.noise_vocabulary == 0) throw ArgumentError("synthetic motif too small");
    if (config.concept_pool < 2 * config.motif_size)
        throw ArgumentError("synthetic concept pool must hold two disjoint motifs");
    rng::Engine engine(rng::derive(config.seed, 0x53594e));
    WordMaker words(engine);
    std::vector<std::string> vocabulary;
    for (std::size_t i = 0; i < config.noise_vocabulary; ++i) vocabulary.push_back(words.fresh());
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < config.concept_pool; ++i) pool.push_back(words.fresh() + " " + words.fresh());

    const auto positives = static_cast<std::size_t>(std::llround(config.positive_share * static_cast<double>(config.pairs)));
    SyntheticDataset out;
    const auto noisy = [&](const Motif& motif) {
        std::vector<Triple> triples = motif.triples;
        for (std::size_t k = 0; k < config.noise_nodes; ++k) {
            const auto& anchor = motif.labels[rng::uniform_index(engine, motif.labels.size())];
            triples.push_back({anchor, kRelations[rng::uniform_index(engine, std::size(kRelations))],
                               vocabulary[rng::uniform_index(engine, vocabulary.size())]});
        }
        return triples;
    };

    for (std::size_t p = 0; p < config.pairs; ++p) {
        const bool positive = p < positives;
        char buf[32];
        std::snprintf(buf, sizeof buf, "syn%04zu", p);
        const std::string id_a = std::string(buf) + "a";
        const std::string id_b = std::string(buf) + "b";
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng::shuffle(order, engine);
        const Motif motif_a = make_motif(pool, order, 0, engine, config.motif_size);
        const Motif motif_b = positive ? motif_a : make_motif(pool, order, config.motif_size, engine, config.motif_size);
        const auto triples_a = noisy(motif_a);
        const auto triples_b = noisy(motif_b);
        out.graphs.push_back(assemble_graph(id_a, {triples_a}));
        out.graphs.push_back(assemble_graph(id_b, {triples_b}));

        Document da = make_document(id_a, config.subject, triples_a, vocabulary, engine);
        Document db = make_document(id_b, config.subject, triples_b, vocabulary, engine);
        if (positive) da.cites.insert(id_b);
        out.corpus.add(std::move(da));
        out.corpus.add(std::move(db));
        out.pairs.push_back(make_pair_sample(id_a, id_b, positive ? PairLabel::Positive : PairLabel::Negative,
                                             config.subject));
    }
    return out;
}

void write_sidecars(const std::vector<DocumentGraph>& graphs, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& g : graphs) {
        std::ofstream out(dir / (g.doc_id + ".triples"), std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write sidecar for " + g.doc_id);
        out << "# " << g.doc_id << "\n";
        for (const auto& t : graph_triples(g)) out << t.head << '|' << t.relation << '|' << t.tail << '\n';
    }
}

}  // namespace kgi
