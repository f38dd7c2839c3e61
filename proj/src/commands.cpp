#include "kgi/commands.hpp"

#include <cstdio>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "kgi/baselines.hpp"
#include "kgi/checkpoint.hpp"
#include "kgi/corpus.hpp"
#include "kgi/errors.hpp"
#include "kgi/evaluation.hpp"
#include "kgi/kgx.hpp"
#include "kgi/lda.hpp"
#include "kgi/pairs.hpp"
#include "kgi/parallel.hpp"
#include "kgi/report.hpp"
#include "kgi/scholar.hpp"
#include "kgi/text.hpp"
#include "kgi/training.hpp"

namespace kgi {

namespace fs = std::filesystem;

OutputLayout OutputLayout::from(const RunConfig& config) {
    const auto& root = config.paths.output_dir;
    OutputLayout l;
    l.pairs_dir = root / "pairs";
    l.pairs_csv = l.pairs_dir / "pairs.csv";
    l.train_pairs_csv = l.pairs_dir / "train_pairs.csv";
    l.test_pairs_csv = l.pairs_dir / "test_pairs.csv";
    l.train_dir = root / "train";
    l.checkpoint = l.train_dir / "checkpoint.kgi";
    l.loss_csv = l.train_dir / "loss.csv";
    l.eval_dir = root / "eval";
    l.report_dir = root / "report";
    return l;
}

ProviderStack::ProviderStack(const RunConfig& config) {
    if (config.features.provider == "service") {
        base_ = std::make_unique<ServiceEmbeddingProvider>(config.features.service);
    } else {
        base_ = std::make_unique<HashEmbeddingProvider>(config.features.dimension, config.features.hash_seed);
    }
    std::optional<fs::path> disk;
    if (config.features.disk_cache) {
        fs::create_directories(config.paths.cache_dir);
        char name[64];
        std::snprintf(name, sizeof name, "embeddings-%016llx.jsonl",
                      static_cast<unsigned long long>(text::fnv1a64(base_->describe())));
        disk = config.paths.cache_dir / name;
    }
    cached_ = std::make_unique<CachedEmbeddingProvider>(*base_, disk);
}

ProviderStack::~ProviderStack() = default;

namespace {

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw Error("missing " + what + ": " + p.string());
}

std::map<std::string, DocumentGraph> require_graphs(const RunConfig& config) {
    require_file(config.paths.graphs_file, "graphs file");
    return load_graphs(config.paths.graphs_file);
}

GraphInputs prepare_inputs(const std::map<std::string, DocumentGraph>& graphs, const std::set<std::string>& ids,
                           EmbeddingProvider& provider, std::size_t jobs) {
    std::vector<const DocumentGraph*> todo;
    for (const auto& id : ids) {
        const auto it = graphs.find(id);
        if (it != graphs.end() && !it->second.is_empty()) todo.push_back(&it->second);
    }
    std::vector<GraphInput> prepared(todo.size());
    parallel_for(todo.size(), jobs, [&](std::size_t i) { prepared[i] = prepare_graph(*todo[i], provider); });
    GraphInputs inputs;
    for (std::size_t i = 0; i < todo.size(); ++i) inputs.emplace(todo[i]->doc_id, std::move(prepared[i]));
    return inputs;
}

std::set<std::string> pair_docs(const std::vector<PairSample>& pairs) {
    std::set<std::string> ids;
    for (const auto& p : pairs) {
        ids.insert(p.doc_a);
        ids.insert(p.doc_b);
    }
    return ids;
}

}  // namespace

int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.ingest.api.base_url.empty()) throw ArgumentError("ingest.api.base_url is not configured");
    ScholarClient client(config.ingest.api);
    Corpus corpus;
    std::map<std::string, std::size_t> per_subject;
    for (const auto& subject : config.ingest.subjects) {
        for (auto& doc : client.fetch_subject(subject, config.ingest.limit_per_subject)) {
            if (corpus.contains(doc.id)) {
                err << "duplicate document " << doc.id << " under subject " << subject << " ignored\n";
                continue;
            }
            ++per_subject[subject];
            corpus.add(std::move(doc));
        }
    }
    corpus.resolve_citations();
    if (corpus.empty()) spdlog::warn("ingest produced an empty corpus");
    fs::create_directories(config.paths.corpus_dir);
    save_corpus(corpus, config.paths.corpus_dir);
    echo_config(config, config.paths.corpus_dir);
    for (const auto& subject : config.ingest.subjects) out << subject << ": " << per_subject[subject] << " documents\n";
    out << "total: " << corpus.size() << " documents\n";
    return 0;
}

namespace {

DocumentGraph extract_document(const RunConfig& config, const Document& doc, LlmClient* client,
                               const PromptTemplate& tmpl) {
    if (config.extraction.mock) {
        const auto triples = mock_extract(doc.text, config.paths.sidecar_dir / (doc.id + ".triples"));
        return assemble_graph(doc.id, {triples});
    }
    const auto plan = chunk_text(doc.text, config.extraction.chunk_size, config.extraction.overlap);
    std::vector<std::vector<Triple>> chunks;
    for (const auto& chunk : chunk_strings(doc.text, plan)) {
        const std::string prompt = build_prompt(chunk, tmpl);
        for (int attempt = 0;; ++attempt) {
            try {
                auto parsed = extract_chunk(*client, prompt);
                if (parsed.dropped) spdlog::debug("{}: dropped {} malformed triples", doc.id, parsed.dropped);
                chunks.push_back(std::move(parsed.triples));
                break;
            } catch (const ExtractionError&) {
                if (attempt >= config.extraction.llm.max_retries) throw;
            }
        }
    }
    return assemble_graph(doc.id, chunks);
}

}  // namespace

int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const Corpus corpus = load_corpus(config.paths.corpus_dir);
    const auto existing = load_graphs(config.paths.graphs_file);
    std::vector<const Document*> todo;
    std::size_t skipped = 0;
    for (const auto& [id, doc] : corpus.documents()) {
        if (existing.count(id)) ++skipped;
        else todo.push_back(&doc);
    }
    out << "skipped: " << skipped << "\n";

    const PromptTemplate tmpl =
        config.extraction.template_path ? PromptTemplate::load(*config.extraction.template_path) : PromptTemplate::bundled();
    std::unique_ptr<LlmClient> client;
    if (!config.extraction.mock) client = std::make_unique<LlmClient>(config.extraction.llm);

    if (config.paths.graphs_file.has_parent_path()) fs::create_directories(config.paths.graphs_file.parent_path());
    echo_config(config, config.paths.graphs_file.parent_path());

    // Results are appended window by window so an interrupted run resumes.
    const std::size_t window = std::max<std::size_t>(16, 4 * config.jobs);
    std::size_t extracted = 0, empty = 0;
    std::vector<std::string> failed;
    for (std::size_t start = 0; start < todo.size(); start += window) {
        const std::size_t n = std::min(window, todo.size() - start);
        std::vector<std::optional<DocumentGraph>> results(n);
        std::vector<std::string> errors(n);
        parallel_for(n, config.jobs, [&](std::size_t i) {
            try {
                results[i] = extract_document(config, *todo[start + i], client.get(), tmpl);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        std::vector<DocumentGraph> done;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& id = todo[start + i]->id;
            if (!results[i]) {
                err << "failed: " << id << ": " << errors[i] << "\n";
                failed.push_back(id);
                continue;
            }
            if (results[i]->is_empty()) {
                err << "empty graph: " << id << "\n";
                ++empty;
            }
            done.push_back(std::move(*results[i]));
        }
        append_graphs(config.paths.graphs_file, done);
        extracted += done.size();
    }
    out << "extracted: " << extracted << "\n";
    out << "empty: " << empty << "\n";
    out << "failed: " << failed.size() << "\n";
    return failed.empty() ? 0 : 1;
}

int cmd_sample_pairs(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const Corpus corpus = load_corpus(config.paths.corpus_dir);
    const auto n_pos = config.sampling.n_positive;
    const auto n_neg = config.sampling.n_negative
                           ? *config.sampling.n_negative
                           : static_cast<std::int64_t>(default_negative_count(static_cast<std::size_t>(n_pos)));
    const auto sampled = sample_pairs(corpus, n_pos, n_neg, config.seed);
    if (sampled.positive_shortfall)
        err << "warning: " << sampled.positive_shortfall << " fewer positive pairs than requested\n";
    if (sampled.negative_shortfall)
        err << "warning: " << sampled.negative_shortfall << " fewer negative pairs than requested\n";
    const auto split = split_pairs(sampled.pairs, config.training.train_fraction, config.seed);

    const auto layout = OutputLayout::from(config);
    write_pairs_csv(layout.pairs_csv, sampled.pairs);
    write_pairs_csv(layout.train_pairs_csv, split.train);
    write_pairs_csv(layout.test_pairs_csv, split.test);
    echo_config(config, layout.pairs_dir);

    std::size_t positives = 0;
    for (const auto& p : sampled.pairs) positives += p.label == PairLabel::Positive;
    out << "pairs: " << sampled.pairs.size() << " (" << positives << " positive, " << sampled.pairs.size() - positives
        << " negative)\n";
    out << "train: " << split.train.size() << ", test: " << split.test.size() << "\n";
    return 0;
}

int cmd_train(const RunConfig& config, bool resume, std::ostream& out, std::ostream& err) {
    const auto layout = OutputLayout::from(config);
    const auto graphs = require_graphs(config);
    require_file(layout.train_pairs_csv, "train pairs");
    require_file(layout.test_pairs_csv, "test pairs");
    PairSplit split{read_pairs_csv(layout.train_pairs_csv), read_pairs_csv(layout.test_pairs_csv)};

    ProviderStack providers(config);
    std::set<std::string> ids = pair_docs(split.train);
    ids.merge(pair_docs(split.test));
    const GraphInputs inputs = prepare_inputs(graphs, ids, providers.provider(), config.jobs);
    providers.flush();

    std::size_t excluded_train = 0, excluded_test = 0;
    split.train = trainable_pairs(inputs, split.train, &excluded_train);
    split.test = trainable_pairs(inputs, split.test, &excluded_test);
    if (excluded_train || excluded_test)
        err << "excluded pairs with missing or empty graphs: " << excluded_train << " train, " << excluded_test
            << " test\n";

    TrainingState state = initial_state(config.encoder, config.training);
    if (resume && fs::exists(layout.checkpoint)) {
        TrainingState saved = load_checkpoint(layout.checkpoint);
        TrainConfig a = saved.train, b = config.training;
        a.epochs = b.epochs = 0;
        a.jobs = b.jobs = 1;
        a.checkpoint_every = b.checkpoint_every = 0;
        if (!(saved.encoder == config.encoder) || !(a == b))
            throw ArgumentError("checkpoint " + layout.checkpoint.string() + " was written with a different configuration");
        saved.train = config.training;
        state = std::move(saved);
        out << "resuming after epoch " << state.epochs_completed << "\n";
    }

    fs::create_directories(layout.train_dir);
    echo_config(config, layout.train_dir);
    const auto sink = [&](const TrainingState& s) {
        save_checkpoint(s, layout.checkpoint);
        write_loss_csv(layout.loss_csv, s.history);
        spdlog::info("epoch {}: train loss {:.6f}", s.epochs_completed, s.history.empty() ? 0.0 : s.history.back().train_loss);
    };
    state = train(inputs, split, std::move(state), sink);
    save_checkpoint(state, layout.checkpoint);
    write_loss_csv(layout.loss_csv, state.history);

    out << "epochs: " << state.epochs_completed << "\n";
    if (!state.history.empty()) {
        out << std::setprecision(6) << "first train loss: " << state.history.front().train_loss << "\n"
            << "final train loss: " << state.history.back().train_loss << "\n";
    }
    return 0;
}

int cmd_evaluate(const RunConfig& config, const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
    if (options.split != "test" && options.split != "train")
        throw ArgumentError("--split must be \"test\" or \"train\"");
    if (options.split == "train" && !options.allow_train_eval)
        throw ArgumentError("refusing to evaluate on training pairs without --allow-train-eval");

    const auto layout = OutputLayout::from(config);
    require_file(layout.checkpoint, "checkpoint");
    const auto pairs_path = options.split == "train" ? layout.train_pairs_csv : layout.test_pairs_csv;
    require_file(pairs_path, options.split + " pairs");
    const Corpus corpus = load_corpus(config.paths.corpus_dir);
    const auto graphs = require_graphs(config);
    const TrainingState state = load_checkpoint(layout.checkpoint);
    if (state.weights.in_dim() != config.features.dimension)
        throw ArgumentError("checkpoint input size does not match features.dimension");

    ProviderStack providers(config);
    auto& provider = providers.provider();

    std::vector<PairSample> pairs;
    std::size_t dropped = 0;
    const auto all_pairs = read_pairs_csv(pairs_path);
    for (const auto& p : all_pairs) {
        const auto ga = graphs.find(p.doc_a), gb = graphs.find(p.doc_b);
        const bool ok = corpus.contains(p.doc_a) && corpus.contains(p.doc_b) && ga != graphs.end() &&
                        gb != graphs.end() && !ga->second.is_empty() && !gb->second.is_empty();
        if (ok) pairs.push_back(p);
        else ++dropped;
    }
    if (dropped) err << "excluded pairs with missing documents or empty graphs: " << dropped << "\n";
    if (pairs.empty()) throw Error("no evaluable pairs in " + pairs_path.string());

    const auto doc_ids = pair_docs(pairs);
    const std::vector<std::string> ids(doc_ids.begin(), doc_ids.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    std::vector<Eigen::VectorXd> kg(ids.size()), docemb(ids.size()), topics(ids.size());
    std::vector<std::string> trimmed(ids.size());
    parallel_for(ids.size(), config.jobs, [&](std::size_t i) {
        const auto& text = corpus.at(ids[i]).text;
        kg[i] = embed_document(state.weights, graphs.at(ids[i]), provider);
        docemb[i] = document_embedding(provider, text, config.baselines.doc_chunk_size);
        trimmed[i] = trim_for_reuse(text);
    });

    std::vector<std::string> lda_texts;
    for (const auto& [id, doc] : corpus.documents()) lda_texts.push_back(doc.text);
    const LdaModel lda = LdaModel::fit(lda_texts, config.baselines.lda);
    fs::create_directories(layout.eval_dir);
    lda.save(layout.eval_dir / "lda_model.json");
    parallel_for(ids.size(), config.jobs, [&](std::size_t i) { topics[i] = lda.infer(corpus.at(ids[i]).text); });
    providers.flush();

    std::vector<RawScore> kg_scores(pairs.size()), reuse_scores(pairs.size()), kl_scores(pairs.size()),
        doc_scores(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t k) {
        const auto& p = pairs[k];
        const std::size_t a = index.at(p.doc_a), b = index.at(p.doc_b);
        kg_scores[k] = {p, cosine_similarity(kg[a], kg[b])};
        reuse_scores[k] = {p, static_cast<double>(text_reuse_score(trimmed[a], trimmed[b], config.baselines.min_ngram).score)};
        kl_scores[k] = {p, kl_score(topics[a], topics[b], config.baselines.kl_direction)};
        doc_scores[k] = {p, cosine_distance(docemb[a], docemb[b])};
    });
    const std::map<Method, const std::vector<RawScore>*> raw{{Method::KgEmbedding, &kg_scores},
                                                             {Method::TextReuse, &reuse_scores},
                                                             {Method::LdaKl, &kl_scores},
                                                             {Method::DocEmbedding, &doc_scores}};

    std::vector<ScoredPairs> scored;
    for (const auto m : kAllMethods) {
        write_scores_csv(layout.eval_dir / ("scores_" + method_name(m) + ".csv"), *raw.at(m));
        scored.push_back(to_scored_pairs(m, *raw.at(m)));
    }
    const auto report = build_report(scored);
    write_report_files(layout.eval_dir, report);
    echo_config(config, layout.eval_dir);
    out << report_csv([&] {
        std::vector<ReportRow> rows;
        for (const auto& m : report.methods) rows.push_back(report_row(m));
        return rows;
    }());
    return 0;
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto layout = OutputLayout::from(config);
    std::vector<ScoredPairs> scored;
    for (const auto m : kAllMethods) {
        const auto path = layout.eval_dir / ("scores_" + method_name(m) + ".csv");
        if (!fs::exists(path)) {
            err << "warning: no scores for " << method_name(m) << " (" << path.string() << ")\n";
            continue;
        }
        scored.push_back(to_scored_pairs(m, read_scores_csv(path)));
    }
    if (scored.empty()) throw Error("no score files in " + layout.eval_dir.string() + "; run evaluate first");
    const auto report = build_report(scored);
    write_report_files(layout.report_dir, report);
    echo_config(config, layout.report_dir);
    std::vector<ReportRow> rows;
    for (const auto& m : report.methods) rows.push_back(report_row(m));
    out << report_csv(rows);
    return 0;
}

}  // namespace kgi
