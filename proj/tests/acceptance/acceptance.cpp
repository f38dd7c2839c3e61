// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Usage: kgi_acceptance <work dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "kgi/baselines.hpp"
#include "kgi/checkpoint.hpp"
#include "kgi/commands.hpp"
#include "kgi/corpus.hpp"
#include "kgi/evaluation.hpp"
#include "kgi/lda.hpp"
#include "kgi/pairs.hpp"
#include "kgi/synthetic.hpp"
#include "kgi/text.hpp"
#include "kgi/training.hpp"
#include "oracles/gcn_reference.hpp"
#include "oracles/ngram_oracle.hpp"
#include "oracles/stats_oracle.hpp"

namespace fs = std::filesystem;
using namespace kgi;

namespace {

using Clock = std::chrono::steady_clock;
using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Edges random_edges(std::size_t n, std::mt19937_64& rng) {
    Edges e;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (rng() % 2) e.emplace_back(u, v);
    return e;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
    oracle::Matrix out = oracle::zeros(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

oracle::Params to_params(const EncoderParameters& w) {
    const auto v = [](const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
    return {to_rows(w.w1), to_rows(w.w2), to_rows(w.w3), v(w.b1), v(w.b2), v(w.b3)};
}

// 1. backward() against central finite differences.
Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::normal_distribution<double> nd;
    const EncoderConfig config{5, 7, 4, 0};
    const double h = 1e-5;
    double worst = 0.0;
    int graphs = 0, resampled = 0;
    while (graphs < 20) {
        const std::size_t n = 1 + rng() % 6;
        const auto edges = random_edges(n, rng);
        EncoderConfig c = config;
        c.seed = rng();
        auto w = init_weights(c);
        for (auto* b : {&w.b1, &w.b2, &w.b3}) *b = b->unaryExpr([&](double) { return 0.3 * nd(rng); });
        Eigen::MatrixXd x(n, 5);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
        const auto a = normalize_adjacency(n, edges);
        // A relu input within reach of the perturbation makes the difference
        // quotient straddle the kink.
        if (oracle::min_abs_preactivation(to_params(w), to_rows(a), to_rows(x)) < 1e-3) {
            ++resampled;
            continue;
        }
        ++graphs;
        Eigen::VectorXd up(4);
        for (int i = 0; i < 4; ++i) up[i] = nd(rng);
        const auto grads = backward(w, forward(w, a, x).cache, up);
        const auto objective = [&] { return up.dot(forward(w, a, x).embedding); };
        const auto check = [&](auto& param, const auto& grad) {
            for (Eigen::Index i = 0; i < param.size(); ++i) {
                const double keep = param.data()[i];
                param.data()[i] = keep + h;
                const double fp = objective();
                param.data()[i] = keep - h;
                const double fm = objective();
                param.data()[i] = keep;
                const double fd = (fp - fm) / (2 * h);
                const double g = grad.data()[i];
                const double scale = std::max({std::abs(g), std::abs(fd), 1e-6});
                worst = std::max(worst, std::abs(g - fd) / scale);
            }
        };
        check(w.w1, grads.w1);
        check(w.b1, grads.b1);
        check(w.w2, grads.w2);
        check(w.b2, grads.b2);
        check(w.w3, grads.w3);
        check(w.b3, grads.b3);
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0, "max relative error " + fmt("%.3g", worst) + ", " + std::to_string(resampled) +
                                             " draws resampled near relu kinks, " + fmt("%.2f", secs) + " s"};
}

// 2. The three loss identities and the clamped negative gradient.
Outcome loss_identities() {
    Eigen::VectorXd e(3), f(3), g(3);
    e << 0.3, -1.2, 2.0;
    f << 1.0, 0.0, 0.0;
    g << 0.0, 2.0, 0.0;
    const auto pos_same = cosine_embedding_loss(e, e, PairLabel::Positive, 0.5);
    const auto neg_orth = cosine_embedding_loss(f, g, PairLabel::Negative, 0.5);
    const auto neg_same = cosine_embedding_loss(e, e, PairLabel::Negative, 0.5);
    bool ok = std::abs(pos_same.loss) <= 1e-12 && std::abs(neg_orth.loss) <= 1e-12 &&
              std::abs(neg_same.loss - 0.5) <= 1e-12;
    ok = ok && (neg_orth.grad_a.array() == 0.0).all() && (neg_orth.grad_b.array() == 0.0).all();
    // A clamped negative pair that is not orthogonal.
    Eigen::VectorXd p(3), q(3);
    p << 1.0, 0.2, 0.0;
    q << -0.3, 1.0, 0.4;
    const auto clamped = cosine_embedding_loss(p, q, PairLabel::Negative, 0.5);
    ok = ok && clamped.loss == 0.0 && (clamped.grad_a.array() == 0.0).all() && (clamped.grad_b.array() == 0.0).all();
    return {ok, "positive identical " + fmt("%.2g", pos_same.loss) + ", negative orthogonal " +
                    fmt("%.2g", neg_orth.loss) + ", negative identical " + fmt("%.15g", neg_same.loss)};
}

// 3. Relabelling the nodes of a graph leaves its embedding unchanged.
Outcome permutation_invariance() {
    std::mt19937_64 rng(202);
    HashEmbeddingProvider provider(64, 5);
    const auto weights = init_weights(EncoderConfig{64, 64, 32, 9});
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng() % 12;
        DocumentGraph g{"g", {}, {}};
        for (std::size_t i = 0; i < n; ++i) g.nodes.push_back("concept " + std::to_string(t) + "-" + std::to_string(i));
        for (auto [u, v] : random_edges(n, rng)) g.edges.push_back({u, v, "rel"});
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        DocumentGraph p{"p", std::vector<std::string>(n), {}};
        for (std::size_t i = 0; i < n; ++i) p.nodes[perm[i]] = g.nodes[i];
        for (const auto& e : g.edges) p.edges.push_back({perm[e.source], perm[e.target], e.relation});
        const auto a = embed_document(weights, g, provider);
        const auto b = embed_document(weights, p, provider);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-9, "max L-inf change " + fmt("%.3g", worst) + " over 100 graphs"};
}

// 4. AUC and rank-sum p against independent oracles.
Outcome statistics_oracles() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    std::normal_distribution<double> nd;
    const auto scores = [&](std::size_t n, double shift, bool ties) {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = nd(rng) + shift;
            v.push_back(ties ? std::round(2 * x) / 2 : x);
        }
        return v;
    };
    double auc_err = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto pos = scores(1 + rng() % 40, 0.5, t % 2);
        const auto neg = scores(1 + rng() % 40, 0.0, t % 2);
        auc_err = std::max(auc_err, std::abs(roc_curve(pos, neg).auc - oracle::pairwise_auc(pos, neg)));
    }
    double exact_err = 0.0;
    for (std::size_t n1 = 1; n1 <= 8; ++n1) {
        for (std::size_t n2 = 1; n2 <= 8; ++n2) {
            for (int rep = 0; rep < 3; ++rep) {
                const auto pos = scores(n1, 0.6, rep == 2);
                const auto neg = scores(n2, 0.0, rep == 2);
                exact_err = std::max(exact_err, std::abs(rank_sum_test(pos, neg).p - oracle::exact_p(pos, neg)));
            }
        }
    }
    double perm_err = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
        const auto pos = scores(15, 0.3 * rep, rep == 1);
        const auto neg = scores(15, 0.0, rep == 1);
        perm_err = std::max(perm_err, std::abs(rank_sum_test(pos, neg).p - oracle::permutation_p(pos, neg, 100000, 7 + rep)));
    }
    const double secs = seconds_since(t0);
    return {auc_err <= 1e-12 && exact_err <= 0.01 && perm_err <= 0.01 && secs < 60.0,
            "AUC error " + fmt("%.2g", auc_err) + ", exact p error " + fmt("%.3g", exact_err) +
                ", permutation p error " + fmt("%.3g", perm_err) + ", " + fmt("%.1f", secs) + " s"};
}

// 5. Training separates planted-motif pairs on held-out data.
Outcome synthetic_separability() {
    const auto t0 = Clock::now();
    SyntheticConfig sc;
    sc.pairs = 250;
    const auto ds = make_synthetic_dataset(sc);
    HashEmbeddingProvider provider(64, sc.seed);
    GraphInputs inputs;
    for (const auto& g : ds.graphs) inputs.emplace(g.doc_id, prepare_graph(g, provider));

    EncoderConfig ec{64, 64, 32, sc.seed};
    TrainConfig tc;  // margin 0.5, lr 0.05, 80 epochs, 0.8 split
    tc.seed = sc.seed;
    tc.checkpoint_every = 0;
    const auto split = split_pairs(ds.pairs, tc.train_fraction, tc.seed);
    const auto state = train(inputs, split, initial_state(ec, tc));

    std::vector<double> pos, neg;
    for (const auto& p : split.test) {
        const double s = cosine_similarity(embed_input(state.weights, inputs.at(p.doc_a)),
                                           embed_input(state.weights, inputs.at(p.doc_b)));
        (p.label == PairLabel::Positive ? pos : neg).push_back(s);
    }
    const double auc = roc_curve(pos, neg).auc;
    const double first = state.history.front().train_loss, last = state.history.back().train_loss;
    const double secs = seconds_since(t0);
    return {split.train.size() == 200 && split.test.size() == 50 && auc >= 0.90 && last <= 0.5 * first && secs < 300.0,
            std::to_string(split.train.size()) + "/" + std::to_string(split.test.size()) + " pairs, held-out AUC " +
                fmt("%.4f", auc) + ", train loss " + fmt("%.4g", first) + " -> " + fmt("%.4g", last) + ", " +
                fmt("%.1f", secs) + " s"};
}

// 6. Baseline scorers on planted fixtures.
Outcome baseline_sanity() {
    std::mt19937_64 rng(404);
    const auto filler = [&](const std::string& prefix, std::size_t n) {
        std::vector<std::string> w;
        for (std::size_t i = 0; i < n; ++i) w.push_back(prefix + std::to_string(rng() % 100000));
        return w;
    };
    const auto join = [](const std::vector<std::string>& w) {
        std::string s;
        for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
        return s;
    };
    // Six documents; quotations planted between (0,1), (2,3) twice, (1,4).
    std::vector<std::vector<std::string>> docs;
    for (int d = 0; d < 6; ++d) docs.push_back(filler("d" + std::to_string(d) + "w", 200));
    const auto plant = [&](std::size_t a, std::size_t b, std::size_t len) {
        const auto quote = filler("q", len);
        std::copy(quote.begin(), quote.end(), docs[a].begin() + static_cast<std::ptrdiff_t>(rng() % 150));
        std::copy(quote.begin(), quote.end(), docs[b].begin() + static_cast<std::ptrdiff_t>(rng() % 150));
    };
    plant(0, 1, 8);
    plant(2, 3, 12);
    plant(2, 3, 9);
    plant(1, 4, 6);
    const std::set<std::pair<std::size_t, std::size_t>> planted{{0, 1}, {2, 3}, {1, 4}};
    bool reuse_ok = true;
    for (std::size_t a = 0; a < docs.size(); ++a) {
        for (std::size_t b = a + 1; b < docs.size(); ++b) {
            const auto score = text_reuse_score(join(docs[a]), join(docs[b])).score;
            const auto expected = oracle::merged_segments(oracle::shared_runs(docs[a], docs[b], kDefaultMinNgram));
            const bool is_planted = planted.count({a, b}) > 0;
            reuse_ok = reuse_ok && score == expected && (is_planted ? score >= 1 : score == 0);
        }
    }

    const std::vector<std::string> va{"river", "water", "fish", "boat", "stream", "lake", "shore", "current", "delta", "flood"};
    const std::vector<std::string> vb{"engine", "piston", "fuel", "gear", "turbine", "valve", "torque", "crank", "rotor", "axle"};
    std::vector<std::string> texts;
    for (int t = 0; t < 2; ++t) {
        for (int d = 0; d < 15; ++d) {
            std::string s;
            for (int w = 0; w < 60; ++w) s += (t == 0 ? va : vb)[rng() % 10] + " ";
            texts.push_back(s);
        }
    }
    LdaConfig lc;
    lc.topics = 2;
    lc.train_sweeps = 100;
    lc.infer_sweeps = 30;
    lc.seed = 11;
    const auto model = LdaModel::fit(texts, lc);
    std::vector<Eigen::VectorXd> theta;
    for (const auto& t : texts) theta.push_back(model.infer(t));
    std::size_t wins = 0, total = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        for (std::size_t j = 0; j < texts.size(); ++j) {
            if (i == j || (i < 15) != (j < 15)) continue;
            for (std::size_t k = 0; k < texts.size(); ++k) {
                if ((i < 15) == (k < 15)) continue;
                ++total;
                wins += kl_score(theta[i], theta[j]) < kl_score(theta[i], theta[k]);
            }
        }
    }
    const double kl_share = double(wins) / double(total);

    HashEmbeddingProvider provider(128, 3);
    const std::string doc = join(filler("e", 500));
    const double self = doc_embedding_score(provider, doc, doc);
    return {reuse_ok && kl_share >= 0.9 && self == 0.0,
            std::string("reuse ") + (reuse_ok ? "matches planted pairs and oracle" : "MISMATCH") +
                ", same-topic KL below cross-topic in " + fmt("%.1f", 100 * kl_share) + "% of comparisons" +
                ", self doc-embedding distance " + fmt("%g", self)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 7. Bit-identical retraining, resume equivalence and config echo.
Outcome determinism_and_provenance(const fs::path& work) {
    const fs::path dir = work / "provenance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    SyntheticConfig sc;
    sc.pairs = 20;
    const auto ds = make_synthetic_dataset(sc);
    const auto config_for = [&](std::size_t epochs) {
        return parse_run_config(R"({"seed": 13, "extraction": {"mock": true}, "features": {"dimension": 16},
            "encoder": {"hidden_dim": 12, "out_dim": 8}, "sampling": {"n_positive": 10},
            "training": {"epochs": )" + std::to_string(epochs) + R"(, "checkpoint_every": 2},
            "baselines": {"lda": {"topics": 4, "train_sweeps": 10, "infer_sweeps": 5}}})",
                                dir);
    };
    const auto c6 = config_for(6);
    save_corpus(ds.corpus, c6.paths.corpus_dir);
    write_sidecars(ds.graphs, c6.paths.sidecar_dir);
    std::ostringstream out, err;
    const auto layout = OutputLayout::from(c6);
    bool ok = cmd_extract(c6, out, err) == 0 && cmd_sample_pairs(c6, out, err) == 0;

    ok = ok && cmd_train(c6, false, out, err) == 0;
    const std::string first = slurp(layout.checkpoint);
    ok = ok && cmd_train(c6, false, out, err) == 0;
    const bool identical = !first.empty() && first == slurp(layout.checkpoint);

    fs::remove(layout.checkpoint);
    ok = ok && cmd_train(config_for(3), false, out, err) == 0;
    ok = ok && cmd_train(c6, true, out, err) == 0;
    const bool resumed_equal = first == slurp(layout.checkpoint);

    ok = ok && cmd_evaluate(c6, {}, out, err) == 0 && cmd_report(c6, out, err) == 0;
    std::vector<fs::path> missing;
    for (const auto& d : {c6.paths.graphs_file.parent_path(), layout.pairs_dir, layout.train_dir, layout.eval_dir,
                          layout.report_dir}) {
        if (!fs::exists(d / "config.json")) missing.push_back(d);
    }
    return {ok && identical && resumed_equal && missing.empty(),
            std::string("retrain ") + (identical ? "bit-identical" : "DIFFERS") + ", resume " +
                (resumed_equal ? "equals uninterrupted run" : "DIFFERS") + ", " +
                std::to_string(5 - missing.size()) + "/5 output directories echo the config"};
}

// 8. Sampling on a 12-document corpus against exhaustive enumeration.
Outcome pair_sampling_contract() {
    Corpus corpus;
    const auto add = [&](const std::string& id, const std::string& subject, std::set<std::string> cites) {
        corpus.add({id, subject, "text of " + id, std::move(cites), {}});
    };
    add("a1", "alpha", {"a2", "a3", "b1"});
    add("a2", "alpha", {"a3"});
    add("a3", "alpha", {});
    add("a4", "alpha", {"external-9"});
    add("b1", "beta", {"b2"});
    add("b2", "beta", {});
    add("b3", "beta", {"b4", "c1"});
    add("b4", "beta", {});
    add("c1", "gamma", {"c2"});
    add("c2", "gamma", {});
    add("c3", "gamma", {});
    add("c4", "gamma", {"c1"});
    corpus.resolve_citations();

    std::set<std::pair<std::string, std::string>> want_pos, want_neg;
    const auto& docs = corpus.documents();
    for (auto i = docs.begin(); i != docs.end(); ++i) {
        for (auto j = std::next(i); j != docs.end(); ++j) {
            if (i->second.subject != j->second.subject) continue;
            const bool cited = i->second.cites.count(j->first) || j->second.cites.count(i->first);
            (cited ? want_pos : want_neg).emplace(i->first, j->first);
        }
    }
    const auto n_pos = static_cast<std::int64_t>(want_pos.size());
    const auto n_neg = static_cast<std::int64_t>(default_negative_count(want_pos.size()));
    const auto sampled = sample_pairs(corpus, n_pos, n_neg, 5);
    std::set<std::pair<std::string, std::string>> got_pos, got_neg;
    for (const auto& p : sampled.pairs) (p.label == PairLabel::Positive ? got_pos : got_neg).emplace(p.doc_a, p.doc_b);
    const double ratio = double(n_neg) / double(n_pos);
    const bool ok = want_pos.size() == 7 && want_neg.size() == 11 && got_pos == want_pos && got_neg == want_neg &&
                    sampled.pairs.size() == 18 && sampled.positive_shortfall == 0 && sampled.negative_shortfall == 0;
    return {ok, std::to_string(got_pos.size()) + " positives, " + std::to_string(got_neg.size()) +
                    " negatives (requested ratio " + fmt("%.3f", ratio) + "), enumeration " +
                    (got_pos == want_pos && got_neg == want_neg ? "matches" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "kgi_acceptance";
    fs::create_directories(work);
    spdlog::set_level(spdlog::level::warn);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"loss identities", loss_identities},
        {"permutation invariance", permutation_invariance},
        {"statistics oracles", statistics_oracles},
        {"synthetic end-to-end separability", synthetic_separability},
        {"baseline sanity", baseline_sanity},
        {"determinism and provenance", [&] { return determinism_and_provenance(work); }},
        {"pair-sampling contract", pair_sampling_contract},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
