#include "kgi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "kgi/errors.hpp"

namespace kgi {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ParseError("config " + label() + " must be an object", label());
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        const std::string field = qualify(key);
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (!it->is_number_unsigned()) throw ParseError("config " + field + " must be a non-negative integer", field);
        }
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ParseError("config " + field + ": " + e.what(), field);
        }
    }

    template <typename T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        T value{};
        get(key, value);
        out = value;
    }

    void path(const char* key, fs::path& out) {
        std::string s = out.string();
        get(key, s);
        out = s;
    }

    void optional_path(const char* key, std::optional<fs::path>& out) {
        std::optional<std::string> s;
        get(key, s);
        if (s) out = *s;
    }

    template <typename Fn>
    void section(const char* key, Fn&& fn) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        Section sub(*it, qualify(key));
        fn(sub);
        sub.finish();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ParseError("unknown config key " + qualify(k), qualify(k));
        }
    }

private:
    std::string label() const { return where_.empty() ? "root" : where_; }
    std::string qualify(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    const json& j_;
    std::string where_;
    std::set<std::string, std::less<>> seen_;
};

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute()) return p;
    return (base / p).lexically_normal();
}

void read_scholar(Section& s, ScholarConfig& c) {
    s.get("base_url", c.base_url);
    s.get("api_key_env", c.api_key_env);
    s.get("timeout_seconds", c.timeout_seconds);
    s.get("max_retries", c.max_retries);
    s.get("backoff_base_ms", c.backoff_base_ms);
    s.get("concurrency", c.concurrency);
    s.get("page_size", c.page_size);
}

void read_llm(Section& s, LlmConfig& c) {
    s.get("base_url", c.base_url);
    s.get("model", c.model);
    s.get("api_key_env", c.api_key_env);
    s.get("max_retries", c.max_retries);
    s.get("backoff_base_ms", c.backoff_base_ms);
    s.get("timeout_seconds", c.timeout_seconds);
}

void read_service(Section& s, EmbeddingServiceConfig& c) {
    s.get("base_url", c.base_url);
    s.get("endpoint", c.endpoint);
    s.get("api_key_env", c.api_key_env);
    s.get("batch_size", c.batch_size);
    s.get("max_chars", c.max_chars);
    s.get("max_retries", c.max_retries);
    s.get("backoff_base_ms", c.backoff_base_ms);
    s.get("timeout_seconds", c.timeout_seconds);
}

json to_json(const RunConfig& c) {
    const auto opt_path = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
    json j;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["paths"] = {{"corpus_dir", c.paths.corpus_dir.string()},
                  {"graphs_file", c.paths.graphs_file.string()},
                  {"cache_dir", c.paths.cache_dir.string()},
                  {"output_dir", c.paths.output_dir.string()},
                  {"sidecar_dir", c.paths.sidecar_dir.string()}};
    const auto& api = c.ingest.api;
    j["ingest"] = {{"subjects", c.ingest.subjects},
                   {"limit_per_subject", c.ingest.limit_per_subject},
                   {"api",
                    {{"base_url", api.base_url},
                     {"api_key_env", api.api_key_env},
                     {"timeout_seconds", api.timeout_seconds},
                     {"max_retries", api.max_retries},
                     {"backoff_base_ms", api.backoff_base_ms},
                     {"concurrency", api.concurrency},
                     {"page_size", api.page_size}}}};
    const auto& llm = c.extraction.llm;
    j["extraction"] = {{"chunk_size", c.extraction.chunk_size},
                       {"overlap", c.extraction.overlap},
                       {"template", opt_path(c.extraction.template_path)},
                       {"mock", c.extraction.mock},
                       {"llm",
                        {{"base_url", llm.base_url},
                         {"model", llm.model},
                         {"api_key_env", llm.api_key_env},
                         {"max_retries", llm.max_retries},
                         {"backoff_base_ms", llm.backoff_base_ms},
                         {"timeout_seconds", llm.timeout_seconds}}}};
    const auto& svc = c.features.service;
    j["features"] = {{"provider", c.features.provider},
                     {"dimension", c.features.dimension},
                     {"hash_seed", c.features.hash_seed},
                     {"disk_cache", c.features.disk_cache},
                     {"service",
                      {{"base_url", svc.base_url},
                       {"endpoint", svc.endpoint},
                       {"api_key_env", svc.api_key_env},
                       {"batch_size", svc.batch_size},
                       {"max_chars", svc.max_chars},
                       {"max_retries", svc.max_retries},
                       {"backoff_base_ms", svc.backoff_base_ms},
                       {"timeout_seconds", svc.timeout_seconds}}}};
    j["encoder"] = {{"hidden_dim", c.encoder.hidden_dim},
                    {"out_dim", c.encoder.out_dim},
                    {"dropout", c.encoder.dropout},
                    {"weight_decay", c.encoder.weight_decay}};
    const auto& t = c.training;
    j["training"] = {{"margin", t.margin},         {"learning_rate", t.learning_rate},
                     {"epochs", t.epochs},         {"train_fraction", t.train_fraction},
                     {"adam_beta1", t.adam_beta1}, {"adam_beta2", t.adam_beta2},
                     {"adam_eps", t.adam_eps},     {"checkpoint_every", t.checkpoint_every}};
    j["sampling"] = {{"n_positive", c.sampling.n_positive},
                     {"n_negative", c.sampling.n_negative ? json(*c.sampling.n_negative) : json(nullptr)}};
    const auto& b = c.baselines;
    j["baselines"] = {{"min_ngram", b.min_ngram},
                      {"kl_direction", to_string(b.kl_direction)},
                      {"doc_chunk_size", b.doc_chunk_size},
                      {"lda",
                       {{"topics", b.lda.topics},
                        {"alpha", b.lda.alpha},
                        {"beta", b.lda.beta},
                        {"train_sweeps", b.lda.train_sweeps},
                        {"infer_sweeps", b.lda.infer_sweeps}}}};
    return j;
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
    seed = s;
    encoder.seed = s;
    training.seed = s;
    baselines.lda.seed = s;
}

void RunConfig::apply_jobs(std::size_t j) {
    jobs = std::max<std::size_t>(1, j);
    training.jobs = jobs;
}

void RunConfig::validate() const {
    if (features.provider != "hash" && features.provider != "service")
        throw ArgumentError("features.provider must be \"hash\" or \"service\"");
    if (features.dimension == 0) throw ArgumentError("features.dimension must be positive");
    if (extraction.chunk_size == 0 || extraction.overlap >= extraction.chunk_size)
        throw ArgumentError("extraction needs chunk_size >= 1 and overlap < chunk_size");
    if (sampling.n_positive < 0 || (sampling.n_negative && *sampling.n_negative < 0))
        throw ArgumentError("sampling counts must be non-negative");
    if (baselines.min_ngram == 0 || baselines.doc_chunk_size == 0)
        throw ArgumentError("baselines.min_ngram and doc_chunk_size must be positive");
    if (ingest.limit_per_subject == 0) throw ArgumentError("ingest.limit_per_subject must be positive");
    if (ingest.api.concurrency == 0 || ingest.api.page_size == 0)
        throw ArgumentError("ingest.api.concurrency and page_size must be positive");
    if (encoder.in_dim != features.dimension) throw ArgumentError("encoder input size must equal features.dimension");
    encoder.validate();
    training.validate();
    baselines.lda.validate();
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section root(j, "");
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    root.get("seed", seed);
    root.get("jobs", jobs);
    root.section("paths", [&](Section& s) {
        s.path("corpus_dir", c.paths.corpus_dir);
        s.path("graphs_file", c.paths.graphs_file);
        s.path("cache_dir", c.paths.cache_dir);
        s.path("output_dir", c.paths.output_dir);
        s.path("sidecar_dir", c.paths.sidecar_dir);
    });
    root.section("ingest", [&](Section& s) {
        s.get("subjects", c.ingest.subjects);
        s.get("limit_per_subject", c.ingest.limit_per_subject);
        s.section("api", [&](Section& a) { read_scholar(a, c.ingest.api); });
    });
    root.section("extraction", [&](Section& s) {
        s.get("chunk_size", c.extraction.chunk_size);
        s.get("overlap", c.extraction.overlap);
        s.optional_path("template", c.extraction.template_path);
        s.get("mock", c.extraction.mock);
        s.section("llm", [&](Section& l) { read_llm(l, c.extraction.llm); });
    });
    root.section("features", [&](Section& s) {
        s.get("provider", c.features.provider);
        s.get("dimension", c.features.dimension);
        s.get("hash_seed", c.features.hash_seed);
        s.get("disk_cache", c.features.disk_cache);
        s.section("service", [&](Section& v) { read_service(v, c.features.service); });
    });
    root.section("encoder", [&](Section& s) {
        s.get("hidden_dim", c.encoder.hidden_dim);
        s.get("out_dim", c.encoder.out_dim);
        s.get("dropout", c.encoder.dropout);
        s.get("weight_decay", c.encoder.weight_decay);
    });
    root.section("training", [&](Section& s) {
        s.get("margin", c.training.margin);
        s.get("learning_rate", c.training.learning_rate);
        s.get("epochs", c.training.epochs);
        s.get("train_fraction", c.training.train_fraction);
        s.get("adam_beta1", c.training.adam_beta1);
        s.get("adam_beta2", c.training.adam_beta2);
        s.get("adam_eps", c.training.adam_eps);
        s.get("checkpoint_every", c.training.checkpoint_every);
    });
    root.section("sampling", [&](Section& s) {
        s.get("n_positive", c.sampling.n_positive);
        s.get("n_negative", c.sampling.n_negative);
    });
    root.section("baselines", [&](Section& s) {
        s.get("min_ngram", c.baselines.min_ngram);
        std::string direction = to_string(c.baselines.kl_direction);
        s.get("kl_direction", direction);
        c.baselines.kl_direction = parse_kl_direction(direction);
        s.get("doc_chunk_size", c.baselines.doc_chunk_size);
        s.section("lda", [&](Section& l) {
            l.get("topics", c.baselines.lda.topics);
            l.get("alpha", c.baselines.lda.alpha);
            l.get("beta", c.baselines.lda.beta);
            l.get("train_sweeps", c.baselines.lda.train_sweeps);
            l.get("infer_sweeps", c.baselines.lda.infer_sweeps);
        });
    });
    root.finish();

    c.paths.corpus_dir = resolve(c.paths.corpus_dir, base_dir);
    c.paths.graphs_file = resolve(c.paths.graphs_file, base_dir);
    c.paths.cache_dir = resolve(c.paths.cache_dir, base_dir);
    c.paths.output_dir = resolve(c.paths.output_dir, base_dir);
    c.paths.sidecar_dir = resolve(c.paths.sidecar_dir, base_dir);
    if (c.extraction.template_path) c.extraction.template_path = resolve(*c.extraction.template_path, base_dir);
    if (!c.ingest.api.base_url.empty() && !is_url(c.ingest.api.base_url))
        c.ingest.api.base_url = resolve(c.ingest.api.base_url, base_dir).string();

    c.encoder.in_dim = c.features.dimension;
    c.features.service.dimension = c.features.dimension;
    c.apply_seed(seed);
    c.apply_jobs(jobs);
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const fs::path base = fs::absolute(path).parent_path();
    return parse_run_config(ss.str(), base);
}

std::string run_config_json(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

void echo_config(const RunConfig& config, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "config.json").string());
    out << run_config_json(config);
}

}  // namespace kgi
