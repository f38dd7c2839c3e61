#include "kgi/kgx.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "kgi/errors.hpp"
#include "kgi/text.hpp"

namespace kgi {

using nlohmann::json;

namespace {

bool is_ws(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

// Best cut position in [min_end, limit], scanning backwards. Positions are
// code point indices; separators are ASCII so a byte test suffices.
std::size_t find_break(std::string_view text, const std::vector<std::size_t>& cp, std::size_t min_end,
                       std::size_t limit) {
    const auto ch = [&](std::size_t i) { return text[cp[i]]; };
    for (std::size_t p = limit; p >= min_end && p >= 2; --p) {
        if (ch(p - 1) == '\n' && ch(p - 2) == '\n') return p;
    }
    for (std::size_t p = limit; p >= min_end && p >= 2; --p) {
        const char prev = ch(p - 2);
        if ((prev == '.' || prev == '!' || prev == '?') && is_ws(ch(p - 1))) return p;
    }
    for (std::size_t p = limit; p >= min_end && p >= 1; --p) {
        if (is_ws(ch(p - 1))) return p;
    }
    return limit;
}

}  // namespace

ChunkPlan chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap) {
    if (chunk_size == 0) throw ArgumentError("chunk_size must be at least 1");
    if (overlap >= chunk_size) throw ArgumentError("overlap must be smaller than chunk_size");
    ChunkPlan plan{chunk_size, overlap, {}};
    const auto cp = text::codepoint_offsets(text);
    const std::size_t n = cp.size() - 1;
    std::size_t start = 0;
    while (n > 0) {
        if (n - start <= chunk_size) {
            plan.boundaries.emplace_back(start, n);
            break;
        }
        const std::size_t limit = start + chunk_size;
        const std::size_t min_end = start + std::max(overlap + 1, chunk_size / 2);
        const std::size_t end = find_break(text, cp, min_end, limit);
        plan.boundaries.emplace_back(start, end);
        start = end - overlap;
    }
    return plan;
}

std::vector<std::string> chunk_strings(std::string_view text, const ChunkPlan& plan) {
    const auto cp = text::codepoint_offsets(text);
    std::vector<std::string> out;
    out.reserve(plan.boundaries.size());
    for (const auto& [b, e] : plan.boundaries) out.push_back(text::slice_codepoints(text, cp, b, e));
    return out;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    PromptTemplate t{ss.str()};
    if (t.text.find(kChunkPlaceholder) == std::string::npos) {
        throw ArgumentError("prompt template " + path.string() + " has no {chunk} placeholder");
    }
    return t;
}

PromptTemplate PromptTemplate::bundled() {
    return {R"(You are building a knowledge graph from one passage of an academic article.
Identify the key concepts in the passage (entities, methods, phenomena, findings, claims, conditions) and the relations the passage asserts between them.
Ignore direct citations: do not extract author names, reference numbers, publication years or bibliography entries as concepts, and do not create relations whose only content is that one work cites another.
Answer with a JSON array and nothing else. Each element is an object with exactly three string fields: "node_1", "edge", "node_2". Keep node labels short (one to four words) and lowercase.

Example passage:
Rising atmospheric CO2 concentrations trap outgoing infrared radiation (Smith et al., 2019). This radiative forcing drives global warming, which in turn accelerates the melting of polar ice [12].

Example answer:
[{"node_1": "atmospheric co2", "edge": "traps", "node_2": "infrared radiation"},
 {"node_1": "radiative forcing", "edge": "drives", "node_2": "global warming"},
 {"node_1": "global warming", "edge": "accelerates", "node_2": "polar ice melting"}]

Passage:
{chunk}

Answer:
)"};
}

std::string build_prompt(std::string_view chunk, const PromptTemplate& tmpl) {
    const std::string& t = tmpl.text;
    std::size_t pos = t.find(kChunkPlaceholder);
    if (pos == std::string::npos) throw ArgumentError("prompt template has no {chunk} placeholder");
    std::string out;
    out.reserve(t.size() + chunk.size());
    std::size_t from = 0;
    while (pos != std::string::npos) {
        out.append(t, from, pos - from);
        out.append(chunk);
        from = pos + kChunkPlaceholder.size();
        pos = t.find(kChunkPlaceholder, from);
    }
    out.append(t, from, std::string::npos);
    return out;
}

namespace {

std::string strip_code_fence(const std::string& raw) {
    const auto open = raw.find("```");
    if (open == std::string::npos) return text::trim(raw);
    auto body_begin = raw.find('\n', open);
    if (body_begin == std::string::npos) return {};
    ++body_begin;
    const auto close = raw.find("```", body_begin);
    return text::trim(std::string_view(raw).substr(body_begin, close == std::string::npos ? std::string::npos
                                                                                           : close - body_begin));
}

std::optional<std::string> clean_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string()) return std::nullopt;
    std::string v = text::collapse_whitespace(obj[key].get<std::string>());
    if (v.empty()) return std::nullopt;
    return v;
}

}  // namespace

ParsedTriples parse_triple_response(const std::string& raw) {
    const std::string body = strip_code_fence(raw);
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        throw ExtractionError("LLM response is not valid JSON", raw);
    }
    if (!j.is_array()) throw ExtractionError("LLM response is not a JSON array", raw);
    ParsedTriples out;
    for (const auto& item : j) {
        if (!item.is_object()) {
            ++out.dropped;
            continue;
        }
        auto head = clean_field(item, "node_1");
        auto rel = clean_field(item, "edge");
        auto tail = clean_field(item, "node_2");
        if (!head || !rel || !tail) {
            ++out.dropped;
            continue;
        }
        out.triples.push_back({std::move(*head), std::move(*rel), std::move(*tail)});
    }
    return out;
}

ParsedTriples extract_chunk(LlmClient& client, const std::string& prompt) {
    if (prompt.empty()) throw ArgumentError("prompt is empty");
    return parse_triple_response(client.complete(prompt));
}

DocumentGraph assemble_graph(std::string doc_id, const std::vector<std::vector<Triple>>& chunk_triples) {
    DocumentGraph g;
    g.doc_id = std::move(doc_id);
    std::unordered_map<std::string, std::size_t> index;
    std::set<std::tuple<std::size_t, std::string, std::size_t>> seen_edges;
    const auto node = [&](const std::string& label) -> std::optional<std::size_t> {
        std::string display = text::collapse_whitespace(label);
        if (display.empty()) return std::nullopt;
        auto [it, inserted] = index.emplace(text::fold_case(display), g.nodes.size());
        if (inserted) g.nodes.push_back(std::move(display));
        return it->second;
    };
    for (const auto& chunk : chunk_triples) {
        for (const auto& t : chunk) {
            const auto h = node(t.head);
            const auto tl = node(t.tail);
            if (!h || !tl || *h == *tl) continue;
            std::string rel = text::collapse_whitespace(t.relation);
            if (!seen_edges.emplace(*h, text::fold_case(rel), *tl).second) continue;
            g.edges.push_back({*h, *tl, std::move(rel)});
        }
    }
    return g;
}

std::vector<Triple> graph_triples(const DocumentGraph& graph) {
    std::vector<Triple> out;
    out.reserve(graph.edges.size());
    for (const auto& e : graph.edges) out.push_back({graph.nodes[e.source], e.relation, graph.nodes[e.target]});
    return out;
}

std::vector<Triple> mock_extract(std::string_view, const std::filesystem::path& sidecar) {
    std::ifstream in(sidecar, std::ios::binary);
    if (!in) throw Error("missing triple sidecar " + sidecar.string());
    std::vector<Triple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t from = 0;
        for (auto bar = t.find('|'); bar != std::string::npos; bar = t.find('|', from)) {
            fields.push_back(text::trim(std::string_view(t).substr(from, bar - from)));
            from = bar + 1;
        }
        fields.push_back(text::trim(std::string_view(t).substr(from)));
        const std::string where = sidecar.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3) {
            throw ParseError(where + ": expected head|relation|tail, got " + std::to_string(fields.size()) + " fields");
        }
        if (fields[0].empty() || fields[2].empty()) throw ParseError(where + ": empty node label");
        out.push_back({fields[0], fields[1], fields[2]});
    }
    return out;
}

void validate_graph(const DocumentGraph& graph) {
    std::set<std::string> keys;
    for (const auto& n : graph.nodes) {
        if (!keys.insert(text::normalize_label(n)).second) {
            throw ParseError("graph '" + graph.doc_id + "' has duplicate node label '" + n + "'", "nodes");
        }
    }
    for (const auto& e : graph.edges) {
        if (e.source >= graph.nodes.size() || e.target >= graph.nodes.size()) {
            throw ParseError("graph '" + graph.doc_id + "' has an edge with an out-of-range node index", "edges");
        }
        if (e.source == e.target) throw ParseError("graph '" + graph.doc_id + "' has a self-loop edge", "edges");
    }
}

std::string graph_to_json_line(const DocumentGraph& graph) {
    json j;
    j["doc_id"] = graph.doc_id;
    j["nodes"] = graph.nodes;
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back(json::array({e.source, e.target, e.relation}));
    j["edges"] = std::move(edges);
    return j.dump();
}

DocumentGraph graph_from_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid graph record: ") + e.what());
    }
    DocumentGraph g;
    try {
        g.doc_id = j.at("doc_id").get<std::string>();
        g.nodes = j.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw ParseError("edge is not a [int, int, string] triple", "edges");
            g.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed graph record: ") + e.what());
    }
    validate_graph(g);
    return g;
}

std::map<std::string, DocumentGraph> load_graphs(const std::filesystem::path& path) {
    std::map<std::string, DocumentGraph> out;
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto g = graph_from_json_line(line);
            std::string id = g.doc_id;
            out.insert_or_assign(std::move(id), std::move(g));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), e.field());
        }
    }
    return out;
}

void append_graphs(const std::filesystem::path& path, const std::vector<DocumentGraph>& graphs) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& g : graphs) out << graph_to_json_line(g) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace kgi
