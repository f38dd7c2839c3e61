#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgi/http.hpp"

namespace kgi {

struct Triple {
    std::string head;
    std::string relation;
    std::string tail;

    bool operator==(const Triple&) const = default;
};

struct GraphEdge {
    std::size_t source = 0;
    std::size_t target = 0;
    std::string relation;

    bool operator==(const GraphEdge&) const = default;
};

// Per-document knowledge graph. Node labels are distinct under
// normalize_label and ordered by first appearance; edges never loop.
struct DocumentGraph {
    std::string doc_id;
    std::vector<std::string> nodes;
    std::vector<GraphEdge> edges;

    // Graphs without edges are kept on disk but never reach training.
    bool is_empty() const { return edges.empty(); }
    bool operator==(const DocumentGraph&) const = default;
};

// Chunk boundaries in code points, [begin, end).
struct ChunkPlan {
    std::size_t chunk_size = 1000;
    std::size_t overlap = 100;
    std::vector<std::pair<std::size_t, std::size_t>> boundaries;
};

inline constexpr std::size_t kDefaultChunkSize = 1000;
inline constexpr std::size_t kDefaultChunkOverlap = 100;

// Recursive-character style splitting. Each window of chunk_size code points
// is cut at the last paragraph break, else sentence end, else whitespace,
// found in the back half of the window; with none, the window is cut hard.
// The next chunk starts `overlap` code points before the previous end.
ChunkPlan chunk_text(std::string_view text, std::size_t chunk_size = kDefaultChunkSize,
                     std::size_t overlap = kDefaultChunkOverlap);

std::vector<std::string> chunk_strings(std::string_view text, const ChunkPlan& plan);

struct PromptTemplate {
    std::string text;

    static PromptTemplate load(const std::filesystem::path& path);
    static PromptTemplate bundled();
};

inline constexpr std::string_view kChunkPlaceholder = "{chunk}";

// Replaces every `{chunk}` in the template. The chunk itself is not rescanned.
std::string build_prompt(std::string_view chunk, const PromptTemplate& tmpl);

struct ParsedTriples {
    std::vector<Triple> triples;
    std::size_t dropped = 0;  // elements with missing, empty or non-string fields
};

// Parses an LLM answer: optional markdown code fence, then a JSON array of
// {"node_1", "edge", "node_2"} objects. Throws ExtractionError otherwise.
ParsedTriples parse_triple_response(const std::string& raw);

struct LlmConfig {
    std::string base_url = "https://generativelanguage.googleapis.com/v1beta";
    std::string model = "gemini-pro";
    std::string api_key_env = "GEMINI_API_KEY";
    int max_retries = 3;
    int backoff_base_ms = 1000;
    double timeout_seconds = 60.0;
};

// Gemini generateContent client:
//   POST /models/<model>:generateContent
//   {"contents": [{"role": "user", "parts": [{"text": prompt}]}], ...}
// Safe to share across worker threads; a 429 pauses every caller.
class LlmClient {
public:
    explicit LlmClient(LlmConfig config);
    LlmClient(LlmConfig config, std::unique_ptr<http::Transport> transport);

    std::string complete(const std::string& prompt);

private:
    void wait_for_slot();
    void note_rate_limited(int attempt);

    LlmConfig config_;
    std::unique_ptr<http::Transport> transport_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point not_before_{};
};

ParsedTriples extract_chunk(LlmClient& client, const std::string& prompt);

// Merge chunk-level triples: nodes deduplicated by normalize_label in
// first-appearance order, duplicate (head, relation, tail) edges collapsed,
// self-loops dropped (their node is kept).
DocumentGraph assemble_graph(std::string doc_id, const std::vector<std::vector<Triple>>& chunk_triples);

// The graph's edges as triples, in edge order.
std::vector<Triple> graph_triples(const DocumentGraph& graph);

// Offline extractor: reads `head|relation|tail` lines from a sidecar file,
// skipping blank lines and `#` comments. `text` is accepted for signature
// parity with the LLM path and is not inspected.
std::vector<Triple> mock_extract(std::string_view text, const std::filesystem::path& sidecar);

// graphs.jsonl records: {"doc_id", "nodes": [...], "edges": [[i, j, "rel"], ...]}
std::string graph_to_json_line(const DocumentGraph& graph);
DocumentGraph graph_from_json_line(std::string_view line);

// Keyed by doc_id. Missing file → empty map.
std::map<std::string, DocumentGraph> load_graphs(const std::filesystem::path& path);
void append_graphs(const std::filesystem::path& path, const std::vector<DocumentGraph>& graphs);

// Throws ParseError if node labels collide or an edge is out of range / loops.
void validate_graph(const DocumentGraph& graph);

}  // namespace kgi
