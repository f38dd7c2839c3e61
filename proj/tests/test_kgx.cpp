#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>

#include "kgi/errors.hpp"
#include "kgi/kgx.hpp"
#include "kgi/text.hpp"

using namespace kgi;
namespace fs = std::filesystem;

namespace {

using Bounds = std::vector<std::pair<std::size_t, std::size_t>>;

// Independent checks of a chunk plan: starts at 0, ends at n, every chunk
// within size, consecutive chunks overlap by exactly `overlap`.
void check_plan(const ChunkPlan& plan, std::size_t n) {
    if (n == 0) {
        EXPECT_TRUE(plan.boundaries.empty());
        return;
    }
    ASSERT_FALSE(plan.boundaries.empty());
    EXPECT_EQ(plan.boundaries.front().first, 0u);
    EXPECT_EQ(plan.boundaries.back().second, n);
    std::vector<int> covered(n, 0);
    for (std::size_t i = 0; i < plan.boundaries.size(); ++i) {
        const auto [b, e] = plan.boundaries[i];
        ASSERT_LT(b, e);
        ASSERT_LE(e - b, plan.chunk_size);
        for (std::size_t k = b; k < e; ++k) covered[k] = 1;
        if (i > 0) EXPECT_EQ(plan.boundaries[i - 1].second - b, plan.overlap);
    }
    for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(covered[k], 1) << "character " << k << " not covered";
}

}  // namespace

TEST(Chunking, ShortTextIsOneChunk) {
    const auto plan = chunk_text(std::string(500, 'x'), 1000, 100);
    EXPECT_EQ(plan.boundaries, (Bounds{{0, 500}}));
}

TEST(Chunking, SeparatorFreeTextUsesStride) {
    const auto plan = chunk_text(std::string(2500, 'x'), 1000, 100);
    EXPECT_EQ(plan.boundaries, (Bounds{{0, 1000}, {900, 1900}, {1800, 2500}}));
    check_plan(plan, 2500);
}

TEST(Chunking, EmptyTextAndBadOverlap) {
    EXPECT_TRUE(chunk_text("", 1000, 100).boundaries.empty());
    EXPECT_THROW(chunk_text("abc", 100, 100), ArgumentError);
    EXPECT_THROW(chunk_text("abc", 0, 0), ArgumentError);
}

TEST(Chunking, PrefersParagraphThenSentenceThenWord) {
    // Paragraph break at 70 beats the sentence end at 85.
    std::string s = std::string(68, 'a') + "\n\n" + std::string(13, 'b') + ". " + std::string(100, 'c');
    EXPECT_EQ(chunk_text(s, 100, 10).boundaries.front().second, 70u);
    std::string t = std::string(60, 'a') + ". " + std::string(10, 'b') + " " + std::string(100, 'c');
    EXPECT_EQ(chunk_text(t, 100, 10).boundaries.front().second, 62u);
    std::string u = std::string(70, 'a') + " " + std::string(100, 'c');
    EXPECT_EQ(chunk_text(u, 100, 10).boundaries.front().second, 71u);
}

TEST(Chunking, CountsCodePointsNotBytes) {
    std::string s;
    for (int i = 0; i < 30; ++i) s += "\xc3\xa9";  // 30 code points, 60 bytes
    const auto plan = chunk_text(s, 20, 5);
    check_plan(plan, 30);
    for (const auto& c : chunk_strings(s, plan)) EXPECT_EQ(text::codepoint_count(c) * 2, c.size());
}

TEST(Chunking, RandomTextsSatisfyPlanInvariants) {
    std::mt19937_64 rng(11);
    const std::string alphabet = "abcde .\n";
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = rng() % 600;
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
        const std::size_t size = 1 + rng() % 120;
        const std::size_t overlap = rng() % size;
        check_plan(chunk_text(s, size, overlap), n);
    }
}

TEST(Prompt, SubstitutesPlaceholder) {
    EXPECT_EQ(build_prompt("abc", {"EX... {chunk}"}), "EX... abc");
    EXPECT_EQ(build_prompt("{chunk} {x}", {"<{chunk}>"}), "<{chunk} {x}>");
    EXPECT_THROW(build_prompt("abc", {"no placeholder"}), ArgumentError);
}

TEST(Prompt, BundledTemplateHasInstructionAndExample) {
    const auto t = PromptTemplate::bundled().text;
    EXPECT_NE(t.find("Ignore direct citations"), std::string::npos);
    EXPECT_NE(t.find("\"node_1\""), std::string::npos);
    EXPECT_NE(t.find("{chunk}"), std::string::npos);
}

TEST(ParseTriples, AcceptsFencedArray) {
    const auto r = parse_triple_response(
        "```json\n[{\"node_1\": \"A\", \"edge\": \"drives\", \"node_2\": \"B\"}]\n```");
    ASSERT_EQ(r.triples.size(), 1u);
    EXPECT_EQ(r.triples[0], (Triple{"A", "drives", "B"}));
}

TEST(ParseTriples, DropsIncompleteElements) {
    const auto r = parse_triple_response(
        R"([{"node_1": "A", "edge": "x", "node_2": "B"}, {"node_1": "A", "edge": "x"},
            {"node_1": "", "edge": "x", "node_2": "B"}, {"node_1": 3, "edge": "x", "node_2": "B"}, 7])");
    EXPECT_EQ(r.triples.size(), 1u);
    EXPECT_EQ(r.dropped, 4u);
}

TEST(ParseTriples, RejectsNonArrays) {
    EXPECT_THROW(parse_triple_response("not json"), ExtractionError);
    EXPECT_THROW(parse_triple_response(R"({"node_1": "a"})"), ExtractionError);
    try {
        parse_triple_response("oops");
    } catch (const ExtractionError& e) {
        EXPECT_EQ(e.raw_response(), "oops");
    }
}

TEST(Assemble, DeduplicatesNodesAndEdges) {
    const auto g = assemble_graph("d", {{{"CO2", "traps", "Heat"}, {"co2 ", "traps", "heat"}},
                                        {{"Heat", "melts", "Ice"}, {"ice", "is", "ICE"}}});
    EXPECT_EQ(g.nodes, (std::vector<std::string>{"CO2", "Heat", "Ice"}));
    ASSERT_EQ(g.edges.size(), 2u);
    EXPECT_EQ(g.edges[0], (GraphEdge{0, 1, "traps"}));
    EXPECT_EQ(g.edges[1], (GraphEdge{1, 2, "melts"}));
    validate_graph(g);
}

TEST(Assemble, SelfLoopKeepsNodeWithoutEdge) {
    const auto g = assemble_graph("d", {{{"A", "is", "a"}}});
    EXPECT_EQ(g.nodes.size(), 1u);
    EXPECT_TRUE(g.is_empty());
}

TEST(Assemble, IdempotentOnLoopFreeInput) {
    std::mt19937_64 rng(5);
    const std::vector<std::string> labels{"alpha", "Beta", "beta", "gamma", "delta  x", "Delta x", "eps"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<Triple>> chunks(1 + rng() % 3);
        for (auto& c : chunks) {
            for (int k = 0, m = static_cast<int>(rng() % 6); k < m; ++k) {
                const auto& h = labels[rng() % labels.size()];
                const auto& t = labels[rng() % labels.size()];
                if (text::normalize_label(h) == text::normalize_label(t)) continue;
                c.push_back({h, rng() % 2 ? "rel" : "Rel", t});
            }
        }
        const auto g = assemble_graph("d", chunks);
        validate_graph(g);
        EXPECT_EQ(assemble_graph("d", {graph_triples(g)}), g);
    }
}

TEST(MockExtract, ReadsSidecar) {
    const fs::path dir = fs::temp_directory_path() / "kgi_kgx_mock";
    fs::create_directories(dir);
    std::ofstream(dir / "a.triples") << "# comment\n\nA | causes | B\nB|inhibits|C\n";
    std::ofstream(dir / "bad.triples") << "A | B\n";
    std::ofstream(dir / "empty.triples") << "# nothing\n";
    EXPECT_EQ(mock_extract("ignored", dir / "a.triples"),
              (std::vector<Triple>{{"A", "causes", "B"}, {"B", "inhibits", "C"}}));
    EXPECT_THROW(mock_extract("", dir / "bad.triples"), ParseError);
    EXPECT_TRUE(mock_extract("", dir / "empty.triples").empty());
    EXPECT_THROW(mock_extract("", dir / "missing.triples"), Error);
    fs::remove_all(dir);
}

TEST(GraphIo, JsonLineRoundTripAndResumeFile) {
    const auto g = assemble_graph("doc-1", {{{"A", "r", "B"}, {"B", "s", "C \"q\""}}});
    EXPECT_EQ(graph_from_json_line(graph_to_json_line(g)), g);
    const fs::path file = fs::temp_directory_path() / "kgi_graphs_test.jsonl";
    fs::remove(file);
    EXPECT_TRUE(load_graphs(file).empty());
    append_graphs(file, {g});
    append_graphs(file, {assemble_graph("doc-2", {})});
    const auto loaded = load_graphs(file);
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded.at("doc-1"), g);
    EXPECT_TRUE(loaded.at("doc-2").is_empty());
    fs::remove(file);
}

TEST(GraphIo, ValidateRejectsBadGraphs) {
    DocumentGraph g{"d", {"a", "A"}, {}};
    EXPECT_THROW(validate_graph(g), ParseError);
    DocumentGraph h{"d", {"a", "b"}, {{0, 2, "r"}}};
    EXPECT_THROW(validate_graph(h), ParseError);
    DocumentGraph k{"d", {"a", "b"}, {{1, 1, "r"}}};
    EXPECT_THROW(validate_graph(k), ParseError);
}

TEST(LlmClient, GeminiShapedRequestWithRateLimit) {
    httplib::Server server;
    int calls = 0;
    std::string seen_key, seen_body;
    server.Post(R"(/v1beta/models/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        if (calls == 1) {
            res.status = 429;
            return;
        }
        seen_key = req.get_header_value("x-goog-api-key");
        seen_body = req.body;
        res.set_content(
            R"({"candidates": [{"content": {"parts": [{"text": "[{\"node_1\": \"a\", "}, {"text": "\"edge\": \"b\", \"node_2\": \"c\"}]"}]}}]})",
            "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("KGI_TEST_LLM_KEY", "k-123", 1);
    LlmConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1beta";
    c.api_key_env = "KGI_TEST_LLM_KEY";
    c.backoff_base_ms = 1;
    LlmClient client(c);
    const auto parsed = extract_chunk(client, build_prompt("some text", PromptTemplate::bundled()));
    server.stop();
    t.join();

    EXPECT_EQ(calls, 2);
    EXPECT_EQ(seen_key, "k-123");
    EXPECT_NE(seen_body.find("some text"), std::string::npos);
    EXPECT_NE(seen_body.find("\"contents\""), std::string::npos);
    ASSERT_EQ(parsed.triples.size(), 1u);
    EXPECT_EQ(parsed.triples[0], (Triple{"a", "b", "c"}));
}
