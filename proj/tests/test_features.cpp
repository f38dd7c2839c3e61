#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kgi/errors.hpp"
#include "kgi/features.hpp"

using namespace kgi;
namespace fs = std::filesystem;

namespace {

// Echoes each text's length into every coordinate; records requests.
class FakeEmbedTransport final : public http::Transport {
public:
    std::vector<std::string> bodies;
    std::size_t dim = 3;
    http::Response get(const std::string&, const http::Headers&) override { return {405, ""}; }
    http::Response post(const std::string&, const std::string& body, const std::string&,
                        const http::Headers&) override {
        bodies.push_back(body);
        const auto j = nlohmann::json::parse(body);
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& t : j.at("texts")) rows.push_back(std::vector<double>(dim, double(t.get<std::string>().size())));
        return {200, nlohmann::json{{"vectors", rows}}.dump()};
    }
};

// Counts how many texts reach it.
class CountingProvider final : public EmbeddingProvider {
public:
    std::size_t calls = 0;
    std::size_t dimension() const override { return 2; }
    std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) override {
        calls += texts.size();
        std::vector<Eigen::VectorXd> out;
        for (const auto& t : texts) out.push_back(Eigen::Vector2d(double(t.size()), 1.0));
        return out;
    }
    std::string describe() const override { return "counting"; }
};

}  // namespace

TEST(HashProvider, UnitNormDeterministicAndNormalized) {
    HashEmbeddingProvider p(32, 9);
    const auto a = p.embed_one("Carbon Dioxide");
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
    EXPECT_EQ(a, HashEmbeddingProvider(32, 9).embed_one("Carbon Dioxide"));
    EXPECT_EQ(a, p.embed_one("  carbon   DIOXIDE "));
    EXPECT_NE(a, p.embed_one("carbon monoxide"));
    EXPECT_NE(a, HashEmbeddingProvider(32, 10).embed_one("Carbon Dioxide"));
    EXPECT_EQ(p.describe(), "hash(dim=32,seed=9)");
}

TEST(HashProvider, DistinctLabelsNearlyOrthogonal) {
    HashEmbeddingProvider p(384, 0);
    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
        for (int j = i + 1; j < 30; ++j) {
            worst = std::max(worst, std::abs(p.embed_one("label " + std::to_string(i)).dot(p.embed_one("label " + std::to_string(j)))));
        }
    }
    EXPECT_LT(worst, 0.3);
}

TEST(HashProvider, RejectsEmptyText) {
    HashEmbeddingProvider p(8);
    EXPECT_THROW(embed_text(p, "   "), ArgumentError);
    EXPECT_THROW(HashEmbeddingProvider(0), ArgumentError);
}

TEST(ServiceProvider, BatchesAndTruncates) {
    auto transport = std::make_unique<FakeEmbedTransport>();
    auto* raw = transport.get();
    EmbeddingServiceConfig c;
    c.dimension = 3;
    c.batch_size = 2;
    c.max_chars = 4;
    ServiceEmbeddingProvider p(c, std::move(transport));
    const auto out = p.embed_batch({"a", "bb", "ccccccc"});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(raw->bodies.size(), 2u);
    EXPECT_DOUBLE_EQ(out[0][0], 1.0);
    EXPECT_DOUBLE_EQ(out[1][2], 2.0);
    EXPECT_DOUBLE_EQ(out[2][1], 4.0);
    EXPECT_EQ(p.truncated_count(), 1u);
}

TEST(ServiceProvider, DimensionMismatchIsParseError) {
    auto transport = std::make_unique<FakeEmbedTransport>();
    transport->dim = 5;
    EmbeddingServiceConfig c;
    c.dimension = 3;
    ServiceEmbeddingProvider p(c, std::move(transport));
    EXPECT_THROW(p.embed_batch({"x"}), ParseError);
}

TEST(CachedProvider, MemoizesByNormalizedKeyAndPersists) {
    const fs::path file = fs::temp_directory_path() / "kgi_embed_cache_test.jsonl";
    fs::remove(file);
    CountingProvider inner;
    {
        CachedEmbeddingProvider cached(inner, file);
        const auto v = cached.embed_batch({"Foo", "foo ", "bar", "FOO"});
        EXPECT_EQ(inner.calls, 2u);
        EXPECT_EQ(v[0], v[1]);
        EXPECT_EQ(v[0], v[3]);
        EXPECT_EQ(cached.size(), 2u);
        cached.flush();
    }
    CachedEmbeddingProvider reloaded(inner, file);
    EXPECT_EQ(reloaded.size(), 2u);
    reloaded.embed_batch({"foo", "bar"});
    EXPECT_EQ(inner.calls, 2u);
    EXPECT_EQ(reloaded.hits(), 2u);
    fs::remove(file);
}

TEST(Featurize, RowsFollowNodeOrder) {
    HashEmbeddingProvider p(16, 2);
    DocumentGraph g{"d", {"alpha", "beta"}, {{0, 1, "r"}}};
    const auto x = featurize_graph(p, g);
    ASSERT_EQ(x.rows(), 2);
    EXPECT_EQ(Eigen::VectorXd(x.row(1).transpose()), p.embed_one("beta"));
    EXPECT_THROW(featurize_graph(p, DocumentGraph{"e", {}, {}}), ArgumentError);
}
