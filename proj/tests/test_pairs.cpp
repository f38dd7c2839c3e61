#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "kgi/errors.hpp"
#include "kgi/pairs.hpp"

using namespace kgi;
namespace fs = std::filesystem;

namespace {

Corpus abc_corpus() {
    Corpus c;
    c.add({"A", "s", "text a", {"B"}, {}});
    c.add({"B", "s", "text b", {}, {}});
    c.add({"C", "s", "text c", {}, {}});
    return c;
}

std::vector<PairSample> make_pairs(std::size_t pos, std::size_t neg) {
    std::vector<PairSample> out;
    for (std::size_t i = 0; i < pos + neg; ++i) {
        out.push_back(make_pair_sample("d" + std::to_string(i), "e" + std::to_string(i),
                                       i < pos ? PairLabel::Positive : PairLabel::Negative, "s"));
    }
    return out;
}

std::size_t count(const std::vector<PairSample>& v, PairLabel l) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const auto& p) { return p.label == l; }));
}

}  // namespace

TEST(PairSample, CanonicalOrderAndDistinctDocs) {
    const auto p = make_pair_sample("z", "a", PairLabel::Positive, "s");
    EXPECT_EQ(p.doc_a, "a");
    EXPECT_EQ(p.doc_b, "z");
    EXPECT_THROW(make_pair_sample("a", "a", PairLabel::Positive, "s"), ArgumentError);
    EXPECT_EQ(parse_label(to_string(PairLabel::Negative)), PairLabel::Negative);
    EXPECT_THROW(parse_label("maybe"), ParseError);
}

TEST(SamplePairs, ThreeDocumentExample) {
    const auto s = sample_pairs(abc_corpus(), 1, 2, 0);
    ASSERT_EQ(s.pairs.size(), 3u);
    EXPECT_EQ(s.pairs[0], make_pair_sample("A", "B", PairLabel::Positive, "s"));
    std::set<std::pair<std::string, std::string>> negs;
    for (std::size_t i = 1; i < 3; ++i) {
        EXPECT_EQ(s.pairs[i].label, PairLabel::Negative);
        negs.emplace(s.pairs[i].doc_a, s.pairs[i].doc_b);
    }
    EXPECT_EQ(negs, (std::set<std::pair<std::string, std::string>>{{"A", "C"}, {"B", "C"}}));
    EXPECT_EQ(s.positive_shortfall, 0u);
}

TEST(SamplePairs, EmptyRequestShortfallAndErrors) {
    EXPECT_TRUE(sample_pairs(abc_corpus(), 0, 0, 1).pairs.empty());
    const auto s = sample_pairs(abc_corpus(), 3, 5, 1);
    EXPECT_EQ(s.pairs.size(), 3u);
    EXPECT_EQ(s.positive_shortfall, 2u);
    EXPECT_EQ(s.negative_shortfall, 3u);
    EXPECT_THROW(sample_pairs(abc_corpus(), -1, 0, 1), ArgumentError);
    Corpus lonely;
    lonely.add({"x", "s1", "t", {}, {}});
    lonely.add({"y", "s2", "t", {}, {}});
    EXPECT_THROW(sample_pairs(lonely, 1, 1, 1), ArgumentError);
}

TEST(SamplePairs, DeterministicPerSeedAndNeverCrossesSubjects) {
    Corpus c;
    for (int s = 0; s < 3; ++s) {
        for (int d = 0; d < 6; ++d) {
            std::set<std::string> cites;
            if (d > 0) cites.insert("s" + std::to_string(s) + "d" + std::to_string(d - 1));
            c.add({"s" + std::to_string(s) + "d" + std::to_string(d), "sub" + std::to_string(s), "t", cites, {}});
        }
    }
    c.resolve_citations();
    const auto a = sample_pairs(c, 5, 8, 11);
    EXPECT_EQ(a.pairs, sample_pairs(c, 5, 8, 11).pairs);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : a.pairs) {
        EXPECT_EQ(c.at(p.doc_a).subject, c.at(p.doc_b).subject);
        EXPECT_EQ(p.subject, c.at(p.doc_a).subject);
        EXPECT_EQ(p.label == PairLabel::Positive, citation_exists(c, p.doc_a, p.doc_b));
        EXPECT_TRUE(seen.emplace(p.doc_a, p.doc_b).second);
    }
}

TEST(DefaultNegatives, FollowsRatio) {
    EXPECT_EQ(default_negative_count(8500), 13500u);
    EXPECT_EQ(default_negative_count(0), 0u);
    EXPECT_EQ(default_negative_count(7), 11u);
}

TEST(SplitPairs, TenPairExample) {
    const auto split = split_pairs(make_pairs(4, 6), 0.8, 5);
    EXPECT_EQ(split.train.size(), 8u);
    EXPECT_EQ(split.test.size(), 2u);
    const auto tp = count(split.train, PairLabel::Positive);
    EXPECT_GE(tp, 3u);
    EXPECT_LE(tp, 4u);
    const auto tn = count(split.train, PairLabel::Negative);
    EXPECT_GE(tn, 4u);
    EXPECT_LE(tn, 5u);
}

TEST(SplitPairs, DisjointExhaustiveDeterministicStratified) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t pos = 1 + seed % 9, neg = 2 + (seed * 7) % 13;
        const auto pairs = make_pairs(pos, neg);
        const auto s = split_pairs(pairs, 0.8, seed);
        std::set<std::string> train_ids, test_ids;
        for (const auto& p : s.train) train_ids.insert(pair_id(p));
        for (const auto& p : s.test) test_ids.insert(pair_id(p));
        for (const auto& id : test_ids) EXPECT_FALSE(train_ids.count(id));
        EXPECT_EQ(train_ids.size() + test_ids.size(), pairs.size());
        EXPECT_LE(std::abs(double(count(s.train, PairLabel::Positive)) - 0.8 * pos), 1.0);
        EXPECT_LE(std::abs(double(count(s.train, PairLabel::Negative)) - 0.8 * neg), 1.0);
        const auto again = split_pairs(pairs, 0.8, seed);
        EXPECT_EQ(again.train, s.train);
        EXPECT_EQ(again.test, s.test);
    }
    EXPECT_THROW(split_pairs({}, 0.8, 0), ArgumentError);
    EXPECT_THROW(split_pairs(make_pairs(1, 1), 1.0, 0), ArgumentError);
}

TEST(PairsCsv, RoundTrip) {
    const fs::path file = fs::temp_directory_path() / "kgi_pairs_test.csv";
    const auto pairs = make_pairs(2, 3);
    write_pairs_csv(file, pairs);
    EXPECT_EQ(read_pairs_csv(file), pairs);
    fs::remove(file);
}
