#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "kgi/corpus.hpp"
#include "kgi/errors.hpp"

using namespace kgi;
namespace fs = std::filesystem;

namespace {

Document doc(std::string id, std::string subject, std::set<std::string> cites = {}) {
    Document d;
    d.id = std::move(id);
    d.subject = std::move(subject);
    d.text = "text of " + d.id;
    d.cites = std::move(cites);
    return d;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kgi_corpus_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Corpus, RejectsInvalidDocuments) {
    Corpus c;
    EXPECT_THROW(c.add(doc("", "s")), ParseError);
    EXPECT_THROW(c.add(doc("a", "")), ParseError);
    EXPECT_THROW(c.add(doc("a", "s", {"a"})), ParseError);
    c.add(doc("a", "s"));
    EXPECT_THROW(c.add(doc("a", "s")), ParseError);
}

TEST(Corpus, EmptyRoundTrip) {
    const auto dir = scratch("empty");
    save_corpus(Corpus{}, dir);
    EXPECT_TRUE(load_corpus(dir).empty());
    fs::remove(dir / kCorpusFile);
    EXPECT_TRUE(load_corpus(dir).empty());
    EXPECT_THROW(load_corpus(dir / "missing"), Error);
}

TEST(Corpus, RoundTripPreservesEverything) {
    Corpus c;
    auto a = doc("a", "physics", {"b"});
    a.external_cites = {"ext-1"};
    a.text = "Unicode \xe2\x80\x94 text, with \"quotes\"\nand newlines";
    c.add(a);
    c.add(doc("b", "physics"));
    c.add(doc("c", "biology", {"d"}));
    c.add(doc("d", "biology"));
    c.add(doc("e", "biology", {"c"}));
    const auto dir = scratch("roundtrip");
    save_corpus(c, dir);
    const Corpus back = load_corpus(dir);
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.subjects().size(), 2u);
    EXPECT_EQ(back.ids_in_subject("biology"), (std::vector<std::string>{"c", "d", "e"}));
}

TEST(Corpus, LoadRejectsDuplicatesAndUnresolvedCites) {
    const auto dir = scratch("bad");
    const std::string line = document_to_json_line(doc("a", "s"));
    std::ofstream(dir / kCorpusFile) << line << "\n" << line << "\n";
    EXPECT_THROW(load_corpus(dir), Error);
    std::ofstream(dir / kCorpusFile, std::ios::trunc) << document_to_json_line(doc("a", "s", {"zz"})) << "\n";
    EXPECT_THROW(load_corpus(dir), Error);
}

TEST(Corpus, CitationIsSymmetric) {
    Corpus c;
    c.add(doc("a", "s", {"b"}));
    c.add(doc("b", "s"));
    c.add(doc("c", "s"));
    EXPECT_TRUE(citation_exists(c, "a", "b"));
    EXPECT_TRUE(citation_exists(c, "b", "a"));
    EXPECT_FALSE(citation_exists(c, "a", "c"));
    for (const auto* x : {"a", "b", "c"}) {
        for (const auto* y : {"a", "b", "c"}) EXPECT_EQ(citation_exists(c, x, y), citation_exists(c, y, x));
    }
    EXPECT_THROW(citation_exists(c, "a", "nope"), ArgumentError);
}

TEST(Corpus, ResolveCitationsMovesUnknownIdsToExternal) {
    Corpus c;
    auto a = doc("a", "s");
    a.external_cites = {"b", "far"};
    c.add(a);
    c.add(doc("b", "s"));
    c.resolve_citations();
    EXPECT_EQ(c.at("a").cites, (std::set<std::string>{"b"}));
    EXPECT_EQ(c.at("a").external_cites, (std::set<std::string>{"far"}));
}
