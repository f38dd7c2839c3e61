#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgi {

struct Document {
    std::string id;
    std::string subject;
    std::string text;                       // verbatim, never trimmed here
    std::set<std::string> cites;            // resolvable inside the corpus
    std::set<std::string> external_cites;   // retained, never paired

    bool operator==(const Document&) const = default;
};

// Throws ParseError naming the field when a Document invariant fails.
void validate_document(const Document& doc);

// Subject-grouped documents keyed by id. Immutable once loaded; safe to share
// read-only across threads.
class Corpus {
public:
    // Rejects invalid documents and duplicate ids.
    void add(Document doc);

    bool contains(std::string_view id) const;
    const Document& at(std::string_view id) const;  // ArgumentError on unknown id
    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }

    const std::map<std::string, Document, std::less<>>& documents() const { return docs_; }
    std::set<std::string> subjects() const;
    std::vector<std::string> ids_in_subject(std::string_view subject) const;

    // Re-partitions every document's citations against the current id set:
    // ids present in the corpus go to `cites`, the rest to `external_cites`.
    void resolve_citations();

    bool operator==(const Corpus&) const = default;

private:
    std::map<std::string, Document, std::less<>> docs_;
};

// True iff either document cites the other. Unknown ids throw ArgumentError.
bool citation_exists(const Corpus& corpus, std::string_view a, std::string_view b);

inline constexpr const char* kCorpusFile = "documents.jsonl";

// `dir/documents.jsonl`, one JSON object per line, sorted by id.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Missing directory is an error; a directory without documents.jsonl is an
// empty corpus.
Corpus load_corpus(const std::filesystem::path& dir);

std::string document_to_json_line(const Document& doc);
Document document_from_json_line(std::string_view line);

}  // namespace kgi
