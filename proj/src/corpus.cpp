#include "kgi/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "kgi/errors.hpp"

namespace kgi {

using nlohmann::json;

void validate_document(const Document& doc) {
    if (doc.id.empty()) throw ParseError("document id is empty", "id");
    if (doc.subject.empty()) throw ParseError("document '" + doc.id + "' has an empty subject", "subject");
    if (doc.cites.contains(doc.id)) throw ParseError("document '" + doc.id + "' cites itself", "cites");
    for (const auto& c : doc.cites) {
        if (c.empty()) throw ParseError("document '" + doc.id + "' has an empty citation id", "cites");
        if (doc.external_cites.contains(c)) {
            throw ParseError("document '" + doc.id + "' lists '" + c + "' as both internal and external",
                             "external_cites");
        }
    }
}

void Corpus::add(Document doc) {
    validate_document(doc);
    if (docs_.contains(doc.id)) throw ParseError("duplicate document id '" + doc.id + "'", "id");
    std::string key = doc.id;
    docs_.emplace(std::move(key), std::move(doc));
}

bool Corpus::contains(std::string_view id) const { return docs_.find(id) != docs_.end(); }

const Document& Corpus::at(std::string_view id) const {
    auto it = docs_.find(id);
    if (it == docs_.end()) throw ArgumentError("unknown document id '" + std::string(id) + "'");
    return it->second;
}

std::set<std::string> Corpus::subjects() const {
    std::set<std::string> out;
    for (const auto& [id, doc] : docs_) out.insert(doc.subject);
    return out;
}

std::vector<std::string> Corpus::ids_in_subject(std::string_view subject) const {
    std::vector<std::string> out;
    for (const auto& [id, doc] : docs_) {
        if (doc.subject == subject) out.push_back(id);
    }
    return out;
}

void Corpus::resolve_citations() {
    for (auto& [id, doc] : docs_) {
        std::set<std::string> all = std::move(doc.cites);
        all.merge(doc.external_cites);
        doc.cites.clear();
        doc.external_cites.clear();
        for (auto& c : all) {
            if (c == id) continue;
            if (docs_.contains(c)) doc.cites.insert(c);
            else doc.external_cites.insert(c);
        }
    }
}

bool citation_exists(const Corpus& corpus, std::string_view a, std::string_view b) {
    const Document& da = corpus.at(a);
    const Document& db = corpus.at(b);
    return da.cites.contains(db.id) || db.cites.contains(da.id);
}

std::string document_to_json_line(const Document& doc) {
    json j;
    j["id"] = doc.id;
    j["subject"] = doc.subject;
    j["text"] = doc.text;
    j["cites"] = doc.cites;
    j["external_cites"] = doc.external_cites;
    return j.dump();
}

namespace {

std::set<std::string> string_set(const json& j, const char* field) {
    if (!j.contains(field)) return {};
    const json& arr = j.at(field);
    if (!arr.is_array()) throw ParseError(std::string("field '") + field + "' is not an array", field);
    std::set<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ParseError(std::string("field '") + field + "' holds a non-string", field);
        out.insert(v.get<std::string>());
    }
    return out;
}

std::string required_string(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw ParseError(std::string("missing or non-string field '") + field + "'", field);
    }
    return j.at(field).get<std::string>();
}

}  // namespace

Document document_from_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("document record is not an object");
    Document doc;
    doc.id = required_string(j, "id");
    doc.subject = required_string(j, "subject");
    doc.text = required_string(j, "text");
    doc.cites = string_set(j, "cites");
    doc.external_cites = string_set(j, "external_cites");
    return doc;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / kCorpusFile;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& [id, doc] : corpus.documents()) out << document_to_json_line(doc) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

Corpus load_corpus(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("corpus directory does not exist: " + dir.string());
    Corpus corpus;
    const auto path = dir / kCorpusFile;
    if (!std::filesystem::exists(path)) return corpus;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            corpus.add(document_from_json_line(line));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), e.field());
        }
    }
    for (const auto& [id, doc] : corpus.documents()) {
        for (const auto& c : doc.cites) {
            if (!corpus.contains(c)) {
                throw ParseError("document '" + id + "' cites '" + c + "', which is not in the corpus and not marked external",
                                 "cites");
            }
        }
    }
    return corpus;
}

}  // namespace kgi
