#include "kgi/scholar.hpp"

#include <set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "kgi/errors.hpp"
#include "kgi/parallel.hpp"
#include "kgi/text.hpp"

namespace kgi {

using nlohmann::json;

namespace {

json parse_body(const std::string& body, const std::string& what) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": response is not JSON (" + e.what() + ")", "<body>");
    }
}

}  // namespace

ScholarClient::ScholarClient(ScholarConfig config)
    : ScholarClient(config, http::make_transport(config.base_url, config.timeout_seconds)) {}

ScholarClient::ScholarClient(ScholarConfig config, std::unique_ptr<http::Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.concurrency == 0 || config_.page_size == 0)
        throw ArgumentError("scholar client needs concurrency and page_size of at least 1");
}

http::Headers ScholarClient::headers() const {
    http::Headers h;
    if (auto key = http::env_value(config_.api_key_env)) h.emplace_back("x-api-key", *key);
    return h;
}

std::vector<std::string> ScholarClient::search_page(const std::string& subject, std::size_t offset,
                                                    std::size_t& next, bool& has_next) {
    const std::string target = "/paper/search?query=" + http::url_encode(subject) +
                               "&offset=" + std::to_string(offset) +
                               "&limit=" + std::to_string(config_.page_size) + "&fields=paperId";
    const auto response = http::with_retries({config_.max_retries, config_.backoff_base_ms}, "search '" + subject + "'",
                                             [&] { return transport_->get(target, headers()); });
    const json j = parse_body(response.body, "search '" + subject + "'");
    if (!j.is_object() || !j.contains("data") || !j["data"].is_array()) {
        throw ParseError("search response lacks a 'data' array", "data");
    }
    std::vector<std::string> ids;
    for (const auto& entry : j["data"]) {
        if (!entry.is_object() || !entry.contains("paperId") || !entry["paperId"].is_string()) {
            throw ParseError("search result entry lacks a string 'paperId'", "data[].paperId");
        }
        ids.push_back(entry["paperId"].get<std::string>());
    }
    has_next = j.contains("next") && j["next"].is_number_unsigned() && j["next"].get<std::size_t>() > offset &&
               !ids.empty();
    next = has_next ? j["next"].get<std::size_t>() : 0;
    return ids;
}

std::optional<Document> ScholarClient::fetch_paper(const std::string& paper_id, const std::string& subject) {
    const std::string target = "/paper/" + http::url_encode(paper_id) + "?fields=paperId,text,references.paperId";
    const auto response = http::with_retries({config_.max_retries, config_.backoff_base_ms}, "paper '" + paper_id + "'",
                                             [&] { return transport_->get(target, headers()); });
    const json j = parse_body(response.body, "paper '" + paper_id + "'");
    if (!j.is_object()) throw ParseError("paper response is not an object", "<body>");
    if (!j.contains("paperId") || !j["paperId"].is_string()) throw ParseError("paper response lacks 'paperId'", "paperId");

    Document doc;
    doc.id = j["paperId"].get<std::string>();
    doc.subject = subject;
    if (j.contains("text") && !j["text"].is_null()) {
        if (!j["text"].is_string()) throw ParseError("field 'text' is not a string", "text");
        doc.text = j["text"].get<std::string>();
    }
    if (text::trim(doc.text).empty()) return std::nullopt;
    if (j.contains("references") && !j["references"].is_null()) {
        if (!j["references"].is_array()) throw ParseError("field 'references' is not an array", "references");
        for (const auto& ref : j["references"]) {
            if (!ref.is_object()) throw ParseError("reference entry is not an object", "references[]");
            if (!ref.contains("paperId") || ref["paperId"].is_null()) continue;  // unresolved reference
            if (!ref["paperId"].is_string()) throw ParseError("reference paperId is not a string", "references[].paperId");
            std::string rid = ref["paperId"].get<std::string>();
            if (!rid.empty() && rid != doc.id) doc.cites.insert(std::move(rid));
        }
    }
    return doc;
}

std::vector<Document> ScholarClient::fetch_subject(const std::string& subject, std::size_t limit) {
    if (limit == 0) throw ArgumentError("fetch limit must be at least 1");
    std::vector<Document> docs;
    std::set<std::string> seen;
    std::size_t offset = 0;
    std::size_t skipped = 0;
    bool more = true;
    while (more && docs.size() < limit) {
        std::size_t next = 0;
        const auto ids = search_page(subject, offset, next, more);
        offset = next;
        for (std::size_t begin = 0; begin < ids.size() && docs.size() < limit; begin += config_.concurrency) {
            const std::size_t end = std::min(ids.size(), begin + std::max<std::size_t>(1, config_.concurrency));
            std::vector<std::optional<Document>> window(end - begin);
            parallel_for(window.size(), config_.concurrency,
                         [&](std::size_t i) { window[i] = fetch_paper(ids[begin + i], subject); });
            for (auto& d : window) {
                if (docs.size() >= limit) break;
                if (!d) {
                    ++skipped;
                    continue;
                }
                if (!seen.insert(d->id).second) continue;
                docs.push_back(std::move(*d));
            }
        }
    }
    if (skipped > 0) spdlog::info("subject '{}': skipped {} papers without open-access text", subject, skipped);

    for (auto& d : docs) {
        std::set<std::string> internal;
        for (auto& c : d.cites) {
            if (seen.contains(c)) internal.insert(c);
            else d.external_cites.insert(c);
        }
        d.cites = std::move(internal);
    }
    return docs;
}

}  // namespace kgi
