#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgi/corpus.hpp"
#include "kgi/http.hpp"

namespace kgi {

struct ScholarConfig {
    std::string base_url;          // http(s) URL or a fixture directory
    std::string api_key_env;       // name of the env var holding the key
    double timeout_seconds = 30.0;
    int max_retries = 3;
    int backoff_base_ms = 500;
    std::size_t concurrency = 4;   // parallel paper requests
    std::size_t page_size = 100;
};

// Client for a Semantic-Scholar-shaped API:
//   GET /paper/search?query=<subject>&offset=<o>&limit=<n>&fields=paperId
//       -> {"data": [{"paperId": ...}, ...], "next": <offset>?}
//   GET /paper/<id>?fields=paperId,text,references.paperId
//       -> {"paperId": ..., "text": ..., "references": [{"paperId": ...}, ...]}
class ScholarClient {
public:
    explicit ScholarClient(ScholarConfig config);
    ScholarClient(ScholarConfig config, std::unique_ptr<http::Transport> transport);

    // Up to `limit` documents with non-empty text, in API order. References
    // that are not among the returned documents land in external_cites.
    std::vector<Document> fetch_subject(const std::string& subject, std::size_t limit);

private:
    http::Headers headers() const;
    std::vector<std::string> search_page(const std::string& subject, std::size_t offset,
                                         std::size_t& next, bool& has_next);
    std::optional<Document> fetch_paper(const std::string& paper_id, const std::string& subject);

    ScholarConfig config_;
    std::unique_ptr<http::Transport> transport_;
};

}  // namespace kgi
