#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgi::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
    int status = 0;  // 0: no response (connection failure, timeout)
    std::string body;
};

// Minimal request surface shared by the scholarly-API, LLM and embedding
// clients. `target` is a path plus optional query, relative to the base.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response get(const std::string& target, const Headers& headers) = 0;
    virtual Response post(const std::string& target, const std::string& body,
                          const std::string& content_type, const Headers& headers) = 0;
};

// Real HTTP(S). base_url may carry a path prefix ("https://host/graph/v1").
std::unique_ptr<Transport> make_http_transport(const std::string& base_url, double timeout_seconds);

// Fixture mode: serves canned JSON from a directory. A GET for
// "/a/b?query=X&..." reads "<root>/a/b/X.json"; without a `query` parameter
// it reads "<root>/a/b.json". Missing files answer 404. POST answers 405.
class DirectoryTransport final : public Transport {
public:
    explicit DirectoryTransport(std::filesystem::path root);
    Response get(const std::string& target, const Headers& headers) override;
    Response post(const std::string& target, const std::string& body,
                  const std::string& content_type, const Headers& headers) override;
    std::filesystem::path resolve(const std::string& target) const;

private:
    std::filesystem::path root_;
};

// http:// or https:// → HTTP transport, anything else → DirectoryTransport.
std::unique_ptr<Transport> make_transport(const std::string& base, double timeout_seconds);

struct RetryPolicy {
    int max_retries = 3;
    int backoff_base_ms = 500;
};

// Issues `request` until it returns a 2xx. Retriable statuses (0, 408, 429,
// 5xx) back off exponentially; anything else, or exhausting the retries,
// throws HttpError carrying the last status.
Response with_retries(const RetryPolicy& policy, const std::string& what,
                      const std::function<Response()>& request);

std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

// Value of a query parameter in a target string.
std::optional<std::string> query_param(std::string_view target, std::string_view key);

// Reads an API key from the environment. Empty name → nullopt.
std::optional<std::string> env_value(const std::string& name);

}  // namespace kgi::http
