#include "kgi/http.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "kgi/errors.hpp"

namespace kgi::http {

namespace {

class HttpTransport final : public Transport {
public:
    HttpTransport(const std::string& base_url, double timeout_seconds) {
        // split "scheme://host[:port]/prefix"
        const auto scheme_end = base_url.find("://");
        const auto path_begin = base_url.find('/', scheme_end + 3);
        const std::string origin = base_url.substr(0, path_begin);
        if (path_begin != std::string::npos) prefix_ = base_url.substr(path_begin);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(origin);
        const auto secs = static_cast<time_t>(timeout_seconds);
        const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
        client_->set_connection_timeout(secs, usecs);
        client_->set_read_timeout(secs, usecs);
        client_->set_write_timeout(secs, usecs);
        client_->set_follow_location(true);
    }

    Response get(const std::string& target, const Headers& headers) override {
        return convert(client_->Get(prefix_ + target, to_httplib(headers)));
    }

    Response post(const std::string& target, const std::string& body, const std::string& content_type,
                  const Headers& headers) override {
        return convert(client_->Post(prefix_ + target, to_httplib(headers), body, content_type));
    }

private:
    static httplib::Headers to_httplib(const Headers& headers) {
        httplib::Headers out;
        for (const auto& [k, v] : headers) out.emplace(k, v);
        return out;
    }

    static Response convert(const httplib::Result& result) {
        if (!result) return {0, httplib::to_string(result.error())};
        return {result->status, result->body};
    }

    std::string prefix_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url, double timeout_seconds) {
    return std::make_unique<HttpTransport>(base_url, timeout_seconds);
}

DirectoryTransport::DirectoryTransport(std::filesystem::path root) : root_(std::move(root)) {
    if (!std::filesystem::is_directory(root_)) {
        throw ArgumentError("fixture directory does not exist: " + root_.string());
    }
}

std::filesystem::path DirectoryTransport::resolve(const std::string& target) const {
    std::string path = target.substr(0, target.find('?'));
    while (!path.empty() && path.front() == '/') path.erase(path.begin());
    std::filesystem::path file = root_;
    for (std::size_t begin = 0; begin < path.size();) {
        auto end = path.find('/', begin);
        if (end == std::string::npos) end = path.size();
        const std::string segment = url_decode(path.substr(begin, end - begin));
        if (segment == "..") throw ArgumentError("fixture path escapes root: " + target);
        if (!segment.empty()) file /= segment;
        begin = end + 1;
    }
    if (auto q = query_param(target, "query")) file /= *q;
    file += ".json";
    return file;
}

Response DirectoryTransport::get(const std::string& target, const Headers&) {
    const auto file = resolve(target);
    std::ifstream in(file, std::ios::binary);
    if (!in) return {404, "not found: " + file.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return {200, ss.str()};
}

Response DirectoryTransport::post(const std::string&, const std::string&, const std::string&,
                                  const Headers&) {
    return {405, "fixture directories are read-only"};
}

std::unique_ptr<Transport> make_transport(const std::string& base, double timeout_seconds) {
    if (base.rfind("http://", 0) == 0 || base.rfind("https://", 0) == 0) {
        return make_http_transport(base, timeout_seconds);
    }
    return std::make_unique<DirectoryTransport>(base);
}

Response with_retries(const RetryPolicy& policy, const std::string& what,
                      const std::function<Response()>& request) {
    for (int attempt = 0;; ++attempt) {
        Response r = request();
        if (r.status >= 200 && r.status < 300) return r;
        HttpError err(what + " failed with HTTP status " + std::to_string(r.status) +
                          (r.body.empty() ? "" : ": " + r.body.substr(0, 200)),
                      r.status);
        if (!err.retriable() || attempt >= policy.max_retries) throw err;
        if (policy.backoff_base_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(policy.backoff_base_ms) * (1LL << attempt));
        }
    }
}

std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string url_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else if (s[i] == '+') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::optional<std::string> query_param(std::string_view target, std::string_view key) {
    const auto q = target.find('?');
    if (q == std::string_view::npos) return std::nullopt;
    std::string_view rest = target.substr(q + 1);
    while (!rest.empty()) {
        const auto amp = rest.find('&');
        const std::string_view pair = rest.substr(0, amp);
        const auto eq = pair.find('=');
        if (pair.substr(0, eq) == key) {
            return eq == std::string_view::npos ? std::string{} : url_decode(pair.substr(eq + 1));
        }
        if (amp == std::string_view::npos) break;
        rest.remove_prefix(amp + 1);
    }
    return std::nullopt;
}

std::optional<std::string> env_value(const std::string& name) {
    if (name.empty()) return std::nullopt;
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

}  // namespace kgi::http
