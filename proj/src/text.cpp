#include "kgi/text.hpp"

#include <cctype>

namespace kgi::text {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Length of the UTF-8 sequence starting at s[i], or 1 if it is malformed.
std::size_t sequence_length(std::string_view s, std::size_t i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead <= 0xF4) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC2 && lead <= 0xDF) len = 2;
    if (lead < 0x80 || len == 1) return 1;
    if (i + len > s.size()) return 1;
    for (std::size_t k = 1; k < len; ++k) {
        if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
    }
    return len;
}

}  // namespace

std::vector<std::size_t> codepoint_offsets(std::string_view s) {
    std::vector<std::size_t> offsets;
    offsets.reserve(s.size() + 1);
    for (std::size_t i = 0; i < s.size(); i += sequence_length(s, i)) offsets.push_back(i);
    offsets.push_back(s.size());
    return offsets;
}

std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); i += sequence_length(s, i)) ++n;
    return n;
}

std::string slice_codepoints(std::string_view s, const std::vector<std::size_t>& offsets,
                             std::size_t begin, std::size_t end) {
    const std::size_t b = offsets[begin];
    return std::string(s.substr(b, offsets[end] - b));
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char ch : s) {
        if (is_space(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(ch);
    }
    return out;
}

std::string fold_case(std::string_view s) {
    std::string out(s);
    for (char& ch : out) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) ch = static_cast<char>(std::tolower(c));
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<Token> tokenize_words(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const auto is_word = [](unsigned char c) { return c >= 0x80 || std::isalnum(c); };
    while (i < s.size()) {
        while (i < s.size() && !is_word(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        const std::size_t begin = i;
        while (i < s.size() && is_word(static_cast<unsigned char>(s[i]))) ++i;
        tokens.push_back({fold_case(s.substr(begin, i - begin)), begin, i});
    }
    return tokens;
}

}  // namespace kgi::text
