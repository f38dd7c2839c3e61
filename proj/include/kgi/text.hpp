#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgi::text {

// Byte offset of every code point in `s`, followed by s.size().
// Invalid UTF-8 bytes count as one code point each.
std::vector<std::size_t> codepoint_offsets(std::string_view s);

std::size_t codepoint_count(std::string_view s);

// Substring by code point range [begin, end).
std::string slice_codepoints(std::string_view s, const std::vector<std::size_t>& offsets,
                             std::size_t begin, std::size_t end);

std::string trim(std::string_view s);

// Trim and collapse internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view s);

// ASCII case fold. Non-ASCII bytes pass through unchanged.
std::string fold_case(std::string_view s);

// Identity key for node labels and embedding cache entries.
inline std::string normalize_label(std::string_view s) { return fold_case(collapse_whitespace(s)); }

std::uint64_t fnv1a64(std::string_view s);

struct Token {
    std::string word;  // lowercased
    std::size_t begin; // byte offsets into the source text
    std::size_t end;
};

// Lowercased alphanumeric word runs. Bytes >= 0x80 are treated as word bytes
// so UTF-8 letters stay inside words.
std::vector<Token> tokenize_words(std::string_view s);

}  // namespace kgi::text
