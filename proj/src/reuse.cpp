#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "kgi/baselines.hpp"
#include "kgi/errors.hpp"
#include "kgi/text.hpp"

namespace kgi {

std::string trim_for_reuse(std::string_view text) {
    const auto offsets = text::codepoint_offsets(text);
    const std::size_t n = offsets.size() - 1;
    if (n <= kReuseHeadTrim + kReuseTailTrim) return {};
    return text::slice_codepoints(text, offsets, kReuseHeadTrim, n - kReuseTailTrim);
}

namespace {

std::uint64_t ngram_key(const std::vector<std::uint32_t>& ids, std::size_t at, std::size_t n) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < n; ++k) {
        h ^= ids[at + k] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::vector<WordRun> maximal_shared_runs(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                         std::size_t min_ngram) {
    if (min_ngram == 0) throw ArgumentError("min_ngram must be positive");
    std::vector<WordRun> runs;
    if (a.size() < min_ngram || b.size() < min_ngram) return runs;

    std::unordered_map<std::string_view, std::uint32_t> vocab;
    const auto intern = [&](const std::vector<std::string>& words) {
        std::vector<std::uint32_t> ids;
        ids.reserve(words.size());
        for (const auto& w : words) ids.push_back(vocab.try_emplace(w, static_cast<std::uint32_t>(vocab.size())).first->second);
        return ids;
    };
    const auto ia = intern(a);
    const auto ib = intern(b);

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seeds;
    for (std::size_t j = 0; j + min_ngram <= ib.size(); ++j) seeds[ngram_key(ib, j, min_ngram)].push_back(j);

    for (std::size_t i = 0; i + min_ngram <= ia.size(); ++i) {
        const auto it = seeds.find(ngram_key(ia, i, min_ngram));
        if (it == seeds.end()) continue;
        for (const std::size_t j : it->second) {
            // Only runs that start here; interior positions belong to an earlier seed.
            if (i > 0 && j > 0 && ia[i - 1] == ib[j - 1]) continue;
            std::size_t len = 0;
            while (i + len < ia.size() && j + len < ib.size() && ia[i + len] == ib[j + len]) ++len;
            if (len >= min_ngram) runs.push_back({i, j, len});
        }
    }
    std::sort(runs.begin(), runs.end());
    return runs;
}

std::vector<std::vector<std::size_t>> merge_runs(const std::vector<WordRun>& runs) {
    std::vector<std::size_t> parent(runs.size());
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const auto overlaps = [](std::size_t s1, std::size_t l1, std::size_t s2, std::size_t l2) {
        return s1 < s2 + l2 && s2 < s1 + l1;
    };
    for (std::size_t x = 0; x < runs.size(); ++x) {
        for (std::size_t y = x + 1; y < runs.size(); ++y) {
            if (overlaps(runs[x].a_word, runs[x].length, runs[y].a_word, runs[y].length) &&
                overlaps(runs[x].b_word, runs[x].length, runs[y].b_word, runs[y].length)) {
                const auto rx = find(x), ry = find(y);
                if (rx != ry) parent[std::max(rx, ry)] = std::min(rx, ry);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t x = 0; x < runs.size(); ++x) groups[find(x)].push_back(x);
    std::vector<std::vector<std::size_t>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

ReuseResult text_reuse_score(std::string_view a, std::string_view b, std::size_t min_ngram) {
    const auto ta = text::tokenize_words(a);
    const auto tb = text::tokenize_words(b);
    std::vector<std::string> wa, wb;
    wa.reserve(ta.size());
    wb.reserve(tb.size());
    for (const auto& t : ta) wa.push_back(t.word);
    for (const auto& t : tb) wb.push_back(t.word);

    const auto runs = maximal_shared_runs(wa, wb, min_ngram);
    const auto groups = merge_runs(runs);

    const auto oa = text::codepoint_offsets(a);
    const auto ob = text::codepoint_offsets(b);
    const auto to_cp = [](const std::vector<std::size_t>& offsets, std::size_t byte) {
        return static_cast<std::size_t>(std::lower_bound(offsets.begin(), offsets.end(), byte) - offsets.begin());
    };

    ReuseResult result;
    result.score = groups.size();
    for (const auto& g : groups) {
        std::size_t a0 = wa.size(), a1 = 0, b0 = wb.size(), b1 = 0;
        for (const auto idx : g) {
            const auto& r = runs[idx];
            a0 = std::min(a0, r.a_word);
            a1 = std::max(a1, r.a_word + r.length);
            b0 = std::min(b0, r.b_word);
            b1 = std::max(b1, r.b_word + r.length);
        }
        ReuseMatch m;
        m.span_a = {to_cp(oa, ta[a0].begin), to_cp(oa, ta[a1 - 1].end)};
        m.span_b = {to_cp(ob, tb[b0].begin), to_cp(ob, tb[b1 - 1].end)};
        m.length = std::max(a1 - a0, b1 - b0);
        result.matches.push_back(m);
    }
    return result;
}

}  // namespace kgi
