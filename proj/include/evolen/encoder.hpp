#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolen/common.hpp"
#include "evolen/genome_io.hpp"
#include "evolen/vocab_merge.hpp"

namespace evolen {

// One decoded span: seq[start, end) == token. N characters come out as
// their own single-character spans.
struct TokenSpan {
    std::string token;
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const TokenSpan&) const = default;
};

// Length-scored vocabulary with a 4-ary trie for all-prefix lookup.
// score(t) = |t|^p with p in {1,2}; scores are integers so the decoder is
// free of floating-point rounding. Always contains A,C,G,T, so every N-free
// sequence is segmentable.
class ScoredVocabulary {
public:
    struct Entry {
        std::string token;
        std::uint64_t score = 0;

        bool operator==(const Entry&) const = default;
    };

    static ScoredVocabulary from_tokens(const std::vector<std::string>& tokens, int exponent);

    const std::vector<Entry>& entries() const { return entries_; }
    int length_exponent() const { return exponent_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t max_token_len() const { return max_len_; }

    std::optional<std::size_t> find(std::string_view token) const;
    bool contains(std::string_view token) const { return find(token).has_value(); }

    // Calls fn(entry_index, token_length) for every vocabulary token that is
    // a prefix of text[pos..); O(max_token_len) trie walk.
    template <typename Fn>
    void for_each_prefix(std::string_view text, std::size_t pos, Fn&& fn) const {
        std::int32_t node = 0;
        for (std::size_t i = pos; i < text.size(); ++i) {
            int b = base_index(text[i]);
            if (b < 0) return;
            node = nodes_[static_cast<std::size_t>(node)].child[b];
            if (node < 0) return;
            std::int32_t entry = nodes_[static_cast<std::size_t>(node)].entry;
            if (entry >= 0) fn(static_cast<std::size_t>(entry), i - pos + 1);
        }
    }

private:
    struct TrieNode {
        std::int32_t child[4] = {-1, -1, -1, -1};
        std::int32_t entry = -1;
    };

    std::vector<Entry> entries_;
    std::vector<TrieNode> nodes_;
    int exponent_ = 2;
    std::size_t max_len_ = 1;
};

ScoredVocabulary build_scored_vocab(const MergeReport& report, int exponent);

// Globally score-optimal segmentation (DP over each N-free run; each N is
// its own span). Score ties at a DP cell prefer the longer final token.
std::vector<TokenSpan> encode_dp(const ScoredVocabulary& vocab, std::string_view sequence);

std::uint64_t total_score(const ScoredVocabulary& vocab, const std::vector<TokenSpan>& spans);

// Per-record encoding, parallel over records, deterministic for any thread
// count (results land in per-record slots).
std::vector<std::vector<TokenSpan>> encode_records(const ScoredVocabulary& vocab,
                                                   const std::vector<SequenceRecord>& records,
                                                   std::size_t threads = 1);

// Tokenizer file: JSON {version, length_exponent, checksum, tokens:[{token,
// score}...]} in merge order. Loading re-derives and enforces every
// invariant (scores are |t|^p, no duplicates, bases present).
std::string serialize_tokenizer(const ScoredVocabulary& vocab);
ScoredVocabulary load_tokenizer(const std::string& text);
void save_tokenizer(const ScoredVocabulary& vocab, const std::string& path);
ScoredVocabulary load_tokenizer_file(const std::string& path);

} // namespace evolen
