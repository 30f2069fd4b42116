#include "evolen/encoder.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "evolen/parallel.hpp"

namespace evolen {

ScoredVocabulary ScoredVocabulary::from_tokens(const std::vector<std::string>& tokens,
                                               int exponent) {
    if (exponent != 1 && exponent != 2)
        throw std::invalid_argument("length exponent must be 1 or 2");

    ScoredVocabulary vocab;
    vocab.exponent_ = exponent;
    vocab.nodes_.emplace_back(); // root
    bool has_base[4] = {false, false, false, false};

    for (const auto& token : tokens) {
        if (!all_acgt(token))
            throw std::invalid_argument("vocabulary token '" + token + "' not over {A,C,G,T}");
        std::int32_t node = 0;
        for (char c : token) {
            int b = base_index(c);
            std::int32_t next = vocab.nodes_[static_cast<std::size_t>(node)].child[b];
            if (next < 0) {
                next = static_cast<std::int32_t>(vocab.nodes_.size());
                vocab.nodes_[static_cast<std::size_t>(node)].child[b] = next;
                vocab.nodes_.emplace_back();
            }
            node = next;
        }
        auto& leaf = vocab.nodes_[static_cast<std::size_t>(node)];
        if (leaf.entry >= 0)
            throw std::invalid_argument("duplicate vocabulary token '" + token + "'");
        leaf.entry = static_cast<std::int32_t>(vocab.entries_.size());
        std::uint64_t len = token.size();
        vocab.entries_.push_back({token, exponent == 2 ? len * len : len});
        vocab.max_len_ = std::max(vocab.max_len_, token.size());
        if (token.size() == 1) has_base[base_index(token[0])] = true;
    }
    for (int b = 0; b < 4; ++b)
        if (!has_base[b])
            throw std::invalid_argument(std::string("vocabulary missing base token ") + kBases[b]);
    return vocab;
}

std::optional<std::size_t> ScoredVocabulary::find(std::string_view token) const {
    std::int32_t node = 0;
    for (char c : token) {
        int b = base_index(c);
        if (b < 0) return std::nullopt;
        node = nodes_[static_cast<std::size_t>(node)].child[b];
        if (node < 0) return std::nullopt;
    }
    std::int32_t entry = nodes_[static_cast<std::size_t>(node)].entry;
    if (entry < 0) return std::nullopt;
    return static_cast<std::size_t>(entry);
}

ScoredVocabulary build_scored_vocab(const MergeReport& report, int exponent) {
    return ScoredVocabulary::from_tokens(report.final_tokens, exponent);
}

namespace {

// DP over one N-free run: best[i] = max score of seq[0, i), backpointer
// stores the entry index of the final token. Ties prefer the longer token.
void encode_run(const ScoredVocabulary& vocab, std::string_view run, std::size_t run_offset,
                std::vector<TokenSpan>& out) {
    const std::size_t n = run.size();
    std::vector<std::uint64_t> best(n + 1, 0);
    std::vector<std::int32_t> back(n + 1, -1);
    std::vector<std::uint32_t> back_len(n + 1, 0);

    for (std::size_t j = 0; j < n; ++j) {
        vocab.for_each_prefix(run, j, [&](std::size_t entry, std::size_t len) {
            std::size_t i = j + len;
            std::uint64_t cand = best[j] + vocab.entries()[entry].score;
            if (cand > best[i] || (cand == best[i] && len > back_len[i])) {
                best[i] = cand;
                back[i] = static_cast<std::int32_t>(entry);
                back_len[i] = static_cast<std::uint32_t>(len);
            }
        });
        if (j + 1 <= n && back[j + 1] < 0)
            throw std::logic_error("sequence position not coverable; base token missing");
    }

    std::size_t first = out.size();
    for (std::size_t i = n; i > 0; i -= back_len[i]) {
        const auto& entry = vocab.entries()[static_cast<std::size_t>(back[i])];
        out.push_back({entry.token, run_offset + i - back_len[i], run_offset + i});
    }
    std::reverse(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
}

} // namespace

std::vector<TokenSpan> encode_dp(const ScoredVocabulary& vocab, std::string_view sequence) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < sequence.size()) {
        char c = sequence[i];
        if (c == 'N') {
            spans.push_back({"N", i, i + 1});
            ++i;
            continue;
        }
        if (!is_acgt(c))
            throw std::invalid_argument(std::string("encode_dp: illegal character '") + c + "'");
        std::size_t run_end = i;
        while (run_end < sequence.size() && is_acgt(sequence[run_end])) ++run_end;
        encode_run(vocab, sequence.substr(i, run_end - i), i, spans);
        i = run_end;
    }
    return spans;
}

std::uint64_t total_score(const ScoredVocabulary& vocab, const std::vector<TokenSpan>& spans) {
    std::uint64_t total = 0;
    for (const auto& s : spans) {
        if (s.token == "N") continue;
        auto idx = vocab.find(s.token);
        if (!idx) throw std::invalid_argument("span token '" + s.token + "' not in vocabulary");
        total += vocab.entries()[*idx].score;
    }
    return total;
}

std::vector<std::vector<TokenSpan>> encode_records(const ScoredVocabulary& vocab,
                                                   const std::vector<SequenceRecord>& records,
                                                   std::size_t threads) {
    std::vector<std::vector<TokenSpan>> result(records.size());
    parallel_chunks(records.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t r = begin; r < end; ++r) result[r] = encode_dp(vocab, records[r].bases);
    });
    return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string tokenizer_checksum(int exponent, const std::vector<ScoredVocabulary::Entry>& entries) {
    std::uint64_t h = fnv1a64("evolen-tokenizer-v1");
    h = fnv1a64(std::to_string(exponent), h);
    for (const auto& e : entries) {
        h = fnv1a64(e.token, h);
        h = fnv1a64(":" + std::to_string(e.score) + ";", h);
    }
    return to_hex(h);
}

} // namespace

std::string serialize_tokenizer(const ScoredVocabulary& vocab) {
    nlohmann::json j;
    j["version"] = 1;
    j["length_exponent"] = vocab.length_exponent();
    j["checksum"] = tokenizer_checksum(vocab.length_exponent(), vocab.entries());
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& e : vocab.entries()) {
        nlohmann::json t;
        t["token"] = e.token;
        t["score"] = e.score;
        tokens.push_back(std::move(t));
    }
    j["tokens"] = std::move(tokens);
    return j.dump(2) + "\n";
}

ScoredVocabulary load_tokenizer(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("tokenizer: invalid JSON: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw std::runtime_error("tokenizer: unsupported version");
    int exponent = j.at("length_exponent").get<int>();
    if (exponent != 1 && exponent != 2)
        throw std::runtime_error("tokenizer: length_exponent must be 1 or 2");

    std::vector<std::string> tokens;
    for (const auto& t : j.at("tokens")) {
        std::string token = t.at("token").get<std::string>();
        std::uint64_t score = t.at("score").get<std::uint64_t>();
        std::uint64_t len = token.size();
        std::uint64_t expected = exponent == 2 ? len * len : len;
        if (score != expected)
            throw std::runtime_error("tokenizer: token '" + token + "' has score " +
                                     std::to_string(score) + ", expected " +
                                     std::to_string(expected));
        tokens.push_back(std::move(token));
    }

    ScoredVocabulary vocab;
    try {
        vocab = ScoredVocabulary::from_tokens(tokens, exponent);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("tokenizer: ") + e.what());
    }
    if (!j.contains("checksum") ||
        j["checksum"].get<std::string>() != tokenizer_checksum(exponent, vocab.entries()))
        throw std::runtime_error("tokenizer: checksum mismatch");
    return vocab;
}

void save_tokenizer(const ScoredVocabulary& vocab, const std::string& path) {
    write_text_file(path, serialize_tokenizer(vocab));
}

ScoredVocabulary load_tokenizer_file(const std::string& path) {
    try {
        return load_tokenizer(read_text_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace evolen
