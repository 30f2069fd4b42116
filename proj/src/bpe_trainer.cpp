#include "evolen/bpe_trainer.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "evolen/common.hpp"
#include "evolen/parallel.hpp"

namespace evolen {

void BpeVocabulary::validate() const {
    if (tokens.size() < 4) throw std::invalid_argument("vocabulary smaller than the 4 base tokens");
    for (std::size_t i = 0; i < 4; ++i)
        if (tokens[i] != std::string(1, kBases[i]))
            throw std::invalid_argument("tokens[0..3] must be A,C,G,T");
    if (tokens.size() != merges.size() + 4)
        throw std::invalid_argument("token/merge list length mismatch");
    if (!frequencies.empty() && frequencies.size() != tokens.size())
        throw std::invalid_argument("frequency list length mismatch");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!all_acgt(tokens[i]))
            throw std::invalid_argument("token '" + tokens[i] + "' not over {A,C,G,T}");
        if (!index.emplace(tokens[i], i).second)
            throw std::invalid_argument("duplicate token '" + tokens[i] + "'");
    }
    for (std::size_t k = 0; k < merges.size(); ++k) {
        const auto& [left, right] = merges[k];
        auto li = index.find(left);
        auto ri = index.find(right);
        if (li == index.end() || ri == index.end() || li->second >= k + 4 || ri->second >= k + 4)
            throw std::invalid_argument("merge " + std::to_string(k) +
                                        " references a token that does not precede it");
        if (left + right != tokens[k + 4])
            throw std::invalid_argument("token " + std::to_string(k + 4) +
                                        " does not equal its merge concatenation");
    }
}

namespace {

constexpr std::int64_t kNone = -1;

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct PairState {
    std::uint64_t count = 0;
    std::vector<std::int64_t> positions; // left-symbol indices; may contain stale entries
};

// Flat symbol storage: one linked list per N-free fragment, all fragments in
// one arena. tok < 0 marks a dead symbol.
struct Corpus {
    std::vector<std::int32_t> tok;
    std::vector<std::int64_t> prev;
    std::vector<std::int64_t> next;
};

} // namespace

BpeVocabulary train_bpe(const SequencePool& pool, const BpeTrainConfig& config) {
    return train_bpe(pool.sequences, category_label(pool.category), config);
}

BpeVocabulary train_bpe(const std::vector<SequenceRecord>& sequences, std::string category_label,
                        const BpeTrainConfig& config) {
    if (sequences.empty()) throw std::invalid_argument("train_bpe: empty pool");
    if (config.target_size < 4) throw std::invalid_argument("train_bpe: target_size < 4");

    BpeVocabulary vocab;
    vocab.category_label = std::move(category_label);
    for (char b : kBases) vocab.tokens.emplace_back(1, b);

    std::unordered_map<std::string, std::uint32_t> token_index;
    for (std::uint32_t i = 0; i < 4; ++i) token_index.emplace(vocab.tokens[i], i);

    // Lay sequences out as symbol chains, breaking at N and at sequence ends.
    Corpus corpus;
    {
        std::size_t total = 0;
        for (const auto& s : sequences) total += s.bases.size();
        corpus.tok.reserve(total);
        corpus.prev.reserve(total);
        corpus.next.reserve(total);
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> fragments; // [begin, end) symbol ranges
    for (const auto& seq : sequences) {
        std::size_t i = 0;
        const std::string& s = seq.bases;
        while (i < s.size()) {
            if (s[i] == 'N') {
                ++i;
                continue;
            }
            std::int64_t frag_begin = static_cast<std::int64_t>(corpus.tok.size());
            while (i < s.size() && s[i] != 'N') {
                int b = base_index(s[i]);
                if (b < 0)
                    throw std::invalid_argument("train_bpe: sequence '" + seq.id +
                                                "' contains a character outside {A,C,G,T,N}");
                std::int64_t idx = static_cast<std::int64_t>(corpus.tok.size());
                corpus.tok.push_back(b);
                corpus.prev.push_back(idx == frag_begin ? kNone : idx - 1);
                corpus.next.push_back(kNone);
                if (idx != frag_begin) corpus.next[idx - 1] = idx;
                ++i;
            }
            fragments.emplace_back(frag_begin, static_cast<std::int64_t>(corpus.tok.size()));
        }
    }

    // Initial adjacent-pair counts: parallel over fragment chunks, exact
    // integer sums, so the reduction is order-independent. Occurrence lists
    // are concatenated in chunk order and re-sorted at use.
    std::unordered_map<std::uint64_t, PairState> pairs;
    {
        std::size_t threads = resolve_threads(config.threads);
        std::vector<std::unordered_map<std::uint64_t, PairState>> partial(
            std::min(threads, std::max<std::size_t>(fragments.size(), 1)));
        parallel_chunks(fragments.size(), threads,
                        [&](std::size_t begin, std::size_t end, std::size_t chunk) {
                            auto& local = partial[chunk];
                            for (std::size_t f = begin; f < end; ++f) {
                                auto [lo, hi] = fragments[f];
                                for (std::int64_t p = lo; p + 1 < hi; ++p) {
                                    auto& st = local[pair_key(corpus.tok[p], corpus.tok[p + 1])];
                                    ++st.count;
                                    st.positions.push_back(p);
                                }
                            }
                        });
        for (auto& local : partial) {
            for (auto& [key, st] : local) {
                auto& dst = pairs[key];
                dst.count += st.count;
                dst.positions.insert(dst.positions.end(), st.positions.begin(),
                                     st.positions.end());
            }
        }
    }

    auto bump = [&pairs](std::uint32_t a, std::uint32_t b, std::int64_t pos) {
        auto& st = pairs[pair_key(a, b)];
        ++st.count;
        st.positions.push_back(pos);
    };
    auto drop = [&pairs](std::uint32_t a, std::uint32_t b) {
        auto it = pairs.find(pair_key(a, b));
        if (it != pairs.end() && it->second.count > 0) --it->second.count;
    };

    const std::uint64_t min_freq = std::max<std::uint64_t>(config.min_pair_frequency, 1);
    while (vocab.tokens.size() < config.target_size) {
        // Argmax under the total order (count desc, concatenation asc, left
        // token asc); the last key settles distinct pairs with identical
        // concatenations, e.g. (A,CG) vs (AC,G). Pairs whose concatenation is
        // already a token are not eligible: merging them would duplicate an
        // existing token string. The count check comes first, so strings are
        // only built for candidates at the running maximum.
        std::uint64_t best_count = 0;
        std::uint64_t best_key = 0;
        std::string best_concat;
        std::string_view best_left;
        for (const auto& [key, st] : pairs) {
            if (st.count < min_freq || st.count < best_count) continue;
            std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
            std::uint32_t b = static_cast<std::uint32_t>(key & 0xffffffffu);
            std::string concat = vocab.tokens[a] + vocab.tokens[b];
            if (best_count > 0 && st.count == best_count) {
                int cmp = concat.compare(best_concat);
                if (cmp > 0 || (cmp == 0 && vocab.tokens[a] >= best_left)) continue;
            }
            if (token_index.count(concat)) continue;
            best_count = st.count;
            best_key = key;
            best_concat = std::move(concat);
            best_left = vocab.tokens[a];
        }
        if (best_count == 0) break;

        std::uint32_t left = static_cast<std::uint32_t>(best_key >> 32);
        std::uint32_t right = static_cast<std::uint32_t>(best_key & 0xffffffffu);
        std::uint32_t merged = static_cast<std::uint32_t>(vocab.tokens.size());
        vocab.tokens.push_back(best_concat);
        vocab.merges.emplace_back(vocab.tokens[left], vocab.tokens[right]);
        token_index.emplace(best_concat, merged);

        // Apply occurrences left to right; stale entries fail the adjacency
        // check and are skipped.
        auto node = pairs.extract(best_key);
        auto& positions = node.mapped().positions;
        std::sort(positions.begin(), positions.end());
        for (std::int64_t p : positions) {
            if (corpus.tok[p] != static_cast<std::int32_t>(left)) continue;
            std::int64_t q = corpus.next[p];
            if (q == kNone || corpus.tok[q] != static_cast<std::int32_t>(right)) continue;

            std::int64_t before = corpus.prev[p];
            std::int64_t after = corpus.next[q];
            if (before != kNone) {
                drop(corpus.tok[before], left);
                bump(corpus.tok[before], merged, before);
            }
            if (after != kNone) {
                drop(right, corpus.tok[after]);
                bump(merged, corpus.tok[after], p);
            }
            corpus.tok[p] = static_cast<std::int32_t>(merged);
            corpus.tok[q] = -1;
            corpus.next[p] = after;
            if (after != kNone) corpus.prev[after] = p;
        }
    }

    vocab.frequencies.assign(vocab.tokens.size(), 0);
    for (std::int32_t t : corpus.tok)
        if (t >= 0) ++vocab.frequencies[static_cast<std::size_t>(t)];
    return vocab;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize_bpe_vocabulary(const BpeVocabulary& vocab) {
    nlohmann::json j;
    j["version"] = 1;
    j["type"] = "bpe_vocabulary";
    j["label"] = vocab.category_label;
    nlohmann::json tokens = nlohmann::json::array();
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        nlohmann::json t;
        t["token"] = vocab.tokens[i];
        t["freq"] = i < vocab.frequencies.size() ? vocab.frequencies[i] : 0;
        tokens.push_back(std::move(t));
    }
    j["tokens"] = std::move(tokens);
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : vocab.merges) merges.push_back({l, r});
    j["merges"] = std::move(merges);
    return j.dump(2) + "\n";
}

BpeVocabulary parse_bpe_vocabulary(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw std::runtime_error("bpe vocabulary: unsupported version");
    BpeVocabulary vocab;
    vocab.category_label = j.value("label", std::string{});
    for (const auto& t : j.at("tokens")) {
        vocab.tokens.push_back(t.at("token").get<std::string>());
        vocab.frequencies.push_back(t.value("freq", std::uint64_t{0}));
    }
    for (const auto& m : j.at("merges")) {
        if (!m.is_array() || m.size() != 2)
            throw std::runtime_error("bpe vocabulary: malformed merge entry");
        vocab.merges.emplace_back(m[0].get<std::string>(), m[1].get<std::string>());
    }
    vocab.validate();
    return vocab;
}

void save_bpe_vocabulary(const BpeVocabulary& vocab, const std::string& path) {
    write_text_file(path, serialize_bpe_vocabulary(vocab));
}

BpeVocabulary load_bpe_vocabulary(const std::string& path) {
    return parse_bpe_vocabulary(read_text_file(path));
}

} // namespace evolen
