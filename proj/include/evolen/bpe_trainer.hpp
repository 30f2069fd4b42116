#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evolen/stratify.hpp"

namespace evolen {

// Byte-pair-encoding vocabulary over {A,C,G,T}. tokens[0..3] are the base
// tokens A,C,G,T; tokens[4+k] is the concatenation of merges[k], both sides
// of which appear earlier in the list. frequencies[i] is the number of
// occurrences of tokens[i] as a symbol in the fully merged training corpus.
struct BpeVocabulary {
    std::vector<std::string> tokens;
    std::vector<std::pair<std::string, std::string>> merges;
    std::string category_label;
    std::vector<std::uint64_t> frequencies;

    // Throws std::invalid_argument if the structural invariants are broken.
    void validate() const;
};

struct BpeTrainConfig {
    std::size_t target_size = 5120;
    std::uint64_t min_pair_frequency = 2; // pairs below this never merge
    std::size_t threads = 1;              // 0 = hardware concurrency
};

// Standard BPE over the pool's sequences. Sequences are split at N before
// training (no token ever contains N) and never merge across sequence
// boundaries. The most frequent adjacent pair merges each round, ties broken
// by lexicographically smallest concatenated string; training stops at
// target_size tokens or when no pair reaches min_pair_frequency.
BpeVocabulary train_bpe(const SequencePool& pool, const BpeTrainConfig& config);

BpeVocabulary train_bpe(const std::vector<SequenceRecord>& sequences, std::string category_label,
                        const BpeTrainConfig& config);

// Trainer output file: JSON {version, type, label, tokens:[{token,freq}...],
// merges:[[left,right]...]} (same envelope as the tokenizer file, scores
// absent at this stage).
std::string serialize_bpe_vocabulary(const BpeVocabulary& vocab);
BpeVocabulary parse_bpe_vocabulary(const std::string& text);
void save_bpe_vocabulary(const BpeVocabulary& vocab, const std::string& path);
BpeVocabulary load_bpe_vocabulary(const std::string& path);

} // namespace evolen
