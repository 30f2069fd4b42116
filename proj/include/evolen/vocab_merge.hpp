#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evolen/bpe_trainer.hpp"

namespace evolen {

// Result of combining the three category vocabularies. Tier semantics for
// the priority merge:
//   tier 1: tokens in all three vocabularies (always includes A,C,G,T)
//   tier 2: conserved-only tokens
//   tier 3: conserved AND neutral but not accelerated
//   tier 4: neutral-only tokens
// The frequency-ordered variant reports all of its tokens under tier 1.
// truncated_tier is the lowest tier whose tokens did not all fit.
struct MergeReport {
    std::size_t target_size = 0;
    std::array<std::size_t, 4> tier_counts{};
    std::vector<std::string> final_tokens;
    std::optional<int> truncated_tier;
    std::vector<std::string> warnings;

    std::size_t size() const { return final_tokens.size(); }
};

// Conservation-prioritized merge. Tokens are appended tier by tier until
// target_size; within a tier, longer tokens first, then lexicographic.
// A,C,G,T are always retained. Accelerated-only tokens (and tokens shared
// by neutral and accelerated but absent from conserved) never enter.
MergeReport merge_vocabularies(const BpeVocabulary& v_con, const BpeVocabulary& v_neu,
                               const BpeVocabulary& v_acc, std::size_t target_size);

// Ablation variant: plain union of the three vocabularies ordered by summed
// training-corpus frequency (descending; ties longer first, then
// lexicographic), truncated to target_size. A,C,G,T are always retained.
MergeReport merge_no_priority(const BpeVocabulary& v_con, const BpeVocabulary& v_neu,
                              const BpeVocabulary& v_acc, std::size_t target_size);

// Merged vocabulary file: JSON {version, type, tokens:[...]} plus the report.
std::string serialize_merged_vocabulary(const MergeReport& report);
std::vector<std::string> parse_merged_vocabulary(const std::string& text);
std::string serialize_merge_report(const MergeReport& report);

} // namespace evolen
