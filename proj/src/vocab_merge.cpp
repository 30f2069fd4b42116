#include "evolen/vocab_merge.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "evolen/common.hpp"
#include "evolen/genome_io.hpp"

namespace evolen {

namespace {

bool longer_then_lex(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
}

std::vector<std::string> sorted_tier(std::vector<std::string> tokens) {
    std::sort(tokens.begin(), tokens.end(), longer_then_lex);
    return tokens;
}

// Appends as much of `tier` as capacity allows; reports whether it was cut.
bool append_tier(MergeReport& report, const std::vector<std::string>& tier, int tier_id,
                 std::unordered_set<std::string>& emitted) {
    bool truncated = false;
    for (const auto& token : tier) {
        if (emitted.count(token)) continue;
        if (report.final_tokens.size() >= report.target_size) {
            truncated = true;
            break;
        }
        report.final_tokens.push_back(token);
        emitted.insert(token);
        ++report.tier_counts[static_cast<std::size_t>(tier_id - 1)];
    }
    return truncated;
}

} // namespace

MergeReport merge_vocabularies(const BpeVocabulary& v_con, const BpeVocabulary& v_neu,
                               const BpeVocabulary& v_acc, std::size_t target_size) {
    if (target_size < 4) throw std::invalid_argument("merge_vocabularies: target_size < 4");

    std::unordered_set<std::string> con(v_con.tokens.begin(), v_con.tokens.end());
    std::unordered_set<std::string> neu(v_neu.tokens.begin(), v_neu.tokens.end());
    std::unordered_set<std::string> acc(v_acc.tokens.begin(), v_acc.tokens.end());

    std::array<std::vector<std::string>, 4> tiers;
    for (const auto& t : v_con.tokens) {
        bool in_neu = neu.count(t) != 0;
        bool in_acc = acc.count(t) != 0;
        if (in_neu && in_acc)
            tiers[0].push_back(t);
        else if (!in_neu && !in_acc)
            tiers[1].push_back(t);
        else if (in_neu)
            tiers[2].push_back(t);
        // conserved AND accelerated but not neutral: no tier admits it
    }
    for (const auto& t : v_neu.tokens)
        if (!con.count(t) && !acc.count(t)) tiers[3].push_back(t);

    MergeReport report;
    report.target_size = target_size;
    std::unordered_set<std::string> emitted;

    // Base tokens head the output so they survive any truncation; they are
    // members of every vocabulary and count toward tier 1.
    for (char b : kBases) {
        report.final_tokens.emplace_back(1, b);
        emitted.insert(report.final_tokens.back());
        ++report.tier_counts[0];
    }
    for (int tier_id = 1; tier_id <= 4; ++tier_id) {
        if (append_tier(report, sorted_tier(tiers[static_cast<std::size_t>(tier_id - 1)]), tier_id,
                        emitted)) {
            report.truncated_tier = tier_id;
            break;
        }
    }
    if (!report.truncated_tier && report.final_tokens.size() < target_size)
        report.warnings.push_back("tiers exhausted at " + std::to_string(report.size()) +
                                  " tokens, below target " + std::to_string(target_size));
    return report;
}

MergeReport merge_no_priority(const BpeVocabulary& v_con, const BpeVocabulary& v_neu,
                              const BpeVocabulary& v_acc, std::size_t target_size) {
    if (target_size < 4) throw std::invalid_argument("merge_no_priority: target_size < 4");

    std::unordered_map<std::string, std::uint64_t> freq;
    for (const BpeVocabulary* v : {&v_con, &v_neu, &v_acc})
        for (std::size_t i = 0; i < v->tokens.size(); ++i)
            freq[v->tokens[i]] += i < v->frequencies.size() ? v->frequencies[i] : 0;

    std::vector<std::string> order;
    order.reserve(freq.size());
    for (const auto& [token, f] : freq) order.push_back(token);
    std::sort(order.begin(), order.end(), [&freq](const std::string& a, const std::string& b) {
        std::uint64_t fa = freq[a], fb = freq[b];
        if (fa != fb) return fa > fb;
        return longer_then_lex(a, b);
    });

    MergeReport report;
    report.target_size = target_size;
    std::unordered_set<std::string> emitted;
    for (char b : kBases) {
        report.final_tokens.emplace_back(1, b);
        emitted.insert(report.final_tokens.back());
        ++report.tier_counts[0];
    }
    bool truncated = false;
    for (const auto& token : order) {
        if (emitted.count(token)) continue;
        if (report.final_tokens.size() >= target_size) {
            truncated = true;
            break;
        }
        report.final_tokens.push_back(token);
        emitted.insert(token);
        ++report.tier_counts[0];
    }
    if (truncated) report.truncated_tier = 1;
    return report;
}

std::string serialize_merged_vocabulary(const MergeReport& report) {
    nlohmann::json j;
    j["version"] = 1;
    j["type"] = "merged_vocabulary";
    j["tokens"] = report.final_tokens;
    return j.dump(2) + "\n";
}

std::vector<std::string> parse_merged_vocabulary(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw std::runtime_error("merged vocabulary: unsupported version");
    auto tokens = j.at("tokens").get<std::vector<std::string>>();
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens) {
        if (!all_acgt(t))
            throw std::runtime_error("merged vocabulary: token '" + t + "' not over {A,C,G,T}");
        if (!seen.insert(t).second)
            throw std::runtime_error("merged vocabulary: duplicate token '" + t + "'");
    }
    return tokens;
}

std::string serialize_merge_report(const MergeReport& report) {
    nlohmann::json j;
    j["target_size"] = report.target_size;
    j["tier_counts"] = report.tier_counts;
    j["token_count"] = report.size();
    if (report.truncated_tier)
        j["truncated_tier"] = *report.truncated_tier;
    else
        j["truncated_tier"] = nullptr;
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

} // namespace evolen
