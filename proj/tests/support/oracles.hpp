#pragma once

// Test-only oracles, independent of the library implementations they check:
// exhaustive segmentation search, brute-force set algebra for the merge
// tiers, direct mean/std recomputation, and the Jensen-Shannon formula.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracles {

// Max total score over all 2^(n-1) segmentations whose parts are all in
// vocab; second value is the longest final part among optimal segmentations.
inline std::optional<std::pair<std::uint64_t, std::size_t>>
exhaustive_best(const std::map<std::string, std::uint64_t>& vocab, const std::string& seq) {
    const std::size_t n = seq.size();
    if (n == 0) return std::make_pair(std::uint64_t{0}, std::size_t{0});
    bool any = false;
    std::uint64_t best = 0;
    std::size_t best_final = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        std::uint64_t score = 0;
        std::size_t start = 0, final_len = 0;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            bool cut = (i == n - 1) || (mask >> i) & 1;
            if (!cut) continue;
            auto it = vocab.find(seq.substr(start, i + 1 - start));
            if (it == vocab.end()) {
                ok = false;
                break;
            }
            score += it->second;
            final_len = i + 1 - start;
            start = i + 1;
        }
        if (!ok) continue;
        if (!any || score > best || (score == best && final_len > best_final)) {
            if (!any || score > best) best_final = final_len;
            else best_final = std::max(best_final, final_len);
            best = std::max(best, score);
            any = true;
        }
    }
    if (!any) return std::nullopt;
    return std::make_pair(best, best_final);
}

struct TierSets {
    std::set<std::string> t1, t2, t3, t4;
};

inline TierSets tier_oracle(const std::set<std::string>& con, const std::set<std::string>& neu,
                            const std::set<std::string>& acc) {
    TierSets t;
    for (const auto& x : con) {
        bool in_neu = neu.count(x), in_acc = acc.count(x);
        if (in_neu && in_acc) t.t1.insert(x);
        if (!in_neu && !in_acc) t.t2.insert(x);
        if (in_neu && !in_acc) t.t3.insert(x);
    }
    for (const auto& x : neu)
        if (!con.count(x) && !acc.count(x)) t.t4.insert(x);
    return t;
}

struct MeanStd {
    double mu = 0.0;
    double sigma = 0.0;
};

inline MeanStd mean_population_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mu += x;
    r.mu /= static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - r.mu) * (x - r.mu);
    r.sigma = std::sqrt(sq / static_cast<double>(xs.size()));
    return r;
}

inline double js_formula(const std::vector<double>& p, const std::vector<double>& q,
                         double base = 2.0) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = (p[i] + q[i]) / 2.0;
        if (p[i] > 0.0) d += 0.5 * p[i] * (std::log(p[i]) - std::log(m)) / std::log(base);
        if (q[i] > 0.0) d += 0.5 * q[i] * (std::log(q[i]) - std::log(m)) / std::log(base);
    }
    return d;
}

// ---- random input generators ----

inline std::string random_acgt(std::mt19937& rng, std::size_t len) {
    static const char bases[] = {'A', 'C', 'G', 'T'};
    std::uniform_int_distribution<int> pick(0, 3);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) s.push_back(bases[pick(rng)]);
    return s;
}

// Bases plus up to extra random tokens of length 2..max_len, deduplicated.
inline std::vector<std::string> random_token_set(std::mt19937& rng, std::size_t extra,
                                                 std::size_t max_len = 6) {
    std::set<std::string> set{"A", "C", "G", "T"};
    std::uniform_int_distribution<std::size_t> len_dist(2, max_len);
    while (set.size() < extra + 4) set.insert(random_acgt(rng, len_dist(rng)));
    return {set.begin(), set.end()};
}

inline std::vector<double> random_distribution(std::mt19937& rng, std::size_t dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(dim);
    double total = 0.0;
    for (auto& x : p) {
        x = u(rng) + 1e-9;
        total += x;
    }
    for (auto& x : p) x /= total;
    return p;
}

} // namespace oracles
