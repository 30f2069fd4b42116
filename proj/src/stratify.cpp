#include "evolen/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "evolen/parallel.hpp"

namespace evolen {

const char* category_name(Category c) {
    switch (c) {
    case Category::conserved: return "conserved";
    case Category::neutral: return "neutral";
    case Category::accelerated: return "accelerated";
    }
    return "?";
}

const char* category_label(Category c) {
    switch (c) {
    case Category::conserved: return "con";
    case Category::neutral: return "neu";
    case Category::accelerated: return "acc";
    }
    return "?";
}

std::size_t BinnedTrack::total_bins() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.means.size();
    return n;
}

std::array<std::size_t, kCategoryCount> Stratification::category_counts() const {
    std::array<std::size_t, kCategoryCount> counts{};
    for (const auto& v : assignments)
        for (Category c : v) ++counts[static_cast<std::size_t>(c)];
    return counts;
}

BinnedTrack bin_track(const std::vector<SequenceRecord>& genome, const ConservationTrack& track,
                      int bin_size, std::size_t threads) {
    if (bin_size < 1) throw std::invalid_argument("bin_size must be >= 1");

    BinnedTrack binned;
    binned.bin_size = bin_size;
    binned.entries.resize(genome.size());

    parallel_chunks(genome.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t g = begin; g < end; ++g) {
            const auto& rec = genome[g];
            auto& entry = binned.entries[g];
            entry.record_id = rec.id;
            entry.contig = rec.source_contig;
            entry.offset = rec.source_offset;
            std::size_t full_bins = rec.bases.size() / static_cast<std::size_t>(bin_size);
            entry.means.reserve(full_bins);
            for (std::size_t b = 0; b < full_bins; ++b) {
                std::int64_t start = rec.source_offset + static_cast<std::int64_t>(b) * bin_size;
                entry.means.push_back(track.sum_over(rec.source_contig, start, start + bin_size) /
                                      bin_size);
            }
        }
    });

    for (const auto& rec : genome)
        if (!track.has_contig(rec.source_contig))
            binned.warnings.push_back("contig '" + rec.source_contig +
                                      "' absent from track; bases treated as uncovered");

    std::sort(binned.entries.begin(), binned.entries.end(),
              [](const BinnedTrack::Entry& a, const BinnedTrack::Entry& b) {
                  if (a.contig != b.contig) return a.contig < b.contig;
                  if (a.offset != b.offset) return a.offset < b.offset;
                  return a.record_id < b.record_id;
              });
    return binned;
}

Stratification classify_bins(const BinnedTrack& binned, const StratificationParams& params) {
    if (params.z <= 0.0) throw std::invalid_argument("z must be > 0");
    std::size_t n = binned.total_bins();
    if (n == 0) throw std::invalid_argument("classify_bins requires at least one bin");

    // Two-pass mean/variance over the canonically ordered bin list.
    double sum = 0.0;
    for (const auto& e : binned.entries)
        for (double x : e.means) sum += x;
    double mu = sum / static_cast<double>(n);

    double sq = 0.0;
    for (const auto& e : binned.entries)
        for (double x : e.means) sq += (x - mu) * (x - mu);
    double sigma = std::sqrt(sq / static_cast<double>(n));

    Stratification strat;
    strat.mu = mu;
    strat.sigma = sigma;
    strat.assignments.reserve(binned.entries.size());

    double hi = mu + params.z * sigma;
    double lo = mu - params.z * sigma;
    for (const auto& e : binned.entries) {
        std::vector<Category> cats;
        cats.reserve(e.means.size());
        for (double x : e.means) {
            Category c = Category::neutral;
            if (sigma > 0.0) {
                if (x > hi)
                    c = Category::conserved;
                else if (x < lo)
                    c = Category::accelerated;
            }
            cats.push_back(c);
        }
        strat.assignments.push_back(std::move(cats));
    }
    return strat;
}

namespace {

std::string bin_record_id(const std::string& contig, std::int64_t start, std::int64_t end) {
    return contig + ":" + std::to_string(start) + "-" + std::to_string(end);
}

bool all_n(std::string_view bases) {
    return bases.find_first_not_of('N') == std::string_view::npos;
}

} // namespace

std::array<SequencePool, kCategoryCount> extract_pools(const std::vector<SequenceRecord>& genome,
                                                       const BinnedTrack& binned,
                                                       const Stratification& strat) {
    if (strat.assignments.size() != binned.entries.size())
        throw std::invalid_argument("assignments do not match binned track");

    std::unordered_map<std::string, const SequenceRecord*> by_id;
    for (const auto& rec : genome) by_id.emplace(rec.id, &rec);

    std::array<SequencePool, kCategoryCount> pools;
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        pools[c].category = static_cast<Category>(c);

    for (std::size_t i = 0; i < binned.entries.size(); ++i) {
        const auto& entry = binned.entries[i];
        auto it = by_id.find(entry.record_id);
        if (it == by_id.end())
            throw std::invalid_argument("record '" + entry.record_id + "' missing from genome");
        const SequenceRecord& rec = *it->second;
        const auto& cats = strat.assignments[i];
        if (cats.size() != entry.means.size())
            throw std::invalid_argument("assignment length mismatch for '" + entry.record_id + "'");
        for (std::size_t b = 0; b < cats.size(); ++b) {
            std::size_t pos = b * static_cast<std::size_t>(binned.bin_size);
            std::string_view bases(rec.bases.data() + pos,
                                   static_cast<std::size_t>(binned.bin_size));
            if (all_n(bases)) continue;
            std::int64_t start = entry.offset + static_cast<std::int64_t>(pos);
            SequenceRecord out;
            out.id = bin_record_id(entry.contig, start, start + binned.bin_size);
            out.bases = std::string(bases);
            out.source_contig = entry.contig;
            out.source_offset = start;
            pools[static_cast<std::size_t>(cats[b])].sequences.push_back(std::move(out));
        }
    }
    return pools;
}

std::vector<SequenceRecord> chop_bins(const std::vector<SequenceRecord>& genome, int bin_size) {
    if (bin_size < 1) throw std::invalid_argument("bin_size must be >= 1");
    std::vector<SequenceRecord> bins;
    for (const auto& rec : genome) {
        std::size_t full_bins = rec.bases.size() / static_cast<std::size_t>(bin_size);
        for (std::size_t b = 0; b < full_bins; ++b) {
            std::size_t pos = b * static_cast<std::size_t>(bin_size);
            std::string_view bases(rec.bases.data() + pos, static_cast<std::size_t>(bin_size));
            if (all_n(bases)) continue;
            std::int64_t start = rec.source_offset + static_cast<std::int64_t>(pos);
            SequenceRecord out;
            out.id = bin_record_id(rec.source_contig, start, start + bin_size);
            out.bases = std::string(bases);
            out.source_contig = rec.source_contig;
            out.source_offset = start;
            bins.push_back(std::move(out));
        }
    }
    return bins;
}

} // namespace evolen
