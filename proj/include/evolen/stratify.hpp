#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evolen/genome_io.hpp"

namespace evolen {

enum class Category { conserved = 0, neutral = 1, accelerated = 2 };
constexpr std::size_t kCategoryCount = 3;

const char* category_name(Category c);
const char* category_label(Category c); // con / neu / acc

struct StratificationParams {
    double z = 1.645;  // two-tailed z threshold
    int bin_size = 100;
};

// Mean conservation score per full bin, one entry per input record.
// Bin b of an entry spans [offset + b*bin_size, offset + (b+1)*bin_size);
// the trailing partial bin is dropped. Entries are kept in canonical
// (contig, offset, id) order so downstream reductions are deterministic.
struct BinnedTrack {
    int bin_size = 100;

    struct Entry {
        std::string record_id;
        std::string contig;
        std::int64_t offset = 0;
        std::vector<double> means; // index = bin index within the record
    };

    std::vector<Entry> entries;
    std::vector<std::string> warnings; // e.g. contigs absent from the track

    std::size_t total_bins() const;
};

// Per-bin category assignments, parallel to BinnedTrack::entries.
struct Stratification {
    double mu = 0.0;
    double sigma = 0.0; // population standard deviation over all bins
    std::vector<std::vector<Category>> assignments;

    std::array<std::size_t, kCategoryCount> category_counts() const;
};

struct SequencePool {
    Category category = Category::neutral;
    std::vector<SequenceRecord> sequences; // each exactly bin_size bases
};

BinnedTrack bin_track(const std::vector<SequenceRecord>& genome, const ConservationTrack& track,
                      int bin_size, std::size_t threads = 1);

Stratification classify_bins(const BinnedTrack& binned, const StratificationParams& params);

// One pool per category; bins consisting only of N fall into no pool.
std::array<SequencePool, kCategoryCount> extract_pools(const std::vector<SequenceRecord>& genome,
                                                       const BinnedTrack& binned,
                                                       const Stratification& strat);

// Every full bin of every record as its own SequenceRecord (all-N bins
// dropped). This is the training unit list for the unstratified variant.
std::vector<SequenceRecord> chop_bins(const std::vector<SequenceRecord>& genome, int bin_size);

} // namespace evolen
