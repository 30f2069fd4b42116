#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evolen/encoder.hpp"
#include "evolen/stratify.hpp"

namespace evolen {

// ---------------------------------------------------------------------------
// Motif preservation
// ---------------------------------------------------------------------------

// PWM reduced to a fixed consensus string plus its wildcard-expanded
// variants (the consensus is always among the variants).
struct MotifRecord {
    std::string name;
    std::string consensus;
    std::vector<std::string> variants;
};

struct ConsensusParams {
    double wildcard_threshold = 0.25; // nucleotides >= this expand at wildcard positions
    std::size_t max_variants = 256;   // beyond this, variants = {consensus}
    std::size_t max_motif_len = 12;   // longer consensuses are rejected
};

// Thresholds each position at 0.5 (determinate iff some probability >= 0.5),
// trims wildcard positions at both ends, takes the argmax nucleotide at the
// remaining positions. Returns nullopt when the trimmed consensus is empty
// or longer than max_motif_len.
std::optional<MotifRecord> pwm_to_consensus(const PwmMotif& motif,
                                            const ConsensusParams& params = {});

std::vector<MotifRecord> motifs_from_pwms(const std::vector<PwmMotif>& pwms,
                                          const ConsensusParams& params = {});

struct MotifMetrics {
    double avg_tokens_per_motif = 0.0;
    double perfect_match_rate = 0.0; // percent of motifs encoded as one token
    double exact_vocab_rate = 0.0;   // percent of consensuses present in the vocabulary
    double avg_token_fraction = 0.0; // mean over motifs of mean token |t|/|consensus|
    double consistency = 0.0;        // mean over motifs of population std of variant token counts
    std::size_t motif_count = 0;
};

MotifMetrics motif_metrics(const ScoredVocabulary& vocab, const std::vector<MotifRecord>& motifs);

// ---------------------------------------------------------------------------
// Token-length signatures and Jensen-Shannon measures
// ---------------------------------------------------------------------------

// Token lengths bucketed as 1-2, 3-5, 6-8, 9+.
int length_bin(std::size_t len);
extern const char* const kLengthBinNames[4];

struct LengthSignature {
    std::array<double, 4> probs{};
    std::uint64_t token_count = 0;
};

LengthSignature length_signature(const ScoredVocabulary& vocab,
                                 const std::vector<SequenceRecord>& sequences,
                                 std::size_t threads = 1);

// JSD(p||q) = KL(p||m)/2 + KL(q||m)/2 with m = (p+q)/2 and 0*log 0 = 0.
// Base-2 logarithms bound the divergence in [0,1].
double js_divergence(std::span<const double> p, std::span<const double> q, double log_base = 2.0);
double js_distance(std::span<const double> p, std::span<const double> q, double log_base = 2.0);
double js_divergence(const LengthSignature& p, const LengthSignature& q, double log_base = 2.0);
double js_distance(const LengthSignature& p, const LengthSignature& q, double log_base = 2.0);

// ---------------------------------------------------------------------------
// Per-token conservation alignment
// ---------------------------------------------------------------------------

struct CategoryTokenStats {
    double mean_phylop = 0.0;         // unweighted mean over distinct tokens of token means
    double pct_positive = 0.0;        // percent of distinct tokens with positive mean
    double mean_intra_variance = 0.0; // mean over distinct tokens of pooled population variance
    std::size_t distinct_tokens = 0;
};

// Index by Category; a category with no token occurrences stays nullopt.
using PhylopTokenStats = std::array<std::optional<CategoryTokenStats>, kCategoryCount>;

PhylopTokenStats phylop_token_stats(const ScoredVocabulary& vocab,
                                    const std::vector<SequenceRecord>& genome,
                                    const ConservationTrack& track, const BinnedTrack& binned,
                                    const Stratification& strat, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Region handling
// ---------------------------------------------------------------------------

// Genome subsequences per region kind (annotation intervals clipped to their
// contig).
std::array<std::vector<SequenceRecord>, kRegionKindCount>
region_sequences(const std::vector<SequenceRecord>& genome,
                 const std::vector<RegionAnnotation>& regions);

using RegionCategorySequences =
    std::array<std::array<std::vector<SequenceRecord>, kCategoryCount>, kRegionKindCount>;

// The 12 enrichment bins: each region interval inherits the category of the
// conservation bin it overlaps most (ties to the lower bin index); intervals
// outside the binned range are skipped.
RegionCategorySequences partition_regions(const std::vector<SequenceRecord>& genome,
                                          const std::vector<RegionAnnotation>& regions,
                                          const BinnedTrack& binned, const Stratification& strat);

// ---------------------------------------------------------------------------
// Enrichment over the 12 region x conservation bins
// ---------------------------------------------------------------------------

struct EnrichmentTable {
    struct Bin {
        bool present = false;
        std::vector<std::uint64_t> counts; // per vocabulary token
        std::uint64_t total = 0;
        std::vector<double> log2fc;
        double mean_log2fc = 0.0;
    };

    double alpha = 0.5;
    std::vector<std::string> tokens; // vocabulary order
    std::array<std::array<Bin, kCategoryCount>, kRegionKindCount> bins;

    static constexpr RegionKind kBackgroundRegion = RegionKind::intron;
    static constexpr Category kBackgroundCategory = Category::neutral;

    const Bin& background() const {
        return bins[static_cast<std::size_t>(kBackgroundRegion)]
                   [static_cast<std::size_t>(kBackgroundCategory)];
    }
};

// Per-token log2 fold-change of smoothed frequencies, f = (c + alpha) /
// (N + alpha*|V|), bin versus background. Sizes must match (= |V|).
std::vector<double> smoothed_log2_fold_change(std::span<const std::uint64_t> bin_counts,
                                              std::span<const std::uint64_t> bg_counts,
                                              double alpha);

EnrichmentTable enrichment(const ScoredVocabulary& vocab, const RegionCategorySequences& bins,
                           double alpha = 0.5, std::size_t threads = 1);

// |E(conserved) - E(accelerated)| for one region; both bins must be present.
double separation(const EnrichmentTable& table, RegionKind region);

// ---------------------------------------------------------------------------
// TSV rendering for the eval commands (deterministic formatting)
// ---------------------------------------------------------------------------

using RegionSignatures = std::array<std::optional<LengthSignature>, kRegionKindCount>;

std::string render_motif_metrics_tsv(const MotifMetrics& metrics);
std::string render_length_signatures_tsv(const RegionSignatures& signatures);
std::string render_js_tsv(const RegionSignatures& signatures, double log_base = 2.0);
std::string render_phylop_tsv(const PhylopTokenStats& stats);
std::string render_enrichment_tsv(const EnrichmentTable& table);
std::string render_separation_tsv(const EnrichmentTable& table);

} // namespace evolen
