#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evolen/common.hpp"

namespace evolen {

// One FASTA record. `bases` is uppercase over {A,C,G,T,N}. For records read
// from a genome FASTA the record is its own contig (source_contig == id,
// source_offset == 0); records sliced out of a contig keep the original
// contig name and 0-based start.
struct SequenceRecord {
    std::string id;
    std::string bases;
    std::string source_contig;
    std::int64_t source_offset = 0;

    bool operator==(const SequenceRecord&) const = default;
};

struct ScoredInterval {
    std::int64_t start = 0; // 0-based, half-open
    std::int64_t end = 0;
    double score = 0.0;

    bool operator==(const ScoredInterval&) const = default;
};

// Per-base conservation scores as sorted, disjoint intervals per contig.
// Positions not covered by any interval score 0.0 (phyloP neutrality).
class ConservationTrack {
public:
    ConservationTrack() = default;

    // Validates ordering/disjointness; throws std::invalid_argument on violation.
    explicit ConservationTrack(std::map<std::string, std::vector<ScoredInterval>> contigs);

    double score_at(const std::string& contig, std::int64_t pos) const;

    // Sum of per-base scores over [start, end); uncovered bases contribute 0.
    double sum_over(const std::string& contig, std::int64_t start, std::int64_t end) const;

    // Writes the per-base scores of [start, end) into out (resized to end-start).
    void fill_scores(const std::string& contig, std::int64_t start, std::int64_t end,
                     std::vector<double>& out) const;

    bool has_contig(const std::string& contig) const;
    const std::vector<ScoredInterval>* intervals(const std::string& contig) const;
    const std::map<std::string, std::vector<ScoredInterval>>& contigs() const { return contigs_; }
    bool empty() const { return contigs_.empty(); }

    bool operator==(const ConservationTrack&) const = default;

private:
    std::map<std::string, std::vector<ScoredInterval>> contigs_;
};

enum class RegionKind { promoter = 0, enhancer = 1, exon = 2, intron = 3 };
constexpr std::size_t kRegionKindCount = 4;

const char* region_kind_name(RegionKind kind);
std::optional<RegionKind> region_kind_from_name(std::string_view name); // case-insensitive

struct RegionAnnotation {
    std::string contig;
    std::int64_t start = 0; // 0-based, half-open
    std::int64_t end = 0;
    RegionKind kind = RegionKind::promoter;

    bool operator==(const RegionAnnotation&) const = default;
};

// Position weight matrix: one row per motif position, columns A,C,G,T.
// Rows are row-stochastic (sum 1 within 1e-6 after parsing).
struct PwmMotif {
    std::string name;
    std::vector<std::array<double, 4>> matrix;

    std::size_t width() const { return matrix.size(); }
    bool operator==(const PwmMotif&) const = default;
};

// ---- Parsers. All throw ParseError with a line number on malformed input. ----

std::vector<SequenceRecord> parse_fasta(std::istream& in);
ConservationTrack parse_bedgraph(std::istream& in);
std::vector<RegionAnnotation> parse_bed_regions(std::istream& in);
std::vector<PwmMotif> parse_meme(std::istream& in);

// String-input conveniences.
std::vector<SequenceRecord> parse_fasta_text(const std::string& text);
ConservationTrack parse_bedgraph_text(const std::string& text);
std::vector<RegionAnnotation> parse_bed_regions_text(const std::string& text);
std::vector<PwmMotif> parse_meme_text(const std::string& text);

// File-input conveniences; prepend the path to any error message.
std::vector<SequenceRecord> load_fasta(const std::string& path);
ConservationTrack load_bedgraph(const std::string& path);
std::vector<RegionAnnotation> load_bed_regions(const std::string& path);
std::vector<PwmMotif> load_meme(const std::string& path);

// ---- Serializers (parse . serialize == identity on valid inputs). ----

std::string serialize_fasta(const std::vector<SequenceRecord>& records, std::size_t wrap = 60);
std::string serialize_bedgraph(const ConservationTrack& track);
std::string serialize_bed_regions(const std::vector<RegionAnnotation>& regions);
std::string serialize_meme(const std::vector<PwmMotif>& motifs);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace evolen
