#include "evolen/genome_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace evolen {

std::string to_hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// ConservationTrack
// ---------------------------------------------------------------------------

ConservationTrack::ConservationTrack(std::map<std::string, std::vector<ScoredInterval>> contigs)
    : contigs_(std::move(contigs)) {
    for (auto& [name, ivals] : contigs_) {
        std::sort(ivals.begin(), ivals.end(),
                  [](const ScoredInterval& a, const ScoredInterval& b) { return a.start < b.start; });
        for (std::size_t i = 0; i < ivals.size(); ++i) {
            if (ivals[i].start >= ivals[i].end)
                throw std::invalid_argument("track interval with start >= end on " + name);
            if (i && ivals[i - 1].end > ivals[i].start)
                throw std::invalid_argument("overlapping track intervals on " + name);
        }
    }
}

const std::vector<ScoredInterval>* ConservationTrack::intervals(const std::string& contig) const {
    auto it = contigs_.find(contig);
    return it == contigs_.end() ? nullptr : &it->second;
}

bool ConservationTrack::has_contig(const std::string& contig) const {
    return contigs_.count(contig) != 0;
}

double ConservationTrack::score_at(const std::string& contig, std::int64_t pos) const {
    const auto* ivals = intervals(contig);
    if (!ivals) return 0.0;
    auto it = std::upper_bound(ivals->begin(), ivals->end(), pos,
                               [](std::int64_t p, const ScoredInterval& iv) { return p < iv.start; });
    if (it == ivals->begin()) return 0.0;
    --it;
    return (pos < it->end) ? it->score : 0.0;
}

double ConservationTrack::sum_over(const std::string& contig, std::int64_t start, std::int64_t end) const {
    const auto* ivals = intervals(contig);
    if (!ivals || start >= end) return 0.0;
    auto it = std::upper_bound(ivals->begin(), ivals->end(), start,
                               [](std::int64_t p, const ScoredInterval& iv) { return p < iv.start; });
    if (it != ivals->begin()) --it;
    double total = 0.0;
    for (; it != ivals->end() && it->start < end; ++it) {
        std::int64_t lo = std::max(start, it->start);
        std::int64_t hi = std::min(end, it->end);
        if (hi > lo) total += static_cast<double>(hi - lo) * it->score;
    }
    return total;
}

void ConservationTrack::fill_scores(const std::string& contig, std::int64_t start, std::int64_t end,
                                    std::vector<double>& out) const {
    out.assign(end > start ? static_cast<std::size_t>(end - start) : 0, 0.0);
    const auto* ivals = intervals(contig);
    if (!ivals || out.empty()) return;
    auto it = std::upper_bound(ivals->begin(), ivals->end(), start,
                               [](std::int64_t p, const ScoredInterval& iv) { return p < iv.start; });
    if (it != ivals->begin()) --it;
    for (; it != ivals->end() && it->start < end; ++it) {
        std::int64_t lo = std::max(start, it->start);
        std::int64_t hi = std::min(end, it->end);
        for (std::int64_t p = lo; p < hi; ++p)
            out[static_cast<std::size_t>(p - start)] = it->score;
    }
}

// ---------------------------------------------------------------------------
// Region kinds
// ---------------------------------------------------------------------------

const char* region_kind_name(RegionKind kind) {
    switch (kind) {
    case RegionKind::promoter: return "promoter";
    case RegionKind::enhancer: return "enhancer";
    case RegionKind::exon: return "exon";
    case RegionKind::intron: return "intron";
    }
    return "?";
}

std::optional<RegionKind> region_kind_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "promoter") return RegionKind::promoter;
    if (lower == "enhancer") return RegionKind::enhancer;
    if (lower == "exon") return RegionKind::exon;
    if (lower == "intron") return RegionKind::intron;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Shared line helpers
// ---------------------------------------------------------------------------

namespace {

// Strips a trailing '\r' so CRLF input parses like LF input.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(std::move(f));
    return fields;
}

std::int64_t parse_int(const std::string& s, std::size_t line_no, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string("malformed ") + what + " '" + s + "'", line_no);
    return v;
}

double parse_real(const std::string& s, std::size_t line_no, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("non-numeric ") + what + " '" + s + "'", line_no);
    }
}

bool blank_or_comment(const std::string& line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) return c == '#';
    return true;
}

} // namespace

// ---------------------------------------------------------------------------
// FASTA
// ---------------------------------------------------------------------------

std::vector<SequenceRecord> parse_fasta(std::istream& in) {
    std::vector<SequenceRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool have_record = false;

    auto finish = [&](SequenceRecord& r) {
        r.source_contig = r.id;
        r.source_offset = 0;
        records.push_back(std::move(r));
    };

    SequenceRecord current;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '>') {
            if (have_record) finish(current);
            current = SequenceRecord{};
            std::istringstream hs(line.substr(1));
            hs >> current.id;
            if (current.id.empty())
                throw ParseError("FASTA header with empty id", line_no);
            if (!seen.insert(current.id).second)
                throw ParseError("duplicate FASTA id '" + current.id + "'", line_no);
            have_record = true;
            continue;
        }
        if (!have_record)
            throw ParseError("sequence data before first '>' header", line_no);
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
            if (!is_acgtn(c))
                throw ParseError(std::string("illegal character '") + line[i] + "' at column " +
                                     std::to_string(i + 1),
                                 line_no);
            current.bases.push_back(c);
        }
    }
    if (have_record) finish(current);
    if (records.empty()) throw ParseError("empty FASTA input");
    return records;
}

std::string serialize_fasta(const std::vector<SequenceRecord>& records, std::size_t wrap) {
    std::string out;
    for (const auto& r : records) {
        out += '>';
        out += r.id;
        out += '\n';
        if (wrap == 0) {
            out += r.bases;
            out += '\n';
            continue;
        }
        for (std::size_t i = 0; i < r.bases.size(); i += wrap) {
            out.append(r.bases, i, std::min(wrap, r.bases.size() - i));
            out += '\n';
        }
        if (r.bases.empty()) out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// bedGraph
// ---------------------------------------------------------------------------

ConservationTrack parse_bedgraph(std::istream& in) {
    struct Raw {
        ScoredInterval iv;
        std::size_t line_no;
    };
    std::map<std::string, std::vector<Raw>> per_contig;
    std::string line;
    std::size_t line_no = 0;
    while (get_line(in, line)) {
        ++line_no;
        if (blank_or_comment(line) || line.rfind("track", 0) == 0) continue;
        auto fields = split_ws(line);
        if (fields.size() < 4)
            throw ParseError("expected 4 columns (contig, start, end, score), got " +
                                 std::to_string(fields.size()),
                             line_no);
        std::int64_t start = parse_int(fields[1], line_no, "start");
        std::int64_t end = parse_int(fields[2], line_no, "end");
        double score = parse_real(fields[3], line_no, "score");
        if (start >= end)
            throw ParseError("interval start " + std::to_string(start) + " >= end " +
                                 std::to_string(end),
                             line_no);
        per_contig[fields[0]].push_back({{start, end, score}, line_no});
    }

    std::map<std::string, std::vector<ScoredInterval>> contigs;
    for (auto& [contig, raws] : per_contig) {
        std::stable_sort(raws.begin(), raws.end(),
                         [](const Raw& a, const Raw& b) { return a.iv.start < b.iv.start; });
        std::vector<ScoredInterval> ivals;
        ivals.reserve(raws.size());
        for (std::size_t i = 0; i < raws.size(); ++i) {
            if (i && raws[i - 1].iv.end > raws[i].iv.start)
                throw ParseError("overlapping intervals on " + contig + " (lines " +
                                     std::to_string(raws[i - 1].line_no) + " and " +
                                     std::to_string(raws[i].line_no) + ")",
                                 raws[i].line_no);
            ivals.push_back(raws[i].iv);
        }
        contigs.emplace(contig, std::move(ivals));
    }
    return ConservationTrack(std::move(contigs));
}

std::string serialize_bedgraph(const ConservationTrack& track) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& [contig, ivals] : track.contigs())
        for (const auto& iv : ivals)
            os << contig << '\t' << iv.start << '\t' << iv.end << '\t' << iv.score << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// BED regions
// ---------------------------------------------------------------------------

std::vector<RegionAnnotation> parse_bed_regions(std::istream& in) {
    std::vector<RegionAnnotation> regions;
    std::string line;
    std::size_t line_no = 0;
    while (get_line(in, line)) {
        ++line_no;
        if (blank_or_comment(line) || line.rfind("track", 0) == 0) continue;
        auto fields = split_ws(line);
        if (fields.size() < 4)
            throw ParseError("expected >= 4 BED columns, got " + std::to_string(fields.size()),
                             line_no);
        RegionAnnotation r;
        r.contig = fields[0];
        r.start = parse_int(fields[1], line_no, "start");
        r.end = parse_int(fields[2], line_no, "end");
        if (r.start >= r.end)
            throw ParseError("region start " + std::to_string(r.start) + " >= end " +
                                 std::to_string(r.end),
                             line_no);
        auto kind = region_kind_from_name(fields[3]);
        if (!kind)
            throw ParseError("unknown region kind '" + fields[3] +
                                 "' (expected promoter|enhancer|exon|intron)",
                             line_no);
        r.kind = *kind;
        regions.push_back(std::move(r));
    }
    return regions;
}

std::string serialize_bed_regions(const std::vector<RegionAnnotation>& regions) {
    std::ostringstream os;
    for (const auto& r : regions)
        os << r.contig << '\t' << r.start << '\t' << r.end << '\t' << region_kind_name(r.kind)
           << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// MEME minimal motif format
// ---------------------------------------------------------------------------

std::vector<PwmMotif> parse_meme(std::istream& in) {
    std::vector<PwmMotif> motifs;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::string> pending_name;

    while (get_line(in, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        auto fields = split_ws(line);
        if (fields.empty()) continue;

        if (fields[0] == "MOTIF") {
            if (fields.size() < 2) throw ParseError("MOTIF line without a name", line_no);
            pending_name = fields[1];
            continue;
        }
        if (fields[0] == "letter-probability" && fields.size() >= 2 &&
            fields[1].rfind("matrix", 0) == 0) {
            if (!pending_name)
                throw ParseError("letter-probability matrix before any MOTIF line", line_no);
            // Width from "w= N"; other attributes (nsites=, E=) are ignored.
            std::optional<std::size_t> width;
            for (std::size_t i = 2; i < fields.size(); ++i) {
                if (fields[i] == "w=" && i + 1 < fields.size()) {
                    width = static_cast<std::size_t>(parse_int(fields[i + 1], line_no, "width"));
                    break;
                }
                if (fields[i].rfind("w=", 0) == 0 && fields[i].size() > 2) {
                    width = static_cast<std::size_t>(
                        parse_int(fields[i].substr(2), line_no, "width"));
                    break;
                }
            }
            if (!width || *width == 0)
                throw ParseError("letter-probability matrix line without w=", line_no);

            PwmMotif motif;
            motif.name = *pending_name;
            motif.matrix.reserve(*width);
            std::string row_line;
            for (std::size_t r = 0; r < *width; ++r) {
                do {
                    if (!get_line(in, row_line))
                        throw ParseError("motif '" + motif.name + "' declares w=" +
                                             std::to_string(*width) + " but has only " +
                                             std::to_string(r) + " rows",
                                         line_no);
                    ++line_no;
                } while (blank_or_comment(row_line));
                auto row_fields = split_ws(row_line);
                if (row_fields.size() != 4) {
                    if (row_fields.size() >= 1 &&
                        (row_fields[0] == "MOTIF" || row_fields[0] == "letter-probability"))
                        throw ParseError("motif '" + motif.name + "' declares w=" +
                                             std::to_string(*width) + " but has only " +
                                             std::to_string(r) + " rows",
                                         line_no);
                    throw ParseError("expected 4 probabilities, got " +
                                         std::to_string(row_fields.size()),
                                     line_no);
                }
                std::array<double, 4> row{};
                double sum = 0.0;
                for (std::size_t c = 0; c < 4; ++c) {
                    row[c] = parse_real(row_fields[c], line_no, "probability");
                    if (row[c] < 0.0 || row[c] > 1.0)
                        throw ParseError("probability " + row_fields[c] + " outside [0,1]",
                                         line_no);
                    sum += row[c];
                }
                if (std::abs(sum - 1.0) > 1e-3)
                    throw ParseError("row sum " + std::to_string(sum) + " deviates from 1 by > 1e-3",
                                     line_no);
                if (sum != 1.0)
                    for (auto& p : row) p /= sum;
                motif.matrix.push_back(row);
            }
            motifs.push_back(std::move(motif));
            pending_name.reset();
            continue;
        }
        // Header material (MEME version, ALPHABET, strands, background) is ignored.
    }
    return motifs;
}

std::string serialize_meme(const std::vector<PwmMotif>& motifs) {
    std::ostringstream os;
    os << "MEME version 4\n\nALPHABET= ACGT\n";
    os << std::setprecision(17);
    for (const auto& m : motifs) {
        os << "\nMOTIF " << m.name << "\n";
        os << "letter-probability matrix: alength= 4 w= " << m.width() << "\n";
        for (const auto& row : m.matrix)
            os << row[0] << ' ' << row[1] << ' ' << row[2] << ' ' << row[3] << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Text / file conveniences
// ---------------------------------------------------------------------------

std::vector<SequenceRecord> parse_fasta_text(const std::string& text) {
    std::istringstream ss(text);
    return parse_fasta(ss);
}

ConservationTrack parse_bedgraph_text(const std::string& text) {
    std::istringstream ss(text);
    return parse_bedgraph(ss);
}

std::vector<RegionAnnotation> parse_bed_regions_text(const std::string& text) {
    std::istringstream ss(text);
    return parse_bed_regions(ss);
}

std::vector<PwmMotif> parse_meme_text(const std::string& text) {
    std::istringstream ss(text);
    return parse_meme(ss);
}

namespace {

template <typename Fn>
auto with_file(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return fn(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

} // namespace

std::vector<SequenceRecord> load_fasta(const std::string& path) {
    return with_file(path, [](std::istream& in) { return parse_fasta(in); });
}

ConservationTrack load_bedgraph(const std::string& path) {
    return with_file(path, [](std::istream& in) { return parse_bedgraph(in); });
}

std::vector<RegionAnnotation> load_bed_regions(const std::string& path) {
    return with_file(path, [](std::istream& in) { return parse_bed_regions(in); });
}

std::vector<PwmMotif> load_meme(const std::string& path) {
    return with_file(path, [](std::istream& in) { return parse_meme(in); });
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace evolen
