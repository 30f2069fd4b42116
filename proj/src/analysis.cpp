#include "evolen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "evolen/parallel.hpp"

namespace evolen {

// ---------------------------------------------------------------------------
// PWM -> consensus
// ---------------------------------------------------------------------------

namespace {

int argmax_base(const std::array<double, 4>& row) {
    int best = 0;
    for (int b = 1; b < 4; ++b)
        if (row[b] > row[best]) best = b;
    return best;
}

} // namespace

std::optional<MotifRecord> pwm_to_consensus(const PwmMotif& motif, const ConsensusParams& params) {
    const std::size_t w = motif.width();
    if (w == 0) return std::nullopt;

    std::vector<bool> determinate(w);
    for (std::size_t i = 0; i < w; ++i) {
        double mx = *std::max_element(motif.matrix[i].begin(), motif.matrix[i].end());
        determinate[i] = mx >= 0.5;
    }

    std::size_t lo = 0, hi = w;
    while (lo < hi && !determinate[lo]) ++lo;
    while (hi > lo && !determinate[hi - 1]) --hi;
    if (lo == hi || hi - lo > params.max_motif_len) return std::nullopt;

    MotifRecord rec;
    rec.name = motif.name;
    std::vector<std::size_t> wildcard_positions; // relative to trimmed consensus
    for (std::size_t i = lo; i < hi; ++i) {
        rec.consensus.push_back(kBases[argmax_base(motif.matrix[i])]);
        if (!determinate[i]) wildcard_positions.push_back(i - lo);
    }

    // Variant set: expand internal wildcards over nucleotides at or above
    // the expansion threshold; oversized expansions keep consensus only.
    std::vector<std::vector<char>> choices;
    std::size_t combos = 1;
    for (std::size_t pos : wildcard_positions) {
        const auto& row = motif.matrix[lo + pos];
        std::vector<char> opts;
        for (int b = 0; b < 4; ++b)
            if (row[b] >= params.wildcard_threshold) opts.push_back(kBases[b]);
        if (opts.empty()) opts.push_back(rec.consensus[pos]);
        combos *= opts.size();
        choices.push_back(std::move(opts));
        if (combos > params.max_variants) break;
    }
    if (combos > params.max_variants || wildcard_positions.empty()) {
        rec.variants.push_back(rec.consensus);
        return rec;
    }

    std::vector<std::string> variants{rec.consensus};
    for (std::size_t k = 0; k < wildcard_positions.size(); ++k) {
        std::vector<std::string> next;
        next.reserve(variants.size() * choices[k].size());
        for (const auto& v : variants) {
            for (char c : choices[k]) {
                std::string u = v;
                u[wildcard_positions[k]] = c;
                next.push_back(std::move(u));
            }
        }
        variants = std::move(next);
    }
    std::sort(variants.begin(), variants.end());
    variants.erase(std::unique(variants.begin(), variants.end()), variants.end());
    // Keep the consensus first; the rest stay sorted.
    auto it = std::find(variants.begin(), variants.end(), rec.consensus);
    std::rotate(variants.begin(), it, it + 1);
    rec.variants = std::move(variants);
    return rec;
}

std::vector<MotifRecord> motifs_from_pwms(const std::vector<PwmMotif>& pwms,
                                          const ConsensusParams& params) {
    std::vector<MotifRecord> out;
    for (const auto& pwm : pwms)
        if (auto rec = pwm_to_consensus(pwm, params)) out.push_back(std::move(*rec));
    return out;
}

// ---------------------------------------------------------------------------
// Motif metrics
// ---------------------------------------------------------------------------

namespace {

std::size_t non_n_token_count(const std::vector<TokenSpan>& spans) {
    std::size_t n = 0;
    for (const auto& s : spans)
        if (s.token != "N") ++n;
    return n;
}

double population_std(const std::vector<std::size_t>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (auto x : xs) mean += static_cast<double>(x);
    mean /= static_cast<double>(xs.size());
    double sq = 0.0;
    for (auto x : xs) sq += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    return std::sqrt(sq / static_cast<double>(xs.size()));
}

} // namespace

MotifMetrics motif_metrics(const ScoredVocabulary& vocab, const std::vector<MotifRecord>& motifs) {
    if (motifs.empty()) throw std::invalid_argument("motif_metrics: empty motif list");

    MotifMetrics m;
    m.motif_count = motifs.size();
    std::size_t perfect = 0, in_vocab = 0;
    double token_sum = 0.0, fraction_sum = 0.0, std_sum = 0.0;

    for (const auto& motif : motifs) {
        auto spans = encode_dp(vocab, motif.consensus);
        token_sum += static_cast<double>(spans.size());
        if (spans.size() == 1) ++perfect;
        if (vocab.contains(motif.consensus)) ++in_vocab;

        double frac = 0.0;
        for (const auto& s : spans)
            frac += static_cast<double>(s.token.size()) /
                    static_cast<double>(motif.consensus.size());
        fraction_sum += frac / static_cast<double>(spans.size());

        std::vector<std::size_t> counts;
        counts.reserve(motif.variants.size());
        for (const auto& v : motif.variants)
            counts.push_back(non_n_token_count(encode_dp(vocab, v)));
        std_sum += population_std(counts);
    }

    double n = static_cast<double>(motifs.size());
    m.avg_tokens_per_motif = token_sum / n;
    m.perfect_match_rate = 100.0 * static_cast<double>(perfect) / n;
    m.exact_vocab_rate = 100.0 * static_cast<double>(in_vocab) / n;
    m.avg_token_fraction = fraction_sum / n;
    m.consistency = std_sum / n;
    return m;
}

// ---------------------------------------------------------------------------
// Length signatures / Jensen-Shannon
// ---------------------------------------------------------------------------

const char* const kLengthBinNames[4] = {"1-2", "3-5", "6-8", "9+"};

int length_bin(std::size_t len) {
    if (len <= 2) return 0;
    if (len <= 5) return 1;
    if (len <= 8) return 2;
    return 3;
}

LengthSignature length_signature(const ScoredVocabulary& vocab,
                                 const std::vector<SequenceRecord>& sequences,
                                 std::size_t threads) {
    auto encoded = encode_records(vocab, sequences, threads);
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t total = 0;
    for (const auto& spans : encoded) {
        for (const auto& s : spans) {
            if (s.token == "N") continue;
            ++counts[static_cast<std::size_t>(length_bin(s.token.size()))];
            ++total;
        }
    }
    if (total == 0) throw std::invalid_argument("length_signature: no tokens produced");
    LengthSignature sig;
    sig.token_count = total;
    for (std::size_t i = 0; i < 4; ++i)
        sig.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return sig;
}

double js_divergence(std::span<const double> p, std::span<const double> q, double log_base) {
    if (p.size() != q.size())
        throw std::invalid_argument("js_divergence: dimension mismatch");
    if (log_base <= 1.0) throw std::invalid_argument("js_divergence: log base must exceed 1");
    const double log_scale = std::log(log_base);
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m) / log_scale;
        if (q[i] > 0.0) d += 0.5 * q[i] * std::log(q[i] / m) / log_scale;
    }
    return d < 0.0 ? 0.0 : d;
}

double js_distance(std::span<const double> p, std::span<const double> q, double log_base) {
    return std::sqrt(js_divergence(p, q, log_base));
}

double js_divergence(const LengthSignature& p, const LengthSignature& q, double log_base) {
    return js_divergence(std::span<const double>(p.probs), std::span<const double>(q.probs),
                         log_base);
}

double js_distance(const LengthSignature& p, const LengthSignature& q, double log_base) {
    return std::sqrt(js_divergence(p, q, log_base));
}

// ---------------------------------------------------------------------------
// Per-token conservation alignment
// ---------------------------------------------------------------------------

PhylopTokenStats phylop_token_stats(const ScoredVocabulary& vocab,
                                    const std::vector<SequenceRecord>& genome,
                                    const ConservationTrack& track, const BinnedTrack& binned,
                                    const Stratification& strat, std::size_t threads) {
    if (strat.assignments.size() != binned.entries.size())
        throw std::invalid_argument("assignments do not match binned track");

    std::unordered_map<std::string, const SequenceRecord*> by_id;
    for (const auto& rec : genome) by_id.emplace(rec.id, &rec);

    struct Acc {
        std::uint64_t n = 0;
        double sum = 0.0;
        double sumsq = 0.0;
    };
    // Tokenize bins in parallel, then fold per-bin results in canonical
    // entry/bin order so double accumulation is thread-count independent.
    struct BinResult {
        Category category{};
        std::vector<std::pair<std::size_t, Acc>> per_token; // vocab entry -> bin-local acc
    };

    struct BinRef {
        std::size_t entry;
        std::size_t bin;
    };
    std::vector<BinRef> refs;
    for (std::size_t e = 0; e < binned.entries.size(); ++e)
        for (std::size_t b = 0; b < binned.entries[e].means.size(); ++b)
            refs.push_back({e, b});

    for (const auto& entry : binned.entries)
        if (!by_id.count(entry.record_id))
            throw std::invalid_argument("record '" + entry.record_id + "' missing from genome");

    std::vector<BinResult> results(refs.size());
    const std::size_t bin_size = static_cast<std::size_t>(binned.bin_size);

    parallel_chunks(refs.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        std::vector<double> scores;
        for (std::size_t r = begin; r < end; ++r) {
            const auto& entry = binned.entries[refs[r].entry];
            std::size_t b = refs[r].bin;
            const SequenceRecord& rec = *by_id.find(entry.record_id)->second;
            std::size_t pos = b * bin_size;
            std::string_view bases(rec.bases.data() + pos, bin_size);

            auto& res = results[r];
            res.category = strat.assignments[refs[r].entry][b];
            std::int64_t abs_start = entry.offset + static_cast<std::int64_t>(pos);
            track.fill_scores(entry.contig, abs_start, abs_start + static_cast<std::int64_t>(bin_size),
                              scores);

            std::unordered_map<std::size_t, Acc> local;
            for (const auto& span : encode_dp(vocab, bases)) {
                if (span.token == "N") continue;
                auto idx = vocab.find(span.token);
                auto& acc = local[*idx];
                for (std::size_t p = span.start; p < span.end; ++p) {
                    double s = scores[p];
                    ++acc.n;
                    acc.sum += s;
                    acc.sumsq += s * s;
                }
            }
            res.per_token.assign(local.begin(), local.end());
            std::sort(res.per_token.begin(), res.per_token.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }
    });

    std::array<std::map<std::size_t, Acc>, kCategoryCount> pooled;
    for (const auto& res : results) {
        auto& dst = pooled[static_cast<std::size_t>(res.category)];
        for (const auto& [token_idx, acc] : res.per_token) {
            auto& d = dst[token_idx];
            d.n += acc.n;
            d.sum += acc.sum;
            d.sumsq += acc.sumsq;
        }
    }

    PhylopTokenStats stats;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const auto& tokens = pooled[c];
        if (tokens.empty()) continue;
        CategoryTokenStats cs;
        cs.distinct_tokens = tokens.size();
        std::size_t positive = 0;
        double mean_sum = 0.0, var_sum = 0.0;
        for (const auto& [idx, acc] : tokens) {
            double mean = acc.sum / static_cast<double>(acc.n);
            double var = acc.sumsq / static_cast<double>(acc.n) - mean * mean;
            if (var < 0.0) var = 0.0;
            mean_sum += mean;
            var_sum += var;
            if (mean > 0.0) ++positive;
        }
        double n = static_cast<double>(tokens.size());
        cs.mean_phylop = mean_sum / n;
        cs.pct_positive = 100.0 * static_cast<double>(positive) / n;
        cs.mean_intra_variance = var_sum / n;
        stats[c] = cs;
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Region handling
// ---------------------------------------------------------------------------

namespace {

struct RegionSlice {
    std::string id;
    std::string contig;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::string bases;
};

std::optional<RegionSlice> slice_region(
    const std::unordered_map<std::string, const SequenceRecord*>& by_contig,
    const RegionAnnotation& region) {
    auto it = by_contig.find(region.contig);
    if (it == by_contig.end()) return std::nullopt;
    const SequenceRecord& rec = *it->second;
    std::int64_t rec_begin = rec.source_offset;
    std::int64_t rec_end = rec.source_offset + static_cast<std::int64_t>(rec.bases.size());
    std::int64_t lo = std::max(region.start, rec_begin);
    std::int64_t hi = std::min(region.end, rec_end);
    if (lo >= hi) return std::nullopt;
    RegionSlice slice;
    slice.contig = region.contig;
    slice.start = lo;
    slice.end = hi;
    slice.id = region.contig + ":" + std::to_string(lo) + "-" + std::to_string(hi) + ":" +
               region_kind_name(region.kind);
    slice.bases = rec.bases.substr(static_cast<std::size_t>(lo - rec_begin),
                                   static_cast<std::size_t>(hi - lo));
    return slice;
}

} // namespace

std::array<std::vector<SequenceRecord>, kRegionKindCount>
region_sequences(const std::vector<SequenceRecord>& genome,
                 const std::vector<RegionAnnotation>& regions) {
    std::unordered_map<std::string, const SequenceRecord*> by_contig;
    for (const auto& rec : genome) by_contig.emplace(rec.source_contig, &rec);

    std::array<std::vector<SequenceRecord>, kRegionKindCount> out;
    for (const auto& region : regions) {
        auto slice = slice_region(by_contig, region);
        if (!slice) continue;
        SequenceRecord rec;
        rec.id = std::move(slice->id);
        rec.bases = std::move(slice->bases);
        rec.source_contig = slice->contig;
        rec.source_offset = slice->start;
        out[static_cast<std::size_t>(region.kind)].push_back(std::move(rec));
    }
    return out;
}

RegionCategorySequences partition_regions(const std::vector<SequenceRecord>& genome,
                                          const std::vector<RegionAnnotation>& regions,
                                          const BinnedTrack& binned, const Stratification& strat) {
    if (strat.assignments.size() != binned.entries.size())
        throw std::invalid_argument("assignments do not match binned track");

    std::unordered_map<std::string, const SequenceRecord*> by_contig;
    for (const auto& rec : genome) by_contig.emplace(rec.source_contig, &rec);

    // Per contig: the binned entries covering it, in canonical order.
    std::unordered_map<std::string, std::vector<std::size_t>> entries_by_contig;
    for (std::size_t e = 0; e < binned.entries.size(); ++e)
        entries_by_contig[binned.entries[e].contig].push_back(e);

    const std::int64_t bin_size = binned.bin_size;
    RegionCategorySequences out;

    for (const auto& region : regions) {
        auto slice = slice_region(by_contig, region);
        if (!slice) continue;

        // Category of the conservation bin with the largest base overlap;
        // ties go to the lower bin index.
        std::optional<Category> category;
        std::int64_t best_overlap = 0;
        auto eit = entries_by_contig.find(region.contig);
        if (eit == entries_by_contig.end()) continue;
        for (std::size_t e : eit->second) {
            const auto& entry = binned.entries[e];
            for (std::size_t b = 0; b < entry.means.size(); ++b) {
                std::int64_t bin_lo = entry.offset + static_cast<std::int64_t>(b) * bin_size;
                std::int64_t bin_hi = bin_lo + bin_size;
                std::int64_t overlap =
                    std::min(slice->end, bin_hi) - std::max(slice->start, bin_lo);
                if (overlap > best_overlap) {
                    best_overlap = overlap;
                    category = strat.assignments[e][b];
                }
            }
        }
        if (!category) continue;

        SequenceRecord rec;
        rec.id = std::move(slice->id);
        rec.bases = std::move(slice->bases);
        rec.source_contig = slice->contig;
        rec.source_offset = slice->start;
        out[static_cast<std::size_t>(region.kind)][static_cast<std::size_t>(*category)].push_back(
            std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enrichment
// ---------------------------------------------------------------------------

std::vector<double> smoothed_log2_fold_change(std::span<const std::uint64_t> bin_counts,
                                              std::span<const std::uint64_t> bg_counts,
                                              double alpha) {
    if (bin_counts.size() != bg_counts.size())
        throw std::invalid_argument("fold change: count vectors differ in size");
    if (alpha <= 0.0) throw std::invalid_argument("fold change: alpha must be positive");
    const double v = static_cast<double>(bin_counts.size());
    std::uint64_t n_bin = 0, n_bg = 0;
    for (auto c : bin_counts) n_bin += c;
    for (auto c : bg_counts) n_bg += c;
    const double denom_bin = static_cast<double>(n_bin) + alpha * v;
    const double denom_bg = static_cast<double>(n_bg) + alpha * v;

    std::vector<double> fc(bin_counts.size());
    for (std::size_t t = 0; t < bin_counts.size(); ++t) {
        double f_bin = (static_cast<double>(bin_counts[t]) + alpha) / denom_bin;
        double f_bg = (static_cast<double>(bg_counts[t]) + alpha) / denom_bg;
        fc[t] = std::log2(f_bin / f_bg);
    }
    return fc;
}

EnrichmentTable enrichment(const ScoredVocabulary& vocab, const RegionCategorySequences& bins,
                           double alpha, std::size_t threads) {
    EnrichmentTable table;
    table.alpha = alpha;
    table.tokens.reserve(vocab.size());
    for (const auto& e : vocab.entries()) table.tokens.push_back(e.token);

    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            auto& bin = table.bins[r][c];
            bin.counts.assign(vocab.size(), 0);
            const auto& sequences = bins[r][c];
            if (sequences.empty()) continue;
            bin.present = true;
            auto encoded = encode_records(vocab, sequences, threads);
            for (const auto& spans : encoded) {
                for (const auto& span : spans) {
                    if (span.token == "N") continue;
                    ++bin.counts[*vocab.find(span.token)];
                    ++bin.total;
                }
            }
        }
    }

    const auto& bg = table.background();
    if (!bg.present)
        throw std::invalid_argument("enrichment: background bin (intron x neutral) is empty");

    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            auto& bin = table.bins[r][c];
            if (!bin.present) continue;
            bin.log2fc = smoothed_log2_fold_change(bin.counts, bg.counts, alpha);
            double sum = 0.0;
            for (double x : bin.log2fc) sum += x;
            bin.mean_log2fc = sum / static_cast<double>(vocab.size());
        }
    }
    return table;
}

double separation(const EnrichmentTable& table, RegionKind region) {
    const auto& con = table.bins[static_cast<std::size_t>(region)]
                                [static_cast<std::size_t>(Category::conserved)];
    const auto& acc = table.bins[static_cast<std::size_t>(region)]
                                [static_cast<std::size_t>(Category::accelerated)];
    if (!con.present || !acc.present)
        throw std::invalid_argument(std::string("separation: missing bin for region ") +
                                    region_kind_name(region));
    return std::abs(con.mean_log2fc - acc.mean_log2fc);
}

// ---------------------------------------------------------------------------
// TSV rendering
// ---------------------------------------------------------------------------

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string render_motif_metrics_tsv(const MotifMetrics& m) {
    std::string out = "AvgTokPerMotif\tPerfectMatchPct\tExactVocabPct\tAvgTokenFrac\t"
                      "Consistency\tMotifs\n";
    out += fixed6(m.avg_tokens_per_motif) + '\t' + fixed6(m.perfect_match_rate) + '\t' +
           fixed6(m.exact_vocab_rate) + '\t' + fixed6(m.avg_token_fraction) + '\t' +
           fixed6(m.consistency) + '\t' + std::to_string(m.motif_count) + '\n';
    return out;
}

std::string render_length_signatures_tsv(const RegionSignatures& signatures) {
    std::string out = "Region\tPct1-2\tPct3-5\tPct6-8\tPct9+\tTokens\n";
    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        if (!signatures[r]) continue;
        const auto& sig = *signatures[r];
        out += region_kind_name(static_cast<RegionKind>(r));
        for (double p : sig.probs) out += '\t' + fixed6(100.0 * p);
        out += '\t' + std::to_string(sig.token_count) + '\n';
    }
    return out;
}

std::string render_js_tsv(const RegionSignatures& signatures, double log_base) {
    std::string out = "RegionA\tRegionB\tJSDivergence\tJSDistance\n";
    for (std::size_t a = 0; a < kRegionKindCount; ++a) {
        for (std::size_t b = a + 1; b < kRegionKindCount; ++b) {
            if (!signatures[a] || !signatures[b]) continue;
            double div = js_divergence(*signatures[a], *signatures[b], log_base);
            out += std::string(region_kind_name(static_cast<RegionKind>(a))) + '\t' +
                   region_kind_name(static_cast<RegionKind>(b)) + '\t' + fixed6(div) + '\t' +
                   fixed6(std::sqrt(div)) + '\n';
        }
    }
    return out;
}

std::string render_phylop_tsv(const PhylopTokenStats& stats) {
    std::string out = "Region\tMeanPhyloP\tPctPositive\tMeanVar\tTokens\n";
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        if (!stats[c]) continue;
        const auto& s = *stats[c];
        out += std::string(category_name(static_cast<Category>(c))) + '\t' +
               fixed6(s.mean_phylop) + '\t' + fixed6(s.pct_positive) + '\t' +
               fixed6(s.mean_intra_variance) + '\t' + std::to_string(s.distinct_tokens) + '\n';
    }
    return out;
}

std::string render_enrichment_tsv(const EnrichmentTable& table) {
    std::string out = "Region\tCategory\tTokens\tMeanLog2FC\n";
    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            const auto& bin = table.bins[r][c];
            if (!bin.present) continue;
            out += std::string(region_kind_name(static_cast<RegionKind>(r))) + '\t' +
                   category_name(static_cast<Category>(c)) + '\t' + std::to_string(bin.total) +
                   '\t' + fixed6(bin.mean_log2fc) + '\n';
        }
    }
    return out;
}

std::string render_separation_tsv(const EnrichmentTable& table) {
    std::string out = "Region\tSeparation\n";
    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        const auto& con = table.bins[r][static_cast<std::size_t>(Category::conserved)];
        const auto& acc = table.bins[r][static_cast<std::size_t>(Category::accelerated)];
        if (!con.present || !acc.present) continue;
        out += std::string(region_kind_name(static_cast<RegionKind>(r))) + '\t' +
               fixed6(std::abs(con.mean_log2fc - acc.mean_log2fc)) + '\n';
    }
    return out;
}

} // namespace evolen
