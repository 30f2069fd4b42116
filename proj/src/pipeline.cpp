#include "evolen/pipeline.hpp"

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "evolen/common.hpp"

namespace fs = std::filesystem;

namespace evolen {

const char* pipeline_variant_name(PipelineVariant v) {
    switch (v) {
    case PipelineVariant::full: return "full";
    case PipelineVariant::no_partition: return "no_partition";
    case PipelineVariant::no_priority: return "no_priority";
    case PipelineVariant::no_length: return "no_length";
    }
    return "?";
}

std::optional<PipelineVariant> pipeline_variant_from_name(std::string_view name) {
    if (name == "full") return PipelineVariant::full;
    if (name == "no_partition") return PipelineVariant::no_partition;
    if (name == "no_priority") return PipelineVariant::no_priority;
    if (name == "no_length") return PipelineVariant::no_length;
    return std::nullopt;
}

int PipelineConfig::effective_exponent() const {
    return variant == PipelineVariant::no_length ? 1 : length_exponent;
}

void PipelineConfig::validate() const {
    if (fasta.empty()) throw std::invalid_argument("config: fasta path required");
    if (out_dir.empty()) throw std::invalid_argument("config: out_dir required");
    if (vocab_size < 4) throw std::invalid_argument("config: vocab_size must be >= 4");
    if (bin_size < 1) throw std::invalid_argument("config: bin_size must be >= 1");
    if (z <= 0.0) throw std::invalid_argument("config: z must be > 0");
    if (alpha <= 0.0) throw std::invalid_argument("config: alpha must be > 0");
    if (length_exponent != 1 && length_exponent != 2)
        throw std::invalid_argument("config: length_exponent must be 1 or 2");
    if (variant != PipelineVariant::no_partition && phylop.empty())
        throw std::invalid_argument(std::string("config: variant ") +
                                    pipeline_variant_name(variant) + " requires a phylop track");
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PipelineConfig c;
    c.fasta = j.value("fasta", std::string{});
    c.phylop = j.value("phylop", std::string{});
    c.regions = j.value("regions", std::string{});
    c.motifs = j.value("motifs", std::string{});
    c.out_dir = j.value("out_dir", std::string{});
    c.bin_size = j.value("bin_size", 100);
    c.z = j.value("z", 1.645);
    c.vocab_size = j.value("vocab_size", std::size_t{5120});
    c.length_exponent = j.value("length_exponent", 2);
    c.alpha = j.value("alpha", 0.5);
    c.min_pair_frequency = j.value("min_pair_frequency", std::uint64_t{2});
    c.wildcard_threshold = j.value("wildcard_threshold", 0.25);
    c.max_variants = j.value("max_variants", std::size_t{256});
    c.log_base = j.value("log_base", 2.0);
    c.threads = j.value("threads", std::size_t{1});
    std::string variant = j.value("variant", std::string{"full"});
    auto v = pipeline_variant_from_name(variant);
    if (!v) throw std::invalid_argument("config: unknown variant '" + variant + "'");
    c.variant = *v;
    return c;
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["fasta"] = c.fasta;
    j["phylop"] = c.phylop;
    j["regions"] = c.regions;
    j["motifs"] = c.motifs;
    j["out_dir"] = c.out_dir;
    j["bin_size"] = c.bin_size;
    j["z"] = c.z;
    j["vocab_size"] = c.vocab_size;
    j["length_exponent"] = c.length_exponent;
    j["variant"] = pipeline_variant_name(c.variant);
    j["alpha"] = c.alpha;
    j["min_pair_frequency"] = c.min_pair_frequency;
    j["wildcard_threshold"] = c.wildcard_threshold;
    j["max_variants"] = c.max_variants;
    j["log_base"] = c.log_base;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

PipelineConfig load_pipeline_config(const std::string& path) {
    return pipeline_config_from_json(read_text_file(path));
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

struct ArtifactWriter {
    fs::path dir;
    nlohmann::json manifest_entries = nlohmann::json::array();
    std::vector<std::string> paths;

    void write(const std::string& name, const std::string& contents) {
        fs::path path = dir / name;
        write_text_file(path.string(), contents);
        nlohmann::json entry;
        entry["name"] = name;
        entry["path"] = path.string();
        entry["bytes"] = contents.size();
        entry["fnv1a64"] = to_hex(fnv1a64(contents));
        manifest_entries.push_back(std::move(entry));
        paths.push_back(path.string());
    }
};

nlohmann::json signature_json(const RegionSignatures& signatures) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t r = 0; r < kRegionKindCount; ++r) {
        if (!signatures[r]) continue;
        nlohmann::json s;
        s["probs"] = signatures[r]->probs;
        s["token_count"] = signatures[r]->token_count;
        j[region_kind_name(static_cast<RegionKind>(r))] = std::move(s);
    }
    return j;
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();

    fs::create_directories(config.out_dir);
    ArtifactWriter writer;
    writer.dir = fs::path(config.out_dir);

    // A previous manifest no longer describes what this run writes; its
    // absence marks the directory as stale until the run completes.
    fs::path manifest_path = writer.dir / "manifest.json";
    if (fs::exists(manifest_path)) fs::remove(manifest_path);

    const std::string config_json = pipeline_config_to_json(config);
    const std::string config_hash = to_hex(fnv1a64(config_json));
    const int exponent = config.effective_exponent();

    auto genome = stage("load-genome", [&] { return load_fasta(config.fasta); });

    // Stratification runs whenever a track is provided: training pools for
    // the stratified variants, category assignments for evaluation always.
    std::optional<ConservationTrack> track;
    std::optional<BinnedTrack> binned;
    std::optional<Stratification> strat;
    if (!config.phylop.empty()) {
        stage("stratify", [&] {
            track = load_bedgraph(config.phylop);
            binned = bin_track(genome, *track, config.bin_size, config.threads);
            StratificationParams params{config.z, config.bin_size};
            strat = classify_bins(*binned, params);
            return 0;
        });
    }

    BpeTrainConfig train_config{config.vocab_size, config.min_pair_frequency, config.threads};
    ScoredVocabulary vocab;

    if (config.variant == PipelineVariant::no_partition) {
        auto v_all = stage("train", [&] {
            auto units = chop_bins(genome, config.bin_size);
            return train_bpe(units, "all", train_config);
        });
        writer.write("vocab_all.json", serialize_bpe_vocabulary(v_all));
        vocab = stage("score", [&] { return ScoredVocabulary::from_tokens(v_all.tokens, exponent); });
    } else {
        auto pools = stage("stratify", [&] { return extract_pools(genome, *binned, *strat); });
        auto counts = strat->category_counts();
        nlohmann::json stats;
        stats["mu"] = strat->mu;
        stats["sigma"] = strat->sigma;
        stats["bin_counts"] = {{"conserved", counts[0]},
                               {"neutral", counts[1]},
                               {"accelerated", counts[2]}};
        writer.write("stratify_stats.json", stats.dump(2) + "\n");
        writer.write("conserved.fa", serialize_fasta(pools[0].sequences));
        writer.write("neutral.fa", serialize_fasta(pools[1].sequences));
        writer.write("accelerated.fa", serialize_fasta(pools[2].sequences));

        auto vocabs = stage("train", [&] {
            std::array<BpeVocabulary, kCategoryCount> vs;
            for (std::size_t c = 0; c < kCategoryCount; ++c) vs[c] = train_bpe(pools[c], train_config);
            return vs;
        });
        writer.write("vocab_con.json", serialize_bpe_vocabulary(vocabs[0]));
        writer.write("vocab_neu.json", serialize_bpe_vocabulary(vocabs[1]));
        writer.write("vocab_acc.json", serialize_bpe_vocabulary(vocabs[2]));

        auto report = stage("merge", [&] {
            return config.variant == PipelineVariant::no_priority
                       ? merge_no_priority(vocabs[0], vocabs[1], vocabs[2], config.vocab_size)
                       : merge_vocabularies(vocabs[0], vocabs[1], vocabs[2], config.vocab_size);
        });
        writer.write("merged_vocab.json", serialize_merged_vocabulary(report));
        writer.write("merge_report.json", serialize_merge_report(report));
        vocab = stage("score", [&] { return build_scored_vocab(report, exponent); });
    }

    writer.write("tokenizer.json", serialize_tokenizer(vocab));

    // ---- Evaluation over whatever inputs are available ----
    nlohmann::json summary;
    summary["variant"] = pipeline_variant_name(config.variant);
    summary["length_exponent"] = exponent;
    summary["vocab_size"] = vocab.size();
    if (strat) {
        summary["stratification"] = {{"mu", strat->mu}, {"sigma", strat->sigma}};
    }

    if (!config.motifs.empty()) {
        stage("eval-motifs", [&] {
            auto pwms = load_meme(config.motifs);
            ConsensusParams params;
            params.wildcard_threshold = config.wildcard_threshold;
            params.max_variants = config.max_variants;
            auto motifs = motifs_from_pwms(pwms, params);
            if (motifs.empty()) throw std::runtime_error("no usable motifs after consensus");
            auto metrics = motif_metrics(vocab, motifs);
            writer.write("eval_motifs.tsv", render_motif_metrics_tsv(metrics));
            summary["motifs"] = {{"avg_tokens_per_motif", metrics.avg_tokens_per_motif},
                                 {"perfect_match_pct", metrics.perfect_match_rate},
                                 {"exact_vocab_pct", metrics.exact_vocab_rate},
                                 {"avg_token_fraction", metrics.avg_token_fraction},
                                 {"consistency", metrics.consistency},
                                 {"motif_count", metrics.motif_count}};
            return 0;
        });
    }

    std::optional<std::vector<RegionAnnotation>> regions;
    if (!config.regions.empty()) {
        stage("eval-regions", [&] {
            regions = load_bed_regions(config.regions);
            auto per_region = region_sequences(genome, *regions);
            RegionSignatures signatures;
            for (std::size_t r = 0; r < kRegionKindCount; ++r) {
                if (per_region[r].empty()) continue;
                try {
                    signatures[r] = length_signature(vocab, per_region[r], config.threads);
                } catch (const std::invalid_argument&) {
                    // region yielded zero tokens (all N); leave it absent
                }
            }
            writer.write("eval_region_lengths.tsv", render_length_signatures_tsv(signatures));
            writer.write("eval_region_js.tsv", render_js_tsv(signatures, config.log_base));
            summary["region_signatures"] = signature_json(signatures);
            return 0;
        });
    }

    if (strat) {
        stage("eval-phylop", [&] {
            auto stats = phylop_token_stats(vocab, genome, *track, *binned, *strat,
                                            config.threads);
            writer.write("eval_phylop.tsv", render_phylop_tsv(stats));
            nlohmann::json j = nlohmann::json::object();
            for (std::size_t c = 0; c < kCategoryCount; ++c) {
                if (!stats[c]) continue;
                j[category_name(static_cast<Category>(c))] = {
                    {"mean_phylop", stats[c]->mean_phylop},
                    {"pct_positive", stats[c]->pct_positive},
                    {"mean_intra_variance", stats[c]->mean_intra_variance},
                    {"distinct_tokens", stats[c]->distinct_tokens}};
            }
            summary["phylop"] = std::move(j);
            return 0;
        });
    }

    if (strat && regions) {
        stage("eval-enrichment", [&] {
            auto bins = partition_regions(genome, *regions, *binned, *strat);
            auto table = enrichment(vocab, bins, config.alpha, config.threads);
            writer.write("eval_enrichment.tsv", render_enrichment_tsv(table));
            writer.write("eval_separation.tsv", render_separation_tsv(table));
            nlohmann::json j = nlohmann::json::object();
            for (std::size_t r = 0; r < kRegionKindCount; ++r) {
                for (std::size_t c = 0; c < kCategoryCount; ++c) {
                    const auto& bin = table.bins[r][c];
                    if (!bin.present) continue;
                    j[std::string(region_kind_name(static_cast<RegionKind>(r))) + "x" +
                      category_name(static_cast<Category>(c))] = bin.mean_log2fc;
                }
            }
            summary["enrichment_mean_log2fc"] = std::move(j);
            return 0;
        });
    }

    writer.write("eval_summary.json", summary.dump(2) + "\n");

    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(config_json);
    manifest["config_hash"] = config_hash;
    manifest["variant"] = pipeline_variant_name(config.variant);
    manifest["artifacts"] = writer.manifest_entries;
    write_text_file(manifest_path.string(), manifest.dump(2) + "\n");

    PipelineResult result;
    result.manifest_path = manifest_path.string();
    result.tokenizer_path = (writer.dir / "tokenizer.json").string();
    result.config_hash = config_hash;
    result.artifacts = writer.paths;
    return result;
}

} // namespace evolen
