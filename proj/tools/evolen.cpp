#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "evolen/analysis.hpp"
#include "evolen/bpe_trainer.hpp"
#include "evolen/encoder.hpp"
#include "evolen/genome_io.hpp"
#include "evolen/pipeline.hpp"
#include "evolen/stratify.hpp"
#include "evolen/vocab_merge.hpp"

namespace fs = std::filesystem;
using namespace evolen;

namespace {

struct EvalCommon {
    std::string tokenizer;
    std::string out_prefix;
    std::size_t threads = 0;
};

void add_eval_common(CLI::App* cmd, EvalCommon& opts) {
    cmd->add_option("--tokenizer", opts.tokenizer, "tokenizer JSON file")->required();
    cmd->add_option("--out-prefix", opts.out_prefix, "output path prefix")->required();
    cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
}

void write_outputs(const std::string& prefix, const std::string& suffix,
                   const std::string& contents) {
    std::string path = prefix + suffix;
    write_text_file(path, contents);
    std::cout << "wrote " << path << "\n";
}

int run_stratify(const std::string& fasta, const std::string& phylop, int bin_size, double z,
                 const std::string& out_dir, std::size_t threads) {
    auto genome = load_fasta(fasta);
    auto track = load_bedgraph(phylop);
    auto binned = bin_track(genome, track, bin_size, threads);
    for (const auto& w : binned.warnings) std::cerr << "warning: " << w << "\n";
    auto strat = classify_bins(binned, StratificationParams{z, bin_size});
    auto pools = extract_pools(genome, binned, strat);

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_text_file((dir / "conserved.fa").string(), serialize_fasta(pools[0].sequences));
    write_text_file((dir / "neutral.fa").string(), serialize_fasta(pools[1].sequences));
    write_text_file((dir / "accelerated.fa").string(), serialize_fasta(pools[2].sequences));

    auto counts = strat.category_counts();
    nlohmann::json stats;
    stats["mu"] = strat.mu;
    stats["sigma"] = strat.sigma;
    stats["bin_counts"] = {{"conserved", counts[0]},
                           {"neutral", counts[1]},
                           {"accelerated", counts[2]}};
    write_text_file((dir / "stratify_stats.json").string(), stats.dump(2) + "\n");
    std::cout << "mu=" << strat.mu << " sigma=" << strat.sigma << " conserved=" << counts[0]
              << " neutral=" << counts[1] << " accelerated=" << counts[2] << "\n";
    return 0;
}

std::string encode_tsv(const ScoredVocabulary& vocab, const std::vector<SequenceRecord>& records,
                       std::size_t threads) {
    auto encoded = encode_records(vocab, records, threads);
    std::string out = "seq_id\tstart\tend\ttoken\n";
    for (std::size_t r = 0; r < records.size(); ++r)
        for (const auto& span : encoded[r])
            out += records[r].id + '\t' + std::to_string(span.start) + '\t' +
                   std::to_string(span.end) + '\t' + span.token + '\n';
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EvoLen: conservation-aware genomic tokenizer toolkit"};
    app.require_subcommand(1);

    // ---- stratify ----
    std::string fasta, phylop, out_dir;
    int bin_size = 100;
    double z = 1.645;
    std::size_t threads = 0;
    auto* stratify_cmd = app.add_subcommand("stratify", "partition a genome into sequence pools");
    stratify_cmd->add_option("--fasta", fasta)->required();
    stratify_cmd->add_option("--phylop", phylop, "bedGraph conservation track")->required();
    stratify_cmd->add_option("--bin-size", bin_size, "bin width in bases");
    stratify_cmd->add_option("--z", z, "two-tailed z threshold");
    stratify_cmd->add_option("--out-dir", out_dir)->required();
    stratify_cmd->add_option("--threads", threads);

    // ---- train ----
    std::string pool_path, label, train_out;
    std::size_t vocab_size = 5120;
    std::uint64_t min_pair_freq = 2;
    auto* train_cmd = app.add_subcommand("train", "train a BPE vocabulary on one pool");
    train_cmd->add_option("--pool", pool_path, "pool FASTA")->required();
    train_cmd->add_option("--vocab-size", vocab_size)->required();
    train_cmd->add_option("--label", label, "pool label")
        ->required()
        ->check(CLI::IsMember({"con", "neu", "acc"}));
    train_cmd->add_option("--out", train_out)->required();
    train_cmd->add_option("--min-pair-freq", min_pair_freq, "minimum pair count to merge");
    train_cmd->add_option("--threads", threads);

    // ---- merge ----
    std::string con_path, neu_path, acc_path, merge_out;
    std::size_t target = 5120;
    bool no_priority = false;
    auto* merge_cmd = app.add_subcommand("merge", "merge the three category vocabularies");
    merge_cmd->add_option("--con", con_path)->required();
    merge_cmd->add_option("--neu", neu_path)->required();
    merge_cmd->add_option("--acc", acc_path)->required();
    merge_cmd->add_option("--target", target, "final vocabulary size");
    merge_cmd->add_flag("--no-priority", no_priority, "frequency-ordered union instead of tiers");
    merge_cmd->add_option("--out", merge_out)->required();

    // ---- encode ----
    std::string enc_tokenizer, enc_fasta, enc_out;
    auto* encode_cmd = app.add_subcommand("encode", "segment sequences with a tokenizer");
    encode_cmd->add_option("--tokenizer", enc_tokenizer)->required();
    encode_cmd->add_option("--fasta", enc_fasta)->required();
    encode_cmd->add_option("--out", enc_out, "output TSV")->required();
    encode_cmd->add_option("--threads", threads);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "token-quality metrics");
    eval_cmd->require_subcommand(1);

    EvalCommon motif_opts;
    std::string meme_path;
    double wildcard_threshold = 0.25;
    std::size_t max_variants = 256;
    auto* motifs_cmd = eval_cmd->add_subcommand("motifs", "motif preservation metrics");
    add_eval_common(motifs_cmd, motif_opts);
    motifs_cmd->add_option("--meme", meme_path, "MEME motif library")->required();
    motifs_cmd->add_option("--wildcard-threshold", wildcard_threshold);
    motifs_cmd->add_option("--max-variants", max_variants);

    EvalCommon region_opts;
    std::string region_fasta, region_bed;
    double log_base = 2.0;
    auto* regions_cmd = eval_cmd->add_subcommand("regions", "token-length signatures and JS");
    add_eval_common(regions_cmd, region_opts);
    regions_cmd->add_option("--fasta", region_fasta)->required();
    regions_cmd->add_option("--bed", region_bed, "region annotations")->required();
    regions_cmd->add_option("--log-base", log_base);

    EvalCommon phylop_opts;
    std::string ph_fasta, ph_track;
    int ph_bin_size = 100;
    double ph_z = 1.645;
    auto* phylop_cmd = eval_cmd->add_subcommand("phylop", "per-token conservation stats");
    add_eval_common(phylop_cmd, phylop_opts);
    phylop_cmd->add_option("--fasta", ph_fasta)->required();
    phylop_cmd->add_option("--phylop", ph_track)->required();
    phylop_cmd->add_option("--bin-size", ph_bin_size);
    phylop_cmd->add_option("--z", ph_z);

    EvalCommon enr_opts;
    std::string enr_fasta, enr_track, enr_bed;
    int enr_bin_size = 100;
    double enr_z = 1.645, alpha = 0.5;
    auto* enrich_cmd = eval_cmd->add_subcommand("enrichment", "region x conservation enrichment");
    add_eval_common(enrich_cmd, enr_opts);
    enrich_cmd->add_option("--fasta", enr_fasta)->required();
    enrich_cmd->add_option("--phylop", enr_track)->required();
    enrich_cmd->add_option("--bed", enr_bed)->required();
    enrich_cmd->add_option("--bin-size", enr_bin_size);
    enrich_cmd->add_option("--z", enr_z);
    enrich_cmd->add_option("--alpha", alpha, "smoothing pseudo-count");

    // ---- pipeline ----
    std::string config_path;
    std::size_t pipeline_threads = 0;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "end-to-end run from a config file");
    pipeline_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    pipeline_cmd->add_option("--threads", pipeline_threads, "override config threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (stratify_cmd->parsed())
            return run_stratify(fasta, phylop, bin_size, z, out_dir, threads);

        if (train_cmd->parsed()) {
            auto sequences = load_fasta(pool_path);
            auto vocab = train_bpe(sequences, label, BpeTrainConfig{vocab_size, min_pair_freq, threads});
            save_bpe_vocabulary(vocab, train_out);
            std::cout << "trained " << vocab.tokens.size() << " tokens (" << vocab.merges.size()
                      << " merges) -> " << train_out << "\n";
            return 0;
        }

        if (merge_cmd->parsed()) {
            auto v_con = load_bpe_vocabulary(con_path);
            auto v_neu = load_bpe_vocabulary(neu_path);
            auto v_acc = load_bpe_vocabulary(acc_path);
            auto report = no_priority ? merge_no_priority(v_con, v_neu, v_acc, target)
                                      : merge_vocabularies(v_con, v_neu, v_acc, target);
            write_text_file(merge_out, serialize_merged_vocabulary(report));
            write_text_file(merge_out + ".report.json", serialize_merge_report(report));
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "merged " << report.size() << " tokens (tiers " << report.tier_counts[0]
                      << "/" << report.tier_counts[1] << "/" << report.tier_counts[2] << "/"
                      << report.tier_counts[3] << ") -> " << merge_out << "\n";
            return 0;
        }

        if (encode_cmd->parsed()) {
            auto vocab = load_tokenizer_file(enc_tokenizer);
            auto records = load_fasta(enc_fasta);
            write_text_file(enc_out, encode_tsv(vocab, records, threads));
            std::cout << "encoded " << records.size() << " sequences -> " << enc_out << "\n";
            return 0;
        }

        if (motifs_cmd->parsed()) {
            auto vocab = load_tokenizer_file(motif_opts.tokenizer);
            ConsensusParams params;
            params.wildcard_threshold = wildcard_threshold;
            params.max_variants = max_variants;
            auto motifs = motifs_from_pwms(load_meme(meme_path), params);
            if (motifs.empty()) throw std::runtime_error("no usable motifs after consensus");
            auto metrics = motif_metrics(vocab, motifs);
            write_outputs(motif_opts.out_prefix, ".tsv", render_motif_metrics_tsv(metrics));
            nlohmann::json j = {{"avg_tokens_per_motif", metrics.avg_tokens_per_motif},
                                {"perfect_match_pct", metrics.perfect_match_rate},
                                {"exact_vocab_pct", metrics.exact_vocab_rate},
                                {"avg_token_fraction", metrics.avg_token_fraction},
                                {"consistency", metrics.consistency},
                                {"motif_count", metrics.motif_count}};
            write_outputs(motif_opts.out_prefix, ".json", j.dump(2) + "\n");
            return 0;
        }

        if (regions_cmd->parsed()) {
            auto vocab = load_tokenizer_file(region_opts.tokenizer);
            auto genome = load_fasta(region_fasta);
            auto regions = load_bed_regions(region_bed);
            auto per_region = region_sequences(genome, regions);
            RegionSignatures signatures;
            for (std::size_t r = 0; r < kRegionKindCount; ++r) {
                if (per_region[r].empty()) continue;
                try {
                    signatures[r] = length_signature(vocab, per_region[r], region_opts.threads);
                } catch (const std::invalid_argument&) {
                    std::cerr << "warning: region " << region_kind_name(static_cast<RegionKind>(r))
                              << " yielded no tokens; skipped\n";
                }
            }
            write_outputs(region_opts.out_prefix, "_lengths.tsv",
                          render_length_signatures_tsv(signatures));
            write_outputs(region_opts.out_prefix, "_js.tsv", render_js_tsv(signatures, log_base));
            nlohmann::json j;
            for (std::size_t a = 0; a < kRegionKindCount; ++a)
                for (std::size_t b = a + 1; b < kRegionKindCount; ++b)
                    if (signatures[a] && signatures[b]) {
                        double div = js_divergence(*signatures[a], *signatures[b], log_base);
                        j[std::string(region_kind_name(static_cast<RegionKind>(a))) + "-" +
                          region_kind_name(static_cast<RegionKind>(b))] = {
                            {"divergence", div}, {"distance", std::sqrt(div)}};
                    }
            write_outputs(region_opts.out_prefix, ".json", j.dump(2) + "\n");
            return 0;
        }

        if (phylop_cmd->parsed()) {
            auto vocab = load_tokenizer_file(phylop_opts.tokenizer);
            auto genome = load_fasta(ph_fasta);
            auto track = load_bedgraph(ph_track);
            auto binned = bin_track(genome, track, ph_bin_size, phylop_opts.threads);
            auto strat = classify_bins(binned, StratificationParams{ph_z, ph_bin_size});
            auto stats = phylop_token_stats(vocab, genome, track, binned, strat,
                                            phylop_opts.threads);
            write_outputs(phylop_opts.out_prefix, ".tsv", render_phylop_tsv(stats));
            nlohmann::json j = nlohmann::json::object();
            for (std::size_t c = 0; c < kCategoryCount; ++c)
                if (stats[c])
                    j[category_name(static_cast<Category>(c))] = {
                        {"mean_phylop", stats[c]->mean_phylop},
                        {"pct_positive", stats[c]->pct_positive},
                        {"mean_intra_variance", stats[c]->mean_intra_variance},
                        {"distinct_tokens", stats[c]->distinct_tokens}};
            write_outputs(phylop_opts.out_prefix, ".json", j.dump(2) + "\n");
            return 0;
        }

        if (enrich_cmd->parsed()) {
            auto vocab = load_tokenizer_file(enr_opts.tokenizer);
            auto genome = load_fasta(enr_fasta);
            auto track = load_bedgraph(enr_track);
            auto regions = load_bed_regions(enr_bed);
            auto binned = bin_track(genome, track, enr_bin_size, enr_opts.threads);
            auto strat = classify_bins(binned, StratificationParams{enr_z, enr_bin_size});
            auto bins = partition_regions(genome, regions, binned, strat);
            auto table = enrichment(vocab, bins, alpha, enr_opts.threads);
            write_outputs(enr_opts.out_prefix, "_bins.tsv", render_enrichment_tsv(table));
            write_outputs(enr_opts.out_prefix, "_separation.tsv", render_separation_tsv(table));
            nlohmann::json j = nlohmann::json::object();
            for (std::size_t r = 0; r < kRegionKindCount; ++r)
                for (std::size_t c = 0; c < kCategoryCount; ++c)
                    if (table.bins[r][c].present)
                        j[std::string(region_kind_name(static_cast<RegionKind>(r))) + "x" +
                          category_name(static_cast<Category>(c))] =
                            table.bins[r][c].mean_log2fc;
            write_outputs(enr_opts.out_prefix, ".json", j.dump(2) + "\n");
            return 0;
        }

        if (pipeline_cmd->parsed()) {
            auto config = load_pipeline_config(config_path);
            if (pipeline_threads) config.threads = pipeline_threads;
            auto result = run_pipeline(config);
            std::cout << "pipeline " << pipeline_variant_name(config.variant) << " complete\n"
                      << "  tokenizer: " << result.tokenizer_path << "\n"
                      << "  manifest:  " << result.manifest_path << " (config " << result.config_hash
                      << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
