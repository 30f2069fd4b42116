#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evolen/analysis.hpp"
#include "evolen/bpe_trainer.hpp"
#include "evolen/encoder.hpp"
#include "evolen/vocab_merge.hpp"

namespace evolen {

enum class PipelineVariant { full, no_partition, no_priority, no_length };

const char* pipeline_variant_name(PipelineVariant v);
std::optional<PipelineVariant> pipeline_variant_from_name(std::string_view name);

// One reproducible end-to-end run. Every method constant defaults to its
// published value; the pipeline itself is seed-free and deterministic.
struct PipelineConfig {
    std::string fasta;
    std::string phylop;  // optional for no_partition
    std::string regions; // optional; enables region/enrichment evaluation
    std::string motifs;  // optional; enables motif evaluation
    std::string out_dir;

    int bin_size = 100;
    double z = 1.645;
    std::size_t vocab_size = 5120;
    int length_exponent = 2;
    PipelineVariant variant = PipelineVariant::full;
    double alpha = 0.5;
    std::uint64_t min_pair_frequency = 2;
    double wildcard_threshold = 0.25;
    std::size_t max_variants = 256;
    double log_base = 2.0;
    std::size_t threads = 1;

    // p = 1 for the no_length variant, length_exponent otherwise.
    int effective_exponent() const;
    void validate() const;
};

PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineResult {
    std::string manifest_path;
    std::string tokenizer_path;
    std::string config_hash;
    std::vector<std::string> artifacts; // paths, in manifest order
};

// Runs the configured variant and writes every artifact plus manifest.json
// (artifact list with content hashes) into out_dir. Outputs in a directory
// without a manifest are stale: the manifest is written last, and any
// previous manifest is removed before the first stage runs. Stage failures
// rethrow with the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace evolen
