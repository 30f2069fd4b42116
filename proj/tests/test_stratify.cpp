#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evolen/stratify.hpp"
#include "support/oracles.hpp"

using namespace evolen;

namespace {

SequenceRecord make_record(std::string id, std::string bases) {
    SequenceRecord r;
    r.id = id;
    r.bases = std::move(bases);
    r.source_contig = std::move(id);
    r.source_offset = 0;
    return r;
}

// One contig whose track is constant per 100 bp bin.
struct SyntheticContig {
    std::vector<SequenceRecord> genome;
    ConservationTrack track;
};

SyntheticContig contig_with_bin_scores(const std::vector<double>& bin_scores, int bin_size = 100) {
    std::mt19937 rng(1234);
    SyntheticContig s;
    s.genome.push_back(make_record(
        "chr1", oracles::random_acgt(rng, bin_scores.size() * static_cast<std::size_t>(bin_size))));
    std::vector<ScoredInterval> ivals;
    for (std::size_t b = 0; b < bin_scores.size(); ++b)
        ivals.push_back({static_cast<std::int64_t>(b) * bin_size,
                         static_cast<std::int64_t>(b + 1) * bin_size, bin_scores[b]});
    s.track = ConservationTrack({{"chr1", ivals}});
    return s;
}

std::vector<double> flatten(const BinnedTrack& binned) {
    std::vector<double> xs;
    for (const auto& e : binned.entries) xs.insert(xs.end(), e.means.begin(), e.means.end());
    return xs;
}

} // namespace

TEST_CASE("bin_track: constant 0.5 over 250 bases drops the partial bin") {
    std::mt19937 rng(5);
    std::vector<SequenceRecord> genome{make_record("chr1", oracles::random_acgt(rng, 250))};
    auto track = parse_bedgraph_text("chr1\t0\t250\t0.5\n");
    auto binned = bin_track(genome, track, 100);
    REQUIRE(binned.entries.size() == 1);
    CHECK(binned.entries[0].means == std::vector<double>{0.5, 0.5});
}

TEST_CASE("bin_track: half-covered bin averages with zeros") {
    std::mt19937 rng(6);
    std::vector<SequenceRecord> genome{make_record("chr1", oracles::random_acgt(rng, 100))};
    auto track = parse_bedgraph_text("chr1\t0\t50\t2.0\n");
    auto binned = bin_track(genome, track, 100);
    REQUIRE(binned.entries.size() == 1);
    REQUIRE(binned.entries[0].means.size() == 1);
    CHECK(binned.entries[0].means[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bin_track: empty genome gives empty binned track") {
    auto track = parse_bedgraph_text("chr1\t0\t100\t1.0\n");
    auto binned = bin_track({}, track, 100);
    CHECK(binned.entries.empty());
    CHECK(binned.total_bins() == 0);
}

TEST_CASE("bin_track: missing contig warns and treats bases as uncovered") {
    std::mt19937 rng(7);
    std::vector<SequenceRecord> genome{make_record("chrX", oracles::random_acgt(rng, 200))};
    auto track = parse_bedgraph_text("chr1\t0\t100\t9.0\n");
    auto binned = bin_track(genome, track, 100);
    REQUIRE(binned.entries.size() == 1);
    CHECK(binned.entries[0].means == std::vector<double>{0.0, 0.0});
    REQUIRE(binned.warnings.size() == 1);
    CHECK(binned.warnings[0].find("chrX") != std::string::npos);
}

TEST_CASE("classify_bins: all equal bins degenerate to neutral") {
    auto s = contig_with_bin_scores({1.0, 1.0, 1.0, 1.0});
    auto binned = bin_track(s.genome, s.track, 100);
    auto strat = classify_bins(binned, {});
    CHECK(strat.sigma == 0.0);
    for (Category c : strat.assignments[0]) CHECK(c == Category::neutral);
}

TEST_CASE("classify_bins: ten zeros plus +5/-5 under the default z") {
    std::vector<double> scores(10, 0.0);
    scores.push_back(5.0);
    scores.push_back(-5.0);
    auto s = contig_with_bin_scores(scores);
    auto binned = bin_track(s.genome, s.track, 100);
    StratificationParams params;
    CHECK(params.z == 1.645); // documented default
    auto strat = classify_bins(binned, params);
    CHECK(strat.mu == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(strat.sigma == doctest::Approx(2.041241452319315).epsilon(1e-12));
    const auto& cats = strat.assignments[0];
    for (std::size_t b = 0; b < 10; ++b) CHECK(cats[b] == Category::neutral);
    CHECK(cats[10] == Category::conserved);
    CHECK(cats[11] == Category::accelerated);
}

TEST_CASE("classify_bins: strict inequality keeps the exact threshold neutral") {
    // Bins {0,0,2,2} give mu=1, sigma=1; with z=1 the thresholds are 0 and 2,
    // and every bin sits exactly on one of them.
    auto s = contig_with_bin_scores({0.0, 0.0, 2.0, 2.0});
    auto binned = bin_track(s.genome, s.track, 100);
    auto strat = classify_bins(binned, {1.0, 100});
    CHECK(strat.mu == 1.0);
    CHECK(strat.sigma == 1.0);
    for (Category c : strat.assignments[0]) CHECK(c == Category::neutral);
}

TEST_CASE("classify_bins: matches the direct oracle on random tracks") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> score(-10, 10);
    std::uniform_int_distribution<std::size_t> bins(2, 40);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(bins(rng));
        for (auto& x : scores) x = static_cast<double>(score(rng));
        auto s = contig_with_bin_scores(scores);
        auto binned = bin_track(s.genome, s.track, 100);
        auto strat = classify_bins(binned, {});

        auto ms = oracles::mean_population_std(flatten(binned));
        CHECK(strat.mu == doctest::Approx(ms.mu).epsilon(1e-12));
        CHECK(strat.sigma == doctest::Approx(ms.sigma).epsilon(1e-12));
        const auto& cats = strat.assignments[0];
        for (std::size_t b = 0; b < scores.size(); ++b) {
            Category expected = Category::neutral;
            if (ms.sigma > 0.0 && binned.entries[0].means[b] > ms.mu + 1.645 * ms.sigma)
                expected = Category::conserved;
            else if (ms.sigma > 0.0 && binned.entries[0].means[b] < ms.mu - 1.645 * ms.sigma)
                expected = Category::accelerated;
            CHECK(cats[b] == expected);
        }
    }
}

TEST_CASE("classify_bins: partition and z-monotonicity properties") {
    std::mt19937 rng(43);
    std::uniform_int_distribution<int> score(-8, 8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores(30);
        for (auto& x : scores) x = static_cast<double>(score(rng));
        auto s = contig_with_bin_scores(scores);
        auto binned = bin_track(s.genome, s.track, 100);

        auto a1 = classify_bins(binned, {1.0, 100});
        auto a2 = classify_bins(binned, {1.7, 100});
        std::size_t total = 0;
        auto counts = a1.category_counts();
        for (auto c : counts) total += c;
        CHECK(total == binned.total_bins());
        // raising z never un-neutralizes a bin
        for (std::size_t b = 0; b < scores.size(); ++b) {
            if (a1.assignments[0][b] == Category::neutral)
                CHECK(a2.assignments[0][b] == Category::neutral);
        }
    }
}

TEST_CASE("classify_bins: affine score transforms leave assignments unchanged") {
    std::mt19937 rng(44);
    std::uniform_int_distribution<int> score(-10, 10);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores(25);
        for (auto& x : scores) x = static_cast<double>(score(rng));
        std::vector<double> transformed(scores.size());
        double a = 2.0, b = 3.0;
        for (std::size_t i = 0; i < scores.size(); ++i) transformed[i] = a * scores[i] + b;

        auto s1 = contig_with_bin_scores(scores);
        auto s2 = contig_with_bin_scores(transformed);
        auto strat1 = classify_bins(bin_track(s1.genome, s1.track, 100), {});
        auto strat2 = classify_bins(bin_track(s2.genome, s2.track, 100), {});
        CHECK(strat1.assignments == strat2.assignments);
    }
}

TEST_CASE("extract_pools: single conserved bin lands alone in its pool") {
    auto s = contig_with_bin_scores({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5, -5});
    auto binned = bin_track(s.genome, s.track, 100);
    auto strat = classify_bins(binned, {});
    auto pools = extract_pools(s.genome, binned, strat);
    CHECK(pools[0].sequences.size() == 1);
    CHECK(pools[0].category == Category::conserved);
    CHECK(pools[0].sequences[0].bases == s.genome[0].bases.substr(1000, 100));
    CHECK(pools[0].sequences[0].source_offset == 1000);
    CHECK(pools[2].sequences.size() == 1);
    CHECK(pools[1].sequences.size() == 10);
}

TEST_CASE("extract_pools: all-N bins join no pool, sizes add up") {
    std::mt19937 rng(9);
    std::string bases = oracles::random_acgt(rng, 300);
    for (std::size_t i = 100; i < 200; ++i) bases[i] = 'N';
    std::vector<SequenceRecord> genome{make_record("chr1", bases)};
    auto track = parse_bedgraph_text("chr1\t0\t300\t0.25\n");
    auto binned = bin_track(genome, track, 100);
    auto strat = classify_bins(binned, {});
    auto pools = extract_pools(genome, binned, strat);
    std::size_t pool_total =
        pools[0].sequences.size() + pools[1].sequences.size() + pools[2].sequences.size();
    CHECK(pool_total == 2); // 3 bins, one all-N
    for (const auto& pool : pools)
        for (const auto& rec : pool.sequences) CHECK(rec.bases.size() == 100);
}

TEST_CASE("chop_bins: full bins only, all-N dropped") {
    std::mt19937 rng(10);
    std::string bases = oracles::random_acgt(rng, 250);
    for (std::size_t i = 0; i < 100; ++i) bases[i] = 'N';
    auto bins = chop_bins({make_record("chr1", bases)}, 100);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].source_offset == 100);
    CHECK(bins[0].bases == bases.substr(100, 100));
}

TEST_CASE("bin_track results are identical across thread counts") {
    std::mt19937 rng(11);
    std::vector<SequenceRecord> genome;
    std::map<std::string, std::vector<ScoredInterval>> contigs;
    for (int c = 0; c < 5; ++c) {
        std::string name = "chr" + std::to_string(c);
        genome.push_back(make_record(name, oracles::random_acgt(rng, 1000)));
        std::vector<ScoredInterval> ivals;
        for (int b = 0; b < 10; ++b)
            ivals.push_back({b * 100, b * 100 + 60, static_cast<double>(static_cast<int>(rng() % 9)) - 4.0});
        contigs[name] = ivals;
    }
    ConservationTrack track(std::move(contigs));
    auto one = bin_track(genome, track, 100, 1);
    auto four = bin_track(genome, track, 100, 4);
    REQUIRE(one.entries.size() == four.entries.size());
    for (std::size_t i = 0; i < one.entries.size(); ++i)
        CHECK(one.entries[i].means == four.entries[i].means);
}
