#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evolen/genome_io.hpp"
#include "support/oracles.hpp"

using namespace evolen;

TEST_CASE("fasta: case normalization, single record") {
    auto records = parse_fasta_text(">s1\nacgt\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].id == "s1");
    CHECK(records[0].bases == "ACGT");
    CHECK(records[0].source_contig == "s1");
    CHECK(records[0].source_offset == 0);
}

TEST_CASE("fasta: N passes through") {
    auto records = parse_fasta_text(">s1\nACGT\n>s2\nNNGT\n");
    REQUIRE(records.size() == 2);
    CHECK(records[1].bases == "NNGT");
}

TEST_CASE("fasta: alphabet rejection reports the line") {
    try {
        parse_fasta_text(">s1\nACXT\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find('X') != std::string::npos);
    }
}

TEST_CASE("fasta: empty input and duplicate ids rejected") {
    CHECK_THROWS_AS(parse_fasta_text(""), ParseError);
    CHECK_THROWS_AS(parse_fasta_text(">a\nAC\n>a\nGT\n"), ParseError);
}

TEST_CASE("fasta: multi-line records concatenate, wrapping is cosmetic") {
    auto records = parse_fasta_text(">s1 description text\nACGT\nacgt\nNN\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].id == "s1");
    CHECK(records[0].bases == "ACGTACGTNN");
}

TEST_CASE("fasta: parse of concatenation equals concatenation of parses") {
    std::string a = ">x\nACGTN\n";
    std::string b = ">y\nGGCC\n>z\nTTTT\n";
    auto pa = parse_fasta_text(a);
    auto pb = parse_fasta_text(b);
    auto both = parse_fasta_text(a + b);
    pa.insert(pa.end(), pb.begin(), pb.end());
    CHECK(both == pa);
}

TEST_CASE("fasta: serialize-parse roundtrip identity") {
    std::mt19937 rng(7);
    std::vector<SequenceRecord> records;
    for (int i = 0; i < 20; ++i) {
        SequenceRecord r;
        r.id = "seq" + std::to_string(i);
        r.bases = oracles::random_acgt(rng, 1 + static_cast<std::size_t>(rng() % 200));
        if (i % 3 == 0) r.bases[r.bases.size() / 2] = 'N';
        r.source_contig = r.id;
        records.push_back(std::move(r));
    }
    CHECK(parse_fasta_text(serialize_fasta(records)) == records);
}

TEST_CASE("bedgraph: single interval") {
    auto track = parse_bedgraph_text("chr1\t0\t100\t0.5\n");
    REQUIRE(track.has_contig("chr1"));
    CHECK(track.intervals("chr1")->size() == 1);
    CHECK(track.score_at("chr1", 0) == 0.5);
    CHECK(track.score_at("chr1", 99) == 0.5);
}

TEST_CASE("bedgraph: overlap error names both lines") {
    try {
        parse_bedgraph_text("chr1\t0\t10\t1.0\nchr1\t5\t15\t2.0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
        CHECK(msg.find("overlap") != std::string::npos);
    }
}

TEST_CASE("bedgraph: uncovered positions score 0.0") {
    auto track = parse_bedgraph_text("chr1\t10\t20\t1.5\n");
    CHECK(track.score_at("chr1", 5) == 0.0);
    CHECK(track.score_at("chr1", 25) == 0.0);
    CHECK(track.score_at("chr2", 15) == 0.0);
    CHECK(track.score_at("chr1", 15) == 1.5);
}

TEST_CASE("bedgraph: malformed rows rejected") {
    CHECK_THROWS_AS(parse_bedgraph_text("chr1\t0\t10\tabc\n"), ParseError);
    CHECK_THROWS_AS(parse_bedgraph_text("chr1\t10\t10\t1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_bedgraph_text("chr1\t20\t10\t1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_bedgraph_text("chr1\t0\t10\n"), ParseError);
}

TEST_CASE("bedgraph: roundtrip identity") {
    auto track = parse_bedgraph_text(
        "chr1\t0\t100\t0.5\nchr1\t100\t250\t-1.25\nchr2\t40\t90\t3.125\n");
    CHECK(parse_bedgraph_text(serialize_bedgraph(track)) == track);
}

TEST_CASE("bedgraph: sum_over and fill_scores agree with point queries") {
    auto track = parse_bedgraph_text("chr1\t0\t50\t2.0\nchr1\t80\t120\t-1.0\n");
    double manual = 0.0;
    for (std::int64_t p = 30; p < 100; ++p) manual += track.score_at("chr1", p);
    CHECK(track.sum_over("chr1", 30, 100) == doctest::Approx(manual).epsilon(1e-12));
    std::vector<double> scores;
    track.fill_scores("chr1", 30, 100, scores);
    REQUIRE(scores.size() == 70);
    for (std::int64_t p = 30; p < 100; ++p)
        CHECK(scores[static_cast<std::size_t>(p - 30)] == track.score_at("chr1", p));
}

TEST_CASE("bed: valid promoter annotation") {
    auto regions = parse_bed_regions_text("chr1\t100\t200\tpromoter\n");
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].kind == RegionKind::promoter);
    CHECK(regions[0].start == 100);
    CHECK(regions[0].end == 200);
}

TEST_CASE("bed: kind is case-insensitive, extra columns ignored") {
    auto regions = parse_bed_regions_text("chr1\t0\t10\tEnhancer\t961\t+\n");
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].kind == RegionKind::enhancer);
}

TEST_CASE("bed: unknown kind and inverted coordinates rejected") {
    CHECK_THROWS_AS(parse_bed_regions_text("chr1\t100\t200\tsilencer\n"), ParseError);
    CHECK_THROWS_AS(parse_bed_regions_text("chr1\t200\t100\texon\n"), ParseError);
}

TEST_CASE("bed: roundtrip identity") {
    auto regions = parse_bed_regions_text(
        "chr1\t100\t200\tpromoter\nchr1\t300\t900\tintron\nchr2\t0\t50\texon\n");
    CHECK(parse_bed_regions_text(serialize_bed_regions(regions)) == regions);
}

TEST_CASE("meme: exact width-2 motif") {
    auto motifs = parse_meme_text("MOTIF m1\nletter-probability matrix: alength= 4 w= 2\n"
                                  "1 0 0 0\n0 0 0 1\n");
    REQUIRE(motifs.size() == 1);
    CHECK(motifs[0].name == "m1");
    REQUIRE(motifs[0].width() == 2);
    CHECK(motifs[0].matrix[0] == std::array<double, 4>{1, 0, 0, 0});
    CHECK(motifs[0].matrix[1] == std::array<double, 4>{0, 0, 0, 1});
}

TEST_CASE("meme: row summing to 1 used as-is") {
    auto motifs = parse_meme_text("MOTIF m\nletter-probability matrix: w= 1\n0.9 0.03 0.04 0.03\n");
    REQUIRE(motifs.size() == 1);
    CHECK(motifs[0].matrix[0][0] == 0.9);
}

TEST_CASE("meme: row sum far from 1 rejected, mild deviation renormalized") {
    CHECK_THROWS_AS(
        parse_meme_text("MOTIF m\nletter-probability matrix: w= 1\n0.5 0.5 0.5 0.5\n"),
        ParseError);
    auto motifs =
        parse_meme_text("MOTIF m\nletter-probability matrix: w= 1\n0.2505 0.25 0.25 0.25\n");
    double sum = 0.0;
    for (double p : motifs[0].matrix[0]) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("meme: row count below declared width rejected") {
    CHECK_THROWS_AS(parse_meme_text("MOTIF m\nletter-probability matrix: w= 3\n1 0 0 0\n0 1 0 0\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_meme_text("MOTIF a\nletter-probability matrix: w= 2\n1 0 0 0\n"
                                    "MOTIF b\nletter-probability matrix: w= 1\n1 0 0 0\n"),
                    ParseError);
    CHECK_THROWS_AS(
        parse_meme_text("MOTIF m\nletter-probability matrix: w= 1\n1.2 -0.2 0 0\n"),
        ParseError);
}

TEST_CASE("meme: header material skipped, multiple motifs, roundtrip") {
    std::string text = "MEME version 4\n\nALPHABET= ACGT\nstrands: + -\n\n"
                       "Background letter frequencies\nA 0.25 C 0.25 G 0.25 T 0.25\n\n"
                       "MOTIF MA0001.1\nletter-probability matrix: alength= 4 w= 2 nsites= 20 E= 0\n"
                       " 0.25 0.25 0.25 0.25\n 1.0 0.0 0.0 0.0\n"
                       "MOTIF MA0002.1\nletter-probability matrix: w= 1\n0 0 1 0\n";
    auto motifs = parse_meme_text(text);
    REQUIRE(motifs.size() == 2);
    CHECK(motifs[0].name == "MA0001.1");
    CHECK(motifs[1].name == "MA0002.1");
    CHECK(parse_meme_text(serialize_meme(motifs)) == motifs);
}
