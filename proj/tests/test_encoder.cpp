#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include <json.hpp>

#include "evolen/encoder.hpp"
#include "support/oracles.hpp"

using namespace evolen;

namespace {

ScoredVocabulary vocab_of(const std::vector<std::string>& extra, int exponent) {
    std::vector<std::string> tokens{"A", "C", "G", "T"};
    for (const auto& t : extra)
        if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
    return ScoredVocabulary::from_tokens(tokens, exponent);
}

std::map<std::string, std::uint64_t> score_map(const ScoredVocabulary& vocab) {
    std::map<std::string, std::uint64_t> m;
    for (const auto& e : vocab.entries()) m[e.token] = e.score;
    return m;
}

std::string concat_spans(const std::vector<TokenSpan>& spans) {
    std::string s;
    for (const auto& sp : spans) s += sp.token;
    return s;
}

} // namespace

TEST_CASE("scores are |t|^p") {
    auto v2 = vocab_of({"ACGTAC"}, 2);
    CHECK(v2.entries()[v2.find("ACGTAC").value()].score == 36);
    CHECK(v2.entries()[v2.find("A").value()].score == 1);
    auto v1 = vocab_of({"ACGTAC"}, 1);
    CHECK(v1.entries()[v1.find("ACGTAC").value()].score == 6);
    CHECK(v1.entries()[v1.find("A").value()].score == 1);
    CHECK_THROWS_AS(vocab_of({}, 3), std::invalid_argument);
}

TEST_CASE("vocabulary construction enforces invariants") {
    CHECK_THROWS_AS(ScoredVocabulary::from_tokens({"A", "C", "G"}, 2), std::invalid_argument);
    CHECK_THROWS_AS(ScoredVocabulary::from_tokens({"A", "C", "G", "T", "AC", "AC"}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScoredVocabulary::from_tokens({"A", "C", "G", "T", "AN"}, 2),
                    std::invalid_argument);
}

TEST_CASE("for_each_prefix reports every matching token") {
    auto vocab = vocab_of({"TA", "TAAT", "TAATTAA"}, 2);
    std::vector<std::string> hits;
    vocab.for_each_prefix("TAATTAA", 0,
                          [&](std::size_t entry, std::size_t len) {
                              CHECK(vocab.entries()[entry].token.size() == len);
                              hits.push_back(vocab.entries()[entry].token);
                          });
    CHECK(hits == std::vector<std::string>{"T", "TA", "TAAT", "TAATTAA"});
}

TEST_CASE("encode_dp: intact motif beats every split") {
    auto vocab = vocab_of({"TAAT", "TAATTAA"}, 2);
    auto spans = encode_dp(vocab, "TAATTAA");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == TokenSpan{"TAATTAA", 0, 7});
    CHECK(total_score(vocab, spans) == 49);
    auto oracle = oracles::exhaustive_best(score_map(vocab), "TAATTAA");
    REQUIRE(oracle.has_value());
    CHECK(oracle->first == 49);
}

TEST_CASE("encode_dp: empty input") {
    auto vocab = vocab_of({}, 2);
    CHECK(encode_dp(vocab, "").empty());
}

TEST_CASE("encode_dp: ATAT tie-break prefers the longer final token recursively") {
    for (int p : {1, 2}) {
        auto vocab = vocab_of({"AT"}, p);
        auto spans = encode_dp(vocab, "ATAT");
        REQUIRE(spans.size() == 2);
        CHECK(spans[0].token == "AT");
        CHECK(spans[1].token == "AT");
        CHECK(total_score(vocab, spans) == (p == 2 ? 8 : 4));
    }
}

TEST_CASE("encode_dp: N characters are single-character boundary spans") {
    auto vocab = vocab_of({}, 2);
    auto spans = encode_dp(vocab, "ACNGT");
    REQUIRE(spans.size() == 5);
    CHECK(spans[2] == TokenSpan{"N", 2, 3});
    CHECK(concat_spans(spans) == "ACNGT");

    auto nn = encode_dp(vocab, "NN");
    REQUIRE(nn.size() == 2);
    CHECK(nn[0] == TokenSpan{"N", 0, 1});
    CHECK(nn[1] == TokenSpan{"N", 1, 2});
}

TEST_CASE("encode_dp: illegal characters rejected") {
    auto vocab = vocab_of({}, 2);
    CHECK_THROWS_AS(encode_dp(vocab, "ACXT"), std::invalid_argument);
}

TEST_CASE("encode_dp: optimal on random vocabularies (exhaustive oracle)") {
    std::mt19937 rng(51);
    std::uniform_int_distribution<std::size_t> seq_len(0, 14);
    std::uniform_int_distribution<std::size_t> extra(0, 36);
    for (int trial = 0; trial < 300; ++trial) {
        int p = (trial % 2) ? 1 : 2;
        auto tokens = oracles::random_token_set(rng, extra(rng));
        auto vocab = ScoredVocabulary::from_tokens(tokens, p);
        std::string seq = oracles::random_acgt(rng, seq_len(rng));

        auto spans = encode_dp(vocab, seq);
        CHECK(concat_spans(spans) == seq);
        for (const auto& s : spans) CHECK(vocab.contains(s.token));

        auto oracle = oracles::exhaustive_best(score_map(vocab), seq);
        REQUIRE(oracle.has_value());
        CHECK(total_score(vocab, spans) == oracle->first);
        if (!seq.empty()) CHECK(spans.back().token.size() == oracle->second);
    }
}

TEST_CASE("encode_dp: spans are contiguous and deterministic") {
    std::mt19937 rng(52);
    auto vocab = ScoredVocabulary::from_tokens(oracles::random_token_set(rng, 30), 2);
    std::string seq = oracles::random_acgt(rng, 500);
    seq[100] = 'N';
    seq[101] = 'N';
    auto a = encode_dp(vocab, seq);
    auto b = encode_dp(vocab, seq);
    CHECK(a == b);
    std::size_t pos = 0;
    for (const auto& s : a) {
        CHECK(s.start == pos);
        CHECK(s.end - s.start == s.token.size());
        pos = s.end;
    }
    CHECK(pos == seq.size());
}

TEST_CASE("encode_records: thread-count invariance") {
    std::mt19937 rng(53);
    auto vocab = ScoredVocabulary::from_tokens(oracles::random_token_set(rng, 40), 2);
    std::vector<SequenceRecord> records;
    for (int i = 0; i < 50; ++i) {
        SequenceRecord r;
        r.id = "r" + std::to_string(i);
        r.bases = oracles::random_acgt(rng, 200);
        records.push_back(std::move(r));
    }
    CHECK(encode_records(vocab, records, 1) == encode_records(vocab, records, 4));
}

TEST_CASE("tokenizer serialization roundtrips") {
    std::mt19937 rng(54);
    for (int p : {1, 2}) {
        auto vocab = ScoredVocabulary::from_tokens(oracles::random_token_set(rng, 25), p);
        auto loaded = load_tokenizer(serialize_tokenizer(vocab));
        CHECK(loaded.entries() == vocab.entries());
        CHECK(loaded.length_exponent() == vocab.length_exponent());
        CHECK(loaded.max_token_len() == vocab.max_token_len());
    }
}

TEST_CASE("tokenizer load rejects tampered files") {
    auto vocab = vocab_of({"ACG"}, 2);
    std::string good = serialize_tokenizer(vocab);

    SUBCASE("version mismatch") {
        std::string bad = good;
        bad.replace(bad.find("\"version\": 1"), 12, "\"version\": 9");
        CHECK_THROWS_WITH_AS(load_tokenizer(bad), doctest::Contains("version"),
                             std::runtime_error);
    }
    SUBCASE("wrong score for a token") {
        std::string bad = good;
        bad.replace(bad.find("\"score\": 9"), 10, "\"score\": 8");
        CHECK_THROWS_WITH_AS(load_tokenizer(bad), doctest::Contains("score"), std::runtime_error);
    }
    SUBCASE("checksum failure") {
        std::string bad = good;
        auto pos = bad.find("\"checksum\": \"");
        bad[pos + 13] = bad[pos + 13] == '0' ? '1' : '0';
        CHECK_THROWS_WITH_AS(load_tokenizer(bad), doctest::Contains("checksum"),
                             std::runtime_error);
    }
    SUBCASE("duplicate token") {
        nlohmann::json j = nlohmann::json::parse(good);
        j["tokens"].push_back({{"token", "A"}, {"score", 1}});
        CHECK_THROWS_WITH_AS(load_tokenizer(j.dump()), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
    SUBCASE("missing base token") {
        nlohmann::json j = nlohmann::json::parse(good);
        j["tokens"].erase(0);
        CHECK_THROWS_AS(load_tokenizer(j.dump()), std::runtime_error);
    }
}
