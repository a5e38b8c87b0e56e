#include "rcse/baselines.hpp"
#include "rcse/evaluator.hpp"
#include "rcse/triples.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace rcse;

namespace {

StaticWordVectors vectors_from(const std::string& text) {
    std::istringstream in(text);
    return StaticWordVectors::load(in);
}

// cup and bowl share the kitchen; bed sits alone in the bedroom.
Corpus kitchen_corpus() {
    return ingest_text(
        "cup\tatLocation\tkitchen\tkitchen\tk0\n"
        "bowl\tatLocation\tkitchen\tkitchen\tk0\n"
        "bed\tatLocation\tbedroom\tbedroom\td0\n");
}

} // namespace

TEST_CASE("word vector file parsing", "[baselines]") {
    SECTION("well-formed file") {
        auto v = vectors_from("3 4\ncup 1 0 0 0\nbowl 0.9 0.1 0 0\nbed 0 0 1 0\n");
        CHECK(v.size() == 3);
        CHECK(v.dim() == 4);
        CHECK(v.has("cup"));
        CHECK_FALSE(v.has("plate"));
        CHECK(v.vector("bowl")[1] == 0.1);
        CHECK_THROWS_AS(v.vector("plate"), UnknownSymbolError);
    }
    SECTION("bad header") {
        CHECK_THROWS_AS(vectors_from("vectors here\ncup 1\n"), ParseError);
        CHECK_THROWS_AS(vectors_from(""), ParseError);
        CHECK_THROWS_AS(vectors_from("1 0\ncup\n"), ParseError);
    }
    SECTION("row width must match the header dimension") {
        CHECK_THROWS_AS(vectors_from("1 3\ncup 1 0\n"), ParseError);
        CHECK_THROWS_AS(vectors_from("1 3\ncup 1 0 0 0\n"), ParseError);
    }
    SECTION("declared count must match") {
        CHECK_THROWS_AS(vectors_from("2 2\ncup 1 0\n"), ParseError);
    }
    SECTION("zero vectors are unusable for cosine") {
        CHECK_THROWS_AS(vectors_from("1 2\ncup 0 0\n"), ParseError);
    }
    SECTION("duplicate tokens") {
        CHECK_THROWS_AS(vectors_from("2 2\ncup 1 0\ncup 0 1\n"), ParseError);
    }
}

TEST_CASE("frequency baseline scores by training count", "[baselines]") {
    std::ostringstream text;
    for (int i = 0; i < 5; ++i) text << "cup\tatLocation\tkitchen\tkitchen\tk0\n";
    for (int i = 0; i < 2; ++i) text << "cup\tatLocation\tbathroom\tbathroom\tb0\n";
    auto corpus = ingest_text(text.str());
    const auto& v = corpus.vocab;
    FrequencyScorer scorer(corpus.bag);

    QueryPattern q{Slot::tail, v.entity_id("cup"), v.relation_id("atLocation"), 0};
    std::vector<uint32_t> cands = {v.entity_id("kitchen"), v.entity_id("bathroom")};
    CHECK(scorer.score_candidates(q, cands) == std::vector<double>{5.0, 2.0});

    auto ranked = freq_complete(scorer, q, cands);
    CHECK(ranked[0].first == v.entity_id("kitchen"));
    CHECK(ranked[1].first == v.entity_id("bathroom"));

    // on its own training bag the ranking reproduces the count-derived truth
    auto gt = ground_truth_ranks(corpus.bag, q, cands);
    auto scores = scorer.score_candidates(q, cands);
    for (size_t i = 0; i < cands.size(); ++i)
        CHECK(competition_rank(cands, scores, cands[i]) == gt[i]);
}

TEST_CASE("cosine baseline against a hand-computed oracle", "[baselines]") {
    auto corpus = kitchen_corpus();
    const auto& v = corpus.vocab;
    // plate = cup + bowl direction, desk = anti-bowl direction
    auto wv = vectors_from(
        "5 2\n"
        "cup 1 0\n"
        "bowl 0 1\n"
        "bed 0.6 -0.8\n"
        "plate 1 1\n"
        "desk 1 -1\n");
    EntityId plate = corpus.vocab.intern_entity("plate");
    EntityId desk = corpus.vocab.intern_entity("desk");

    CosineScorer scorer(wv, corpus.bag, corpus.vocab);
    QueryPattern q{Slot::head, 0, v.relation_id("atLocation"), v.entity_id("kitchen")};

    SECTION("mean-of-group cosine") {
        // C = {cup, bowl}, mean = (0.5, 0.5)
        auto scores = scorer.score_candidates(q, {plate, desk, v.entity_id("bed")});
        CHECK(scores[0] == Catch::Approx(1.0));                  // cos((1,1),(.5,.5))
        CHECK(scores[1] == Catch::Approx(0.0).margin(1e-12));    // orthogonal
        // cos((0.6,-0.8), (0.5,0.5)) = -0.1 / (1.0 * sqrt(0.5))
        CHECK(scores[2] == Catch::Approx(-0.1 * std::sqrt(2.0)));
    }
    SECTION("comparison group is excluded from candidacy") {
        auto excluded = scorer.excluded_candidates(q);
        REQUIRE(excluded.size() == 2);
        CHECK(excluded[0] == v.entity_id("cup"));
        CHECK(excluded[1] == v.entity_id("bowl"));
    }
    SECTION("max aggregation takes the best single member") {
        CosineScorer best(wv, corpus.bag, corpus.vocab, MissingTokenPolicy::skip,
                          CosineAggregation::max);
        auto scores = best.score_candidates(q, {plate});
        CHECK(scores[0] == Catch::Approx(1.0 / std::sqrt(2.0)));
    }
    SECTION("empty comparison group falls back to zero scores") {
        QueryPattern lonely{Slot::head, 0, v.relation_id("atLocation"),
                            v.entity_id("cup")}; // nothing is located at a cup
        auto scores = scorer.score_candidates(lonely, {plate, desk});
        CHECK(scores == std::vector<double>{0.0, 0.0});
        CHECK(scorer.empty_group_queries() == 1);
    }
}

TEST_CASE("cosine baseline missing-token policies", "[baselines]") {
    auto corpus = kitchen_corpus();
    const auto& v = corpus.vocab;
    auto wv = vectors_from("2 2\ncup 1 0\nbowl 0 1\n"); // no vector for bed
    QueryPattern q{Slot::head, 0, v.relation_id("atLocation"), v.entity_id("kitchen")};

    SECTION("skip scores the candidate zero and counts the event") {
        CosineScorer scorer(wv, corpus.bag, corpus.vocab);
        auto scores = scorer.score_candidates(q, {v.entity_id("bed"), v.entity_id("cup")});
        CHECK(scores[0] == 0.0);
        CHECK(scores[1] == Catch::Approx(1.0 / std::sqrt(2.0)));
        CHECK(scorer.missing_tokens() == 1);
    }
    SECTION("skip drops missing group members from the mean") {
        // bedroom group = {bed}, bed has no vector -> effective group empty
        CosineScorer scorer(wv, corpus.bag, corpus.vocab);
        QueryPattern q2{Slot::head, 0, v.relation_id("atLocation"), v.entity_id("bedroom")};
        auto scores = scorer.score_candidates(q2, {v.entity_id("cup")});
        CHECK(scores == std::vector<double>{0.0});
        CHECK(scorer.missing_tokens() == 1);
        CHECK(scorer.empty_group_queries() == 1);
    }
    SECTION("error policy raises on the first missing token") {
        CosineScorer scorer(wv, corpus.bag, corpus.vocab, MissingTokenPolicy::error);
        QueryPattern q2{Slot::head, 0, v.relation_id("atLocation"), v.entity_id("bedroom")};
        CHECK_THROWS_AS(scorer.score_candidates(q2, {v.entity_id("cup")}),
                        UnknownSymbolError);
    }
}

TEST_CASE("analytic chance baselines", "[baselines]") {
    SECTION("top-k chance within the answer type") {
        CHECK(type_chance_bound(17, 5) == Catch::Approx(5.0 / 17.0));
        CHECK(type_chance_bound(74, 1) == Catch::Approx(1.0 / 74.0));
        CHECK(type_chance_bound(9, 5) == Catch::Approx(5.0 / 9.0));
        CHECK(type_chance_bound(3, 5) == 1.0); // clipped
        CHECK_THROWS_AS(type_chance_bound(0, 5), ConfigError);
        CHECK_THROWS_AS(type_chance_bound(17, 0), ConfigError);
    }
    SECTION("expected MRR of a uniform guesser is H(T)/T") {
        CHECK(expected_mrr_uniform(1) == 1.0);
        CHECK(expected_mrr_uniform(2) == 0.75);
        CHECK(expected_mrr_uniform(9) == Catch::Approx(0.31432980599647264));
        CHECK(expected_mrr_uniform(17) == Catch::Approx(0.2023266189788681));
        CHECK(expected_mrr_uniform(74) == Catch::Approx(0.06605435536783397));
        CHECK_THROWS_AS(expected_mrr_uniform(0), ConfigError);
    }
}
