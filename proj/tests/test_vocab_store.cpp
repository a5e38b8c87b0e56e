#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rcse;

TEST_CASE("two identical rows count as multiplicity two", "[vocab]") {
    auto corpus = ingest_text(
        "mug\thasAffordance\tfill\tkitchen\tk01\n"
        "mug\thasAffordance\tfill\tkitchen\tk01\n");
    auto& v = corpus.vocab;
    auto& bag = corpus.bag;
    REQUIRE(bag.size() == 2);
    CHECK(bag.num_unique_triples() == 1);
    CHECK(bag.count(v.entity_id("mug"), v.relation_id("hasAffordance"), v.entity_id("fill")) == 2);
}

TEST_CASE("empty input yields empty bag and vocabulary without error", "[vocab]") {
    auto corpus = ingest_text("");
    CHECK(corpus.bag.empty());
    CHECK(corpus.vocab.num_entities() == 0);
    CHECK(corpus.vocab.num_relations() == 0);
    CHECK(corpus.bag.unique_triples().empty());
}

TEST_CASE("environment index partitions record ids", "[vocab]") {
    auto corpus = ingest_text(
        "mug\tatLocation\tkitchen\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n"
        "towel\tatLocation\tbathroom\tbathroom\tb01\n");
    auto& bag = corpus.bag;
    auto envs = bag.env_ids();
    REQUIRE(envs == std::vector<std::string>{"b01", "k01"});
    std::set<RecordId> all;
    size_t total = 0;
    for (const auto& e : envs) {
        for (auto id : bag.records_in_env(e)) all.insert(id);
        total += bag.records_in_env(e).size();
    }
    CHECK(total == 3);
    CHECK(all == std::set<RecordId>{0, 1, 2});
    CHECK(bag.env_type_of("k01") == EnvType::kitchen);
    CHECK(bag.env_type_of("b01") == EnvType::bathroom);
}

TEST_CASE("symbols intern in first-seen order with dense ids", "[vocab]") {
    auto corpus = ingest_text(
        "mug\thasAffordance\tfill\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n");
    auto& v = corpus.vocab;
    CHECK(v.entity_id("mug") == 0);
    CHECK(v.entity_id("fill") == 1);
    CHECK(v.entity_id("pan") == 2);
    CHECK(v.entity_id("kitchen") == 3);
    CHECK(v.relation_id("hasAffordance") == 0);
    CHECK(v.relation_id("atLocation") == 1);
    CHECK(v.entity(0) == "mug");
    CHECK(v.relation(1) == "atLocation");
    // Interning again is a no-op.
    Vocabulary copy = v;
    CHECK(copy.intern_entity("mug") == 0);
    CHECK(copy.num_entities() == 4);
}

TEST_CASE("malformed rows report their line number", "[vocab]") {
    try {
        ingest_text(
            "mug\thasAffordance\tfill\tkitchen\tk01\n"
            "pan\tatLocation\tkitchen\tkitchen\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(e.tag() == "parse-error");
    }

    CHECK_THROWS_AS(ingest_text("a\tb\tc\td\te\tf\n"), ParseError);
    CHECK_THROWS_AS(ingest_text("mug\t\tfill\tkitchen\tk01\n"), ParseError);
    CHECK_THROWS_AS(ingest_text("mug\thasAffordance\tfill\tgarden\tk01\n"), ParseError);
}

TEST_CASE("strict policy rejects symbols missing from the vocabulary", "[vocab]") {
    auto base = ingest_text("mug\thasAffordance\tfill\tkitchen\tk01\n");
    // Same rows pass strict against their own vocabulary.
    auto again = ingest_text("mug\thasAffordance\tfill\tkitchen\tk02\n", VocabPolicy::strict,
                             base.vocab);
    CHECK(again.bag.size() == 1);

    CHECK_THROWS_AS(ingest_text("cup\thasAffordance\tfill\tkitchen\tk01\n", VocabPolicy::strict,
                                base.vocab),
                    UnknownSymbolError);
    CHECK_THROWS_AS(ingest_text("mug\tmadeOf\tfill\tkitchen\tk01\n", VocabPolicy::strict,
                                base.vocab),
                    UnknownSymbolError);
    try {
        ingest_text("mug\thasAffordance\tsqueeze\tkitchen\tk01\n", VocabPolicy::strict,
                    base.vocab);
        FAIL("expected UnknownSymbolError");
    } catch (const UnknownSymbolError& e) {
        CHECK(e.tag() == "unknown-symbol");
        CHECK(std::string(e.what()).find("squeeze") != std::string::npos);
    }
}

TEST_CASE("self-loops rejected for the domain relations only", "[vocab]") {
    CHECK_THROWS_AS(ingest_text("mug\tatLocation\tmug\tkitchen\tk01\n"), ParseError);
    CHECK_THROWS_AS(ingest_text("mug\thasMaterial\tmug\tkitchen\tk01\n"), ParseError);
    CHECK_THROWS_AS(ingest_text("mug\thasAffordance\tmug\tkitchen\tk01\n"), ParseError);
    // A generic relation may relate an entity to itself.
    auto corpus = ingest_text("mug\tsameAs\tmug\tkitchen\tk01\n");
    CHECK(corpus.bag.size() == 1);
}

TEST_CASE("comments, blank lines, and CRLF endings are tolerated", "[vocab]") {
    auto corpus = ingest_text(
        "# header comment\n"
        "\n"
        "   \n"
        "mug\thasAffordance\tfill\tkitchen\tk01\r\n"
        "# trailing comment\n");
    CHECK(corpus.bag.size() == 1);
    CHECK(corpus.bag.record(0).env_id == "k01");
}

TEST_CASE("unique_triples aggregates and sorts by id tuple", "[vocab]") {
    // 5 records of 2 distinct triples.
    auto corpus = ingest_text(
        "mug\thasAffordance\tfill\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n"
        "mug\thasAffordance\tfill\tkitchen\tk02\n"
        "mug\thasAffordance\tfill\tkitchen\tk03\n"
        "pan\tatLocation\tkitchen\tkitchen\tk02\n");
    auto uniq = corpus.bag.unique_triples();
    REQUIRE(uniq.size() == 2);
    size_t total = 0;
    for (auto& [t, n] : uniq) total += n;
    CHECK(total == 5);

    // Insertion order scrambled; output must match an independent sort.
    auto scrambled = ingest_text(
        "c\trel\td\tkitchen\tk01\n"
        "a\trel\tb\tkitchen\tk01\n"
        "b\trel\tc\tkitchen\tk01\n"
        "a\trel\tc\tkitchen\tk01\n");
    auto uniq2 = scrambled.bag.unique_triples();
    auto oracle = uniq2;
    std::sort(oracle.begin(), oracle.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    CHECK(uniq2 == oracle);
    for (size_t i = 1; i < uniq2.size(); ++i) REQUIRE(uniq2[i - 1].first < uniq2[i].first);
}

TEST_CASE("lookup indices enumerate neighbors", "[vocab]") {
    auto corpus = ingest_text(
        "mug\tatLocation\tkitchen\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n"
        "mug\tatLocation\tbedroom\tbedroom\td01\n"
        "mug\thasMaterial\tceramic\tkitchen\tk01\n");
    auto& v = corpus.vocab;
    auto& bag = corpus.bag;
    auto mug = v.entity_id("mug"), pan = v.entity_id("pan");
    auto kitchen = v.entity_id("kitchen");
    auto at = v.relation_id("atLocation"), mat = v.relation_id("hasMaterial");

    auto heads = bag.heads_for(at, kitchen);
    CHECK(heads == std::vector<EntityId>{mug, pan});
    auto tails = bag.tails_for(mug, at);
    REQUIRE(tails.size() == 2);
    CHECK(std::is_sorted(tails.begin(), tails.end()));
    auto rels = bag.relations_for(mug, kitchen);
    CHECK(rels == std::vector<RelationId>{at});
    CHECK(bag.heads_for(mat, kitchen).empty());
    CHECK(bag.contains(mug, at, kitchen));
    CHECK_FALSE(bag.contains(pan, mat, kitchen));
}

TEST_CASE("an environment id cannot switch env type", "[vocab]") {
    CHECK_THROWS_AS(ingest_text("mug\tatLocation\tkitchen\tkitchen\te01\n"
                                "towel\tatLocation\tbathroom\tbathroom\te01\n"),
                    ParseError);
}

TEST_CASE("subset keeps selected records and reindexes", "[vocab]") {
    auto corpus = ingest_text(
        "mug\tatLocation\tkitchen\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n"
        "towel\tatLocation\tbathroom\tbathroom\tb01\n");
    auto sub = corpus.bag.subset({0, 2});
    REQUIRE(sub.size() == 2);
    CHECK(sub.record(0).env_id == "k01");
    CHECK(sub.record(1).env_id == "b01");
    CHECK(sub.num_unique_triples() == 2);
    CHECK_THROWS_AS(corpus.bag.subset({17}), ConfigError);
}

TEST_CASE("serialization round-trips bytes and content", "[vocab]") {
    std::string text =
        "mug\tatLocation\tkitchen\tkitchen\tk01\n"
        "pan\tatLocation\tkitchen\tkitchen\tk01\n"
        "mug\thasMaterial\tceramic\tkitchen\tk02\n"
        "towel\tatLocation\tbathroom\tbathroom\tb01\n";
    auto corpus = ingest_text(text);
    std::ostringstream out;
    write_triples(corpus.bag, corpus.vocab, out);
    CHECK(out.str() == text);

    auto back = ingest_text(out.str());
    CHECK(back.bag.unique_triples() == corpus.bag.unique_triples());
    CHECK(back.bag.fingerprint() == corpus.bag.fingerprint());
    CHECK(back.vocab.fingerprint() == corpus.vocab.fingerprint());
}

TEST_CASE("round-trip preserves randomly generated corpora", "[vocab]") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        std::ostringstream text;
        size_t rows = 1 + rng.uniform_index(40);
        for (size_t i = 0; i < rows; ++i) {
            auto h = rng.uniform_index(8), t = rng.uniform_index(8);
            if (h == t) t = (t + 1) % 8;
            auto r = rng.uniform_index(3);
            auto env = rng.uniform_index(4);
            const char* types[] = {"bathroom", "bedroom", "kitchen", "livingroom"};
            text << "e" << h << "\tr" << r << "\te" << t << "\t" << types[env] << "\tenv"
                 << env << "\n";
        }
        auto corpus = ingest_text(text.str());
        REQUIRE(corpus.bag.size() == rows);
        size_t total = 0;
        for (auto& [tr, n] : corpus.bag.unique_triples()) total += n;
        CHECK(total == rows);

        std::ostringstream out;
        write_triples(corpus.bag, corpus.vocab, out);
        auto back = ingest_text(out.str());
        CHECK(back.bag.fingerprint() == corpus.bag.fingerprint());
        std::ostringstream out2;
        write_triples(back.bag, back.vocab, out2);
        CHECK(out2.str() == out.str());
    }
}

TEST_CASE("entity type table declares and tags the pool", "[vocab]") {
    Vocabulary v;
    std::istringstream types(
        "# pool declaration\n"
        "mug\tobject\n"
        "kitchen\troom\n"
        "garage\troom\n"
        "ceramic\tmaterial\n"
        "fill\taffordance\n");
    read_entity_types(types, v);
    REQUIRE(v.num_entities() == 5);
    CHECK(v.entity_type(v.entity_id("mug")) == EntityType::object);
    CHECK(v.entity_type(v.entity_id("garage")) == EntityType::room);
    CHECK(v.entity_type(v.entity_id("ceramic")) == EntityType::material);
    CHECK(v.entity_type(v.entity_id("fill")) == EntityType::affordance);

    // Ingest on top: declared-but-unobserved entities stay available.
    auto corpus = ingest_text("mug\tatLocation\tkitchen\tkitchen\tk01\n",
                              VocabPolicy::extend, v);
    CHECK(corpus.vocab.find_entity("garage").has_value());
    auto rooms = corpus.vocab.entities_of_type(EntityType::room);
    CHECK(rooms.size() == 2);

    std::ostringstream out;
    write_entity_types(corpus.vocab, out);
    Vocabulary v2;
    std::istringstream in(out.str());
    read_entity_types(in, v2);
    CHECK(v2.num_entities() == corpus.vocab.num_entities());
    for (EntityId i = 0; i < v2.num_entities(); ++i)
        CHECK(v2.entity_type(i) == corpus.vocab.entity_type(i));

    std::istringstream bad("mug\tgadget\n");
    Vocabulary v3;
    CHECK_THROWS_AS(read_entity_types(bad, v3), ParseError);
}

TEST_CASE("entities default to object type until tagged", "[vocab]") {
    auto corpus = ingest_text("mug\tatLocation\tkitchen\tkitchen\tk01\n");
    CHECK(corpus.vocab.entity_type(corpus.vocab.entity_id("kitchen")) == EntityType::object);
}

TEST_CASE("vocabulary fingerprint tracks symbol content", "[vocab]") {
    Vocabulary a, b;
    a.intern_entity("mug");
    a.intern_relation("atLocation");
    b.intern_entity("mug");
    b.intern_relation("atLocation");
    CHECK(a.fingerprint() == b.fingerprint());
    b.intern_entity("pan");
    CHECK(a.fingerprint() != b.fingerprint());

    // Boundary between the two symbol lists matters.
    Vocabulary c, d;
    c.intern_entity("x");
    c.intern_entity("y");
    d.intern_entity("x");
    d.intern_relation("y");
    CHECK(c.fingerprint() != d.fingerprint());
}

TEST_CASE("out-of-range ids and unknown symbols raise unknown-symbol errors", "[vocab]") {
    Vocabulary v;
    v.intern_entity("mug");
    CHECK_THROWS_AS(v.entity(5), UnknownSymbolError);
    CHECK_THROWS_AS(v.relation(0), UnknownSymbolError);
    CHECK_THROWS_AS(v.entity_id("ghost"), UnknownSymbolError);
    CHECK_THROWS_AS(v.relation_id("ghost"), UnknownSymbolError);
    CHECK_FALSE(v.find_entity("ghost").has_value());
}
