#pragma once

#include "rcse/error.hpp"
#include "rcse/vocab.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rcse {

enum class EnvType : uint8_t { bathroom, bedroom, kitchen, livingroom };

inline constexpr std::array<EnvType, 4> kEnvTypes = {
    EnvType::bathroom, EnvType::bedroom, EnvType::kitchen, EnvType::livingroom};

inline const char* to_string(EnvType t) {
    switch (t) {
        case EnvType::bathroom: return "bathroom";
        case EnvType::bedroom: return "bedroom";
        case EnvType::kitchen: return "kitchen";
        case EnvType::livingroom: return "livingroom";
    }
    return "bathroom";
}

inline std::optional<EnvType> parse_env_type(std::string_view s) {
    if (s == "bathroom") return EnvType::bathroom;
    if (s == "bedroom") return EnvType::bedroom;
    if (s == "kitchen") return EnvType::kitchen;
    if (s == "livingroom") return EnvType::livingroom;
    return std::nullopt;
}

// The three relations whose semantics forbid self-loops (an object cannot be
// its own location, material, or affordance).
inline constexpr std::array<std::string_view, 3> kIrreflexiveRelations = {
    "atLocation", "hasMaterial", "hasAffordance"};

inline bool is_irreflexive_relation(std::string_view r) {
    return std::find(kIrreflexiveRelations.begin(), kIrreflexiveRelations.end(), r) !=
           kIrreflexiveRelations.end();
}

struct Triple {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

// One observed fact occurrence, tagged with the environment it came from.
// The same (head, rel, tail) may recur across many records; multiplicity is
// data, not noise.
struct ObservationRecord {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;
    EnvType env_type = EnvType::bathroom;
    std::string env_id;

    Triple triple() const { return {head, rel, tail}; }
};

// Ids stay below 2^20 at the scales this library targets, so a triple packs
// into one u64 for count-map keys.
inline uint64_t pack_triple(EntityId h, RelationId r, EntityId t) {
    return (static_cast<uint64_t>(h) << 40) | (static_cast<uint64_t>(r) << 20) |
           static_cast<uint64_t>(t);
}

inline uint64_t pack_triple(const Triple& tr) { return pack_triple(tr.head, tr.rel, tr.tail); }

// Immutable collection of observation records with occurrence counts and the
// lookup indexes the samplers and evaluators need. Build once from a record
// vector; derive smaller bags with subset().
class TripleBag {
public:
    TripleBag() = default;

    explicit TripleBag(std::vector<ObservationRecord> records) : records_(std::move(records)) {
        for (RecordId i = 0; i < records_.size(); ++i) {
            const auto& rec = records_[i];
            counts_[pack_triple(rec.head, rec.rel, rec.tail)] += 1;
            auto [it, inserted] = env_types_.emplace(rec.env_id, rec.env_type);
            if (!inserted && it->second != rec.env_type)
                throw ParseError("environment '" + rec.env_id + "' appears with two env types");
            env_records_[rec.env_id].push_back(i);
        }
        auto add_unique = [](std::vector<uint32_t>& v, uint32_t x) {
            if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
        };
        for (const auto& rec : records_) {
            add_unique(heads_by_rt_[pack_triple(0, rec.rel, rec.tail)], rec.head);
            add_unique(tails_by_hr_[pack_triple(rec.head, rec.rel, 0)], rec.tail);
            add_unique(rels_by_ht_[pack_triple(rec.head, 0, rec.tail)], rec.rel);
        }
        for (auto& [k, v] : heads_by_rt_) std::sort(v.begin(), v.end());
        for (auto& [k, v] : tails_by_hr_) std::sort(v.begin(), v.end());
        for (auto& [k, v] : rels_by_ht_) std::sort(v.begin(), v.end());
    }

    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const ObservationRecord& record(RecordId i) const { return records_[i]; }
    const std::vector<ObservationRecord>& records() const { return records_; }

    uint32_t count(EntityId h, RelationId r, EntityId t) const {
        auto it = counts_.find(pack_triple(h, r, t));
        return it == counts_.end() ? 0u : it->second;
    }
    uint32_t count(const Triple& tr) const { return count(tr.head, tr.rel, tr.tail); }
    bool contains(EntityId h, RelationId r, EntityId t) const { return count(h, r, t) > 0; }

    const std::vector<EntityId>& heads_for(RelationId r, EntityId t) const {
        return lookup(heads_by_rt_, pack_triple(0, r, t));
    }
    const std::vector<EntityId>& tails_for(EntityId h, RelationId r) const {
        return lookup(tails_by_hr_, pack_triple(h, r, 0));
    }
    const std::vector<RelationId>& relations_for(EntityId h, EntityId t) const {
        return lookup(rels_by_ht_, pack_triple(h, 0, t));
    }

    // Distinct (h, r, t) with occurrence counts, sorted by (head, rel, tail).
    std::vector<std::pair<Triple, uint32_t>> unique_triples() const {
        std::vector<std::pair<Triple, uint32_t>> out;
        out.reserve(counts_.size());
        for (const auto& [key, n] : counts_) {
            Triple tr{static_cast<EntityId>(key >> 40),
                      static_cast<RelationId>((key >> 20) & 0xfffffu),
                      static_cast<EntityId>(key & 0xfffffu)};
            out.emplace_back(tr, n);
        }
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    size_t num_unique_triples() const { return counts_.size(); }

    // Environment ids in lexicographic order.
    std::vector<std::string> env_ids() const {
        std::vector<std::string> out;
        out.reserve(env_types_.size());
        for (const auto& [id, t] : env_types_) out.push_back(id);
        return out;
    }

    EnvType env_type_of(const std::string& env_id) const {
        auto it = env_types_.find(env_id);
        if (it == env_types_.end())
            throw UnknownSymbolError("unknown environment '" + env_id + "'");
        return it->second;
    }

    bool has_env(const std::string& env_id) const { return env_types_.count(env_id) > 0; }

    const std::vector<RecordId>& records_in_env(const std::string& env_id) const {
        auto it = env_records_.find(env_id);
        if (it == env_records_.end())
            throw UnknownSymbolError("unknown environment '" + env_id + "'");
        return it->second;
    }

    // Environment ids grouped by type, each group lexicographically sorted.
    std::map<EnvType, std::vector<std::string>> envs_by_type() const {
        std::map<EnvType, std::vector<std::string>> out;
        for (const auto& [id, t] : env_types_) out[t].push_back(id);
        return out;
    }

    TripleBag subset(const std::vector<RecordId>& ids) const {
        std::vector<ObservationRecord> recs;
        recs.reserve(ids.size());
        for (auto i : ids) {
            if (i >= records_.size())
                throw ConfigError("record id " + std::to_string(i) + " out of range");
            recs.push_back(records_[i]);
        }
        return TripleBag(std::move(recs));
    }

    // Content hash over the record sequence; order-sensitive by design so that
    // byte-identical inputs hash equal and reordered ones do not.
    uint64_t fingerprint() const {
        uint64_t h = fnv1a64("rcse-bag");
        for (const auto& rec : records_) {
            std::array<uint64_t, 4> fields = {rec.head, rec.rel, rec.tail,
                                              static_cast<uint64_t>(rec.env_type)};
            h = fnv1a64_bytes(fields.data(), sizeof(fields), h);
            h = fnv1a64(rec.env_id, h);
            h = fnv1a64("\x1f", h);
        }
        return h;
    }

private:
    template <typename V>
    static const V& lookup(const std::unordered_map<uint64_t, V>& m, uint64_t key) {
        static const V empty;
        auto it = m.find(key);
        return it == m.end() ? empty : it->second;
    }

    std::vector<ObservationRecord> records_;
    std::unordered_map<uint64_t, uint32_t> counts_;
    std::unordered_map<uint64_t, std::vector<EntityId>> heads_by_rt_;
    std::unordered_map<uint64_t, std::vector<EntityId>> tails_by_hr_;
    std::unordered_map<uint64_t, std::vector<RelationId>> rels_by_ht_;
    std::map<std::string, EnvType> env_types_;
    std::map<std::string, std::vector<RecordId>> env_records_;
};

struct Corpus {
    Vocabulary vocab;
    TripleBag bag;
};

enum class VocabPolicy { extend, strict };

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

} // namespace detail

// Reads tab-separated observation rows: head, relation, tail, env_type,
// env_id. Blank lines and lines starting with '#' are skipped. Under
// VocabPolicy::extend new symbols are interned as they appear; under strict,
// any symbol absent from `vocab` is an error. Errors carry 1-based line
// numbers.
inline Corpus ingest(std::istream& in, VocabPolicy policy = VocabPolicy::extend,
                     Vocabulary vocab = {}) {
    std::vector<ObservationRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::is_blank(line) || line.front() == '#') continue;
        auto fields = detail::split_tabs(line);
        if (fields.size() != 5)
            throw ParseError("expected 5 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        for (auto f : fields)
            if (f.empty()) throw ParseError("empty field", lineno);

        auto env_type = parse_env_type(fields[3]);
        if (!env_type)
            throw ParseError("unknown env type '" + std::string(fields[3]) + "'", lineno);

        ObservationRecord rec;
        if (policy == VocabPolicy::strict) {
            auto h = vocab.find_entity(fields[0]);
            auto r = vocab.find_relation(fields[1]);
            auto t = vocab.find_entity(fields[2]);
            auto fail = [lineno](std::string_view kind, std::string_view sym) {
                throw UnknownSymbolError("line " + std::to_string(lineno) + ": unknown " +
                                         std::string(kind) + " '" + std::string(sym) + "'");
            };
            if (!h) fail("entity", fields[0]);
            if (!r) fail("relation", fields[1]);
            if (!t) fail("entity", fields[2]);
            rec.head = *h;
            rec.rel = *r;
            rec.tail = *t;
        } else {
            rec.head = vocab.intern_entity(std::string(fields[0]));
            rec.rel = vocab.intern_relation(std::string(fields[1]));
            rec.tail = vocab.intern_entity(std::string(fields[2]));
        }
        if (rec.head == rec.tail && is_irreflexive_relation(fields[1]))
            throw ParseError("self-loop '" + std::string(fields[0]) + "' under relation '" +
                                 std::string(fields[1]) + "'",
                             lineno);
        rec.env_type = *env_type;
        rec.env_id = std::string(fields[4]);
        records.push_back(std::move(rec));
    }
    return Corpus{std::move(vocab), TripleBag(std::move(records))};
}

inline Corpus ingest_text(std::string_view text, VocabPolicy policy = VocabPolicy::extend,
                          Vocabulary vocab = {}) {
    std::istringstream in{std::string(text)};
    return ingest(in, policy, std::move(vocab));
}

inline Corpus ingest_file(const std::string& path, VocabPolicy policy = VocabPolicy::extend,
                          Vocabulary vocab = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return ingest(in, policy, std::move(vocab));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// Writes records back out in the ingest format, one row per record in bag
// order. Ingesting the output reproduces the bag exactly, so the bytes are a
// stable function of the content.
inline void write_triples(const TripleBag& bag, const Vocabulary& vocab, std::ostream& out) {
    for (const auto& rec : bag.records()) {
        out << vocab.entity(rec.head) << '\t' << vocab.relation(rec.rel) << '\t'
            << vocab.entity(rec.tail) << '\t' << to_string(rec.env_type) << '\t' << rec.env_id
            << '\n';
    }
}

inline void write_triples_file(const TripleBag& bag, const Vocabulary& vocab,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_triples(bag, vocab, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

// Entity type table: tab-separated rows of entity symbol and type. Doubles as
// the pool declaration — entities that never occur in any observation (and so
// would be invisible to ingest) still enter the vocabulary here and stay
// available as ranking candidates.
inline void read_entity_types(std::istream& in, Vocabulary& vocab) {
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::is_blank(line) || line.front() == '#') continue;
        auto fields = detail::split_tabs(line);
        if (fields.size() != 2)
            throw ParseError("expected 2 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        if (fields[0].empty() || fields[1].empty()) throw ParseError("empty field", lineno);
        auto type = parse_entity_type(fields[1]);
        if (!type)
            throw ParseError("unknown entity type '" + std::string(fields[1]) + "'", lineno);
        auto id = vocab.intern_entity(std::string(fields[0]));
        vocab.set_entity_type(id, *type);
    }
}

inline void write_entity_types(const Vocabulary& vocab, std::ostream& out) {
    for (EntityId i = 0; i < vocab.num_entities(); ++i)
        out << vocab.entity(i) << '\t' << to_string(vocab.entity_type(i)) << '\n';
}

inline void read_entity_types_file(const std::string& path, Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        read_entity_types(in, vocab);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_entity_types_file(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_entity_types(vocab, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

// Loads a corpus from a triples file plus an optional entity-type table. The
// type table is read first so the declared pool (including zero-observation
// entities) gets stable low ids and type tags before ingest extends the
// vocabulary with anything the table missed.
inline Corpus load_corpus(const std::string& triples_path,
                          const std::string& types_path = {}) {
    Vocabulary vocab;
    if (!types_path.empty()) read_entity_types_file(types_path, vocab);
    return ingest_file(triples_path, VocabPolicy::extend, std::move(vocab));
}

} // namespace rcse
