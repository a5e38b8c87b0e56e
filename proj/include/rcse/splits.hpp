#pragma once

#include "rcse/error.hpp"
#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rcse {

enum class Protocol { triple_gen, env_gen, domain_transfer };

inline const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::triple_gen: return "triple_gen";
        case Protocol::env_gen: return "env_gen";
        case Protocol::domain_transfer: return "domain_transfer";
    }
    return "triple_gen";
}

inline std::optional<Protocol> parse_protocol(std::string_view s) {
    if (s == "triple_gen") return Protocol::triple_gen;
    if (s == "env_gen") return Protocol::env_gen;
    if (s == "domain_transfer") return Protocol::domain_transfer;
    return std::nullopt;
}

// One cross-validation fold: record-id sets into a TripleBag. For triple_gen
// the val/test sets carry one representative record per held-out unique
// triple; for env_gen and domain_transfer they carry every record of the
// held-out environments/domain.
struct FoldSpec {
    Protocol protocol = Protocol::triple_gen;
    uint32_t fold_index = 0;
    uint64_t seed = 0;
    std::vector<RecordId> train_ids;
    std::vector<RecordId> val_ids;
    std::vector<RecordId> test_ids;
};

namespace detail {

// Sizes of k near-equal partitions of n items; the first n % k parts get the
// extra item.
inline std::vector<size_t> partition_sizes(size_t n, size_t k) {
    std::vector<size_t> sizes(k, n / k);
    for (size_t i = 0; i < n % k; ++i) sizes[i] += 1;
    return sizes;
}

} // namespace detail

// Hold out unique triples, not records: the k folds partition the set of
// distinct (h,r,t); each fold's held-out triples go half to validation, half
// to test (validation takes the odd one); the fold's training set is every
// record whose triple is not held out. Validation/test ids are one
// representative record per held-out triple.
inline std::vector<FoldSpec> make_triple_gen_folds(const TripleBag& bag, uint32_t k,
                                                   uint64_t seed) {
    if (k < 2) throw ConfigError("triple_gen needs k >= 2 folds");
    auto unique = bag.unique_triples();
    if (unique.size() < 2 * static_cast<size_t>(k))
        throw ConfigError("triple_gen with k=" + std::to_string(k) + " needs at least " +
                          std::to_string(2 * k) + " unique triples, got " +
                          std::to_string(unique.size()));

    // First record id seen for each distinct triple.
    std::unordered_map<uint64_t, RecordId> representative;
    for (RecordId i = 0; i < bag.size(); ++i) {
        const auto& rec = bag.record(i);
        representative.emplace(pack_triple(rec.head, rec.rel, rec.tail), i);
    }

    std::vector<size_t> order(unique.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "triple-folds"));
    deterministic_shuffle(order, rng);

    auto sizes = detail::partition_sizes(unique.size(), k);
    std::vector<FoldSpec> folds;
    size_t cursor = 0;
    for (uint32_t f = 0; f < k; ++f) {
        FoldSpec fold;
        fold.protocol = Protocol::triple_gen;
        fold.fold_index = f;
        fold.seed = seed;

        std::unordered_set<uint64_t> held;
        for (size_t i = 0; i < sizes[f]; ++i) {
            const Triple& t = unique[order[cursor + i]].first;
            uint64_t key = pack_triple(t);
            held.insert(key);
            // Alternate held-out triples into validation then test.
            auto& side = (i % 2 == 0) ? fold.val_ids : fold.test_ids;
            side.push_back(representative.at(key));
        }
        cursor += sizes[f];

        for (RecordId i = 0; i < bag.size(); ++i) {
            const auto& rec = bag.record(i);
            if (!held.count(pack_triple(rec.head, rec.rel, rec.tail)))
                fold.train_ids.push_back(i);
        }
        std::sort(fold.val_ids.begin(), fold.val_ids.end());
        std::sort(fold.test_ids.begin(), fold.test_ids.end());
        folds.push_back(std::move(fold));
    }
    return folds;
}

// Hold out whole environments, balanced across environment types: within each
// type the environments are partitioned into k groups; the fold's group goes
// alternately to validation and test (validation first, so it takes the odd
// one); training takes every record of every remaining environment. With
// train_rooms_per_type set, training is cut down to that many environments
// per type (in shuffled order) to shrink the training set without touching
// the held-out side.
inline std::vector<FoldSpec> make_env_gen_folds(
    const TripleBag& bag, uint32_t k, uint64_t seed,
    std::optional<uint32_t> train_rooms_per_type = std::nullopt) {
    if (k < 2) throw ConfigError("env_gen needs k >= 2 folds");
    auto groups = bag.envs_by_type();
    if (groups.empty()) throw ConfigError("env_gen needs a nonempty bag");
    for (const auto& [type, envs] : groups) {
        if (envs.size() < k)
            throw ConfigError(std::string("env type ") + to_string(type) + " has " +
                              std::to_string(envs.size()) + " environments, need >= " +
                              std::to_string(k));
    }

    // Shuffle each type's environment list with its own derived stream so the
    // assignment for one type does not depend on how many others exist.
    std::map<EnvType, std::vector<std::string>> shuffled = groups;
    for (auto& [type, envs] : shuffled) {
        Rng rng(derive_seed(seed, "env-folds", static_cast<uint64_t>(type)));
        deterministic_shuffle(envs, rng);
    }

    std::vector<FoldSpec> folds;
    for (uint32_t f = 0; f < k; ++f) {
        FoldSpec fold;
        fold.protocol = Protocol::env_gen;
        fold.fold_index = f;
        fold.seed = seed;

        std::vector<std::string> train_envs, val_envs, test_envs;
        for (const auto& [type, envs] : shuffled) {
            auto sizes = detail::partition_sizes(envs.size(), k);
            size_t start = 0;
            for (uint32_t g = 0; g < f; ++g) start += sizes[g];
            for (size_t i = 0; i < sizes[f]; ++i)
                ((i % 2 == 0) ? val_envs : test_envs).push_back(envs[start + i]);

            std::vector<std::string> rest;
            for (size_t i = 0; i < envs.size(); ++i)
                if (i < start || i >= start + sizes[f]) rest.push_back(envs[i]);
            if (train_rooms_per_type) {
                if (*train_rooms_per_type < 1)
                    throw ConfigError("train_rooms_per_type must be >= 1");
                if (*train_rooms_per_type > rest.size())
                    throw ConfigError(std::string("env type ") + to_string(type) + " has only " +
                                      std::to_string(rest.size()) +
                                      " training environments in fold " + std::to_string(f) +
                                      ", cannot keep " + std::to_string(*train_rooms_per_type));
                rest.resize(*train_rooms_per_type);
            }
            train_envs.insert(train_envs.end(), rest.begin(), rest.end());
        }

        auto expand = [&](const std::vector<std::string>& envs, std::vector<RecordId>& out) {
            for (const auto& e : envs) {
                const auto& ids = bag.records_in_env(e);
                out.insert(out.end(), ids.begin(), ids.end());
            }
            std::sort(out.begin(), out.end());
        };
        expand(train_envs, fold.train_ids);
        expand(val_envs, fold.val_ids);
        expand(test_envs, fold.test_ids);
        folds.push_back(std::move(fold));
    }
    return folds;
}

struct TransferReport {
    size_t kept = 0;
    // Target records whose relation is outside the filter (not tested).
    size_t outside_filter = 0;
    // Target records with a symbol missing from the source vocabulary.
    size_t dropped_oov = 0;
};

// The merged corpus re-expresses kept target records in the source
// vocabulary; fold ids index merged.bag (train = source records, test = kept
// target records, no validation split).
struct TransferSplit {
    Corpus merged;
    FoldSpec fold;
    TransferReport report;
};

// Domain transfer: train on everything from the source corpus, test on the
// target corpus's records for the filtered relations. Target records using
// symbols the source never saw cannot be scored and are dropped (counted in
// the report). Target environment ids get a "tgt:" prefix inside the merged
// bag so they can never collide with source environments.
inline TransferSplit make_domain_transfer_split(const Corpus& source, const Corpus& target,
                                                const std::vector<std::string>& relation_filter) {
    if (relation_filter.empty()) throw ConfigError("relation filter must be nonempty");

    TransferSplit out;
    out.merged.vocab = source.vocab;
    std::vector<ObservationRecord> records = source.bag.records();
    const size_t n_source = records.size();

    std::unordered_set<std::string> filter(relation_filter.begin(), relation_filter.end());
    for (const auto& rec : target.bag.records()) {
        const std::string& rel_sym = target.vocab.relation(rec.rel);
        if (!filter.count(rel_sym)) {
            out.report.outside_filter++;
            continue;
        }
        auto h = out.merged.vocab.find_entity(target.vocab.entity(rec.head));
        auto r = out.merged.vocab.find_relation(rel_sym);
        auto t = out.merged.vocab.find_entity(target.vocab.entity(rec.tail));
        if (!h || !r || !t) {
            out.report.dropped_oov++;
            continue;
        }
        ObservationRecord moved;
        moved.head = *h;
        moved.rel = *r;
        moved.tail = *t;
        moved.env_type = rec.env_type;
        moved.env_id = "tgt:" + rec.env_id;
        records.push_back(std::move(moved));
        out.report.kept++;
    }
    if (out.report.kept == 0)
        throw ConfigError("no target records survive the relation filter and vocabulary "
                          "alignment; nothing to test");

    out.merged.bag = TripleBag(std::move(records));
    out.fold.protocol = Protocol::domain_transfer;
    out.fold.fold_index = 0;
    out.fold.seed = 0;
    for (RecordId i = 0; i < n_source; ++i) out.fold.train_ids.push_back(i);
    for (RecordId i = static_cast<RecordId>(n_source); i < out.merged.bag.size(); ++i)
        out.fold.test_ids.push_back(i);
    return out;
}

// TSV form: a comment header carrying protocol/fold/seed, then one
// `record_id<TAB>{train|val|test}` row per id.
inline void write_fold(const FoldSpec& fold, std::ostream& out) {
    out << "# protocol=" << to_string(fold.protocol) << " fold=" << fold.fold_index
        << " seed=" << fold.seed << "\n";
    for (auto id : fold.train_ids) out << id << "\ttrain\n";
    for (auto id : fold.val_ids) out << id << "\tval\n";
    for (auto id : fold.test_ids) out << id << "\ttest\n";
}

inline FoldSpec read_fold(std::istream& in) {
    FoldSpec fold;
    std::string line;
    size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::is_blank(line)) continue;
        if (line.front() == '#') {
            std::istringstream hdr(line.substr(1));
            std::string kv;
            while (hdr >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
                if (key == "protocol") {
                    auto p = parse_protocol(value);
                    if (!p) throw ParseError("unknown protocol '" + value + "'", lineno);
                    fold.protocol = *p;
                    saw_header = true;
                } else if (key == "fold") {
                    fold.fold_index = static_cast<uint32_t>(std::stoul(value));
                } else if (key == "seed") {
                    fold.seed = std::stoull(value);
                }
            }
            continue;
        }
        auto fields = detail::split_tabs(line);
        if (fields.size() != 2)
            throw ParseError("expected 2 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        RecordId id;
        try {
            id = static_cast<RecordId>(std::stoul(std::string(fields[0])));
        } catch (const std::exception&) {
            throw ParseError("bad record id '" + std::string(fields[0]) + "'", lineno);
        }
        if (fields[1] == "train")
            fold.train_ids.push_back(id);
        else if (fields[1] == "val")
            fold.val_ids.push_back(id);
        else if (fields[1] == "test")
            fold.test_ids.push_back(id);
        else
            throw ParseError("unknown split label '" + std::string(fields[1]) + "'", lineno);
    }
    if (!saw_header) throw ParseError("missing '# protocol=...' header");
    return fold;
}

inline void write_fold_file(const FoldSpec& fold, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_fold(fold, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline FoldSpec read_fold_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return read_fold(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace rcse
