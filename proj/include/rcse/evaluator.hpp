#pragma once

#include "rcse/error.hpp"
#include "rcse/model.hpp"
#include "rcse/splits.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace rcse {

enum class Slot { head, relation, tail };

inline const char* to_string(Slot s) {
    switch (s) {
        case Slot::head: return "head";
        case Slot::relation: return "relation";
        case Slot::tail: return "tail";
    }
    return "head";
}

// A completion query: one slot is unknown, the other two are fixed. The
// unknown slot's field is ignored.
struct QueryPattern {
    Slot slot = Slot::tail;
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;

    static QueryPattern for_slot(Slot s, const Triple& t) {
        return QueryPattern{s, t.head, t.rel, t.tail};
    }
};

// Anything that can score candidate ids for a query's unknown slot: the
// embedding model or any baseline. Scorers may declare candidates they cannot
// rank fairly (the cosine baseline excludes its comparison group); the
// evaluator removes those from the candidate set for inferred and
// ground-truth ranks alike, but never removes the query's true answer.
class CompletionScorer {
public:
    virtual ~CompletionScorer() = default;
    virtual std::vector<double> score_candidates(const QueryPattern& q,
                                                 const std::vector<uint32_t>& candidates) const = 0;
    virtual std::vector<uint32_t> excluded_candidates(const QueryPattern& q) const {
        (void)q;
        return {};
    }
};

// Scores candidates with the trained embedding.
class ModelScorer : public CompletionScorer {
public:
    explicit ModelScorer(const EmbeddingModel& model) : model_(model) {}

    std::vector<double> score_candidates(const QueryPattern& q,
                                         const std::vector<uint32_t>& candidates) const override {
        std::vector<double> out;
        out.reserve(candidates.size());
        for (auto c : candidates) {
            switch (q.slot) {
                case Slot::head: out.push_back(model_.score(c, q.rel, q.tail)); break;
                case Slot::relation: out.push_back(model_.score(q.head, c, q.tail)); break;
                case Slot::tail: out.push_back(model_.score(q.head, q.rel, c)); break;
            }
        }
        return out;
    }

private:
    const EmbeddingModel& model_;
};

// Filtered ranking protocol: answers the training bag already confirms for a
// query are dropped from its candidate list before ranking (the evaluator
// still protects the queried truth). Wraps any scorer and merges with the
// inner scorer's own exclusions, so baselines and the embedding can be
// compared over identical candidate sets.
class FilteredScorer : public CompletionScorer {
public:
    FilteredScorer(const CompletionScorer& inner, const TripleBag& train_bag)
        : inner_(inner), train_bag_(train_bag) {}

    std::vector<double> score_candidates(const QueryPattern& q,
                                         const std::vector<uint32_t>& candidates) const override {
        return inner_.score_candidates(q, candidates);
    }

    std::vector<uint32_t> excluded_candidates(const QueryPattern& q) const override {
        std::vector<uint32_t> out;
        switch (q.slot) {
            case Slot::head: out = train_bag_.heads_for(q.rel, q.tail); break;
            case Slot::relation: out = train_bag_.relations_for(q.head, q.tail); break;
            case Slot::tail: out = train_bag_.tails_for(q.head, q.rel); break;
        }
        auto inner_ex = inner_.excluded_candidates(q);
        out.insert(out.end(), inner_ex.begin(), inner_ex.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    const CompletionScorer& inner_;
    const TripleBag& train_bag_;
};

struct RankPair {
    uint32_t ground_truth = 1; // G_r, from observation counts
    uint32_t inferred = 1;     // I_r, from scorer ranking
};

// ---- metrics ------------------------------------------------------------

inline double mrr_star(const std::vector<RankPair>& pairs) {
    if (pairs.empty()) throw MetricError("mrr_star over empty input");
    double sum = 0.0;
    for (const auto& p : pairs) {
        double diff = std::abs(static_cast<double>(p.ground_truth) -
                               static_cast<double>(p.inferred));
        sum += 1.0 / (diff + 1.0);
    }
    return sum / static_cast<double>(pairs.size());
}

inline double hits_at_5_star(const std::vector<RankPair>& pairs) {
    if (pairs.empty()) throw MetricError("hits_at_5_star over empty input");
    size_t hits = 0;
    for (const auto& p : pairs) {
        uint32_t diff = p.ground_truth > p.inferred ? p.ground_truth - p.inferred
                                                    : p.inferred - p.ground_truth;
        if (diff < 5) ++hits; // strict: a difference of exactly 5 is a miss
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

inline double mrr(const std::vector<uint32_t>& ranks) {
    if (ranks.empty()) throw MetricError("mrr over empty input");
    double sum = 0.0;
    for (auto r : ranks) {
        if (r < 1) throw MetricError("rank below 1");
        sum += 1.0 / static_cast<double>(r);
    }
    return sum / static_cast<double>(ranks.size());
}

inline double hits_at_k(const std::vector<uint32_t>& ranks, uint32_t k) {
    if (ranks.empty()) throw MetricError("hits_at_k over empty input");
    size_t hits = 0;
    for (auto r : ranks)
        if (r <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

// ---- ranking ------------------------------------------------------------

// Candidates ordered by descending score, ties broken by ascending id.
inline std::vector<std::pair<uint32_t, double>> rank_answers(
    const CompletionScorer& scorer, const QueryPattern& q,
    const std::vector<uint32_t>& candidates) {
    if (candidates.empty()) throw MetricError("rank_answers over empty candidate set");
    auto scores = scorer.score_candidates(q, candidates);
    std::vector<std::pair<uint32_t, double>> out;
    out.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) out.emplace_back(candidates[i], scores[i]);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

// Competition rank of one candidate within a score list: 1 + the number of
// strictly better scores + the number of equal scores at lower ids.
inline uint32_t competition_rank(const std::vector<uint32_t>& candidates,
                                 const std::vector<double>& scores, uint32_t target) {
    uint32_t rank = 1;
    double target_score = 0.0;
    bool found = false;
    for (size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i] == target) {
            target_score = scores[i];
            found = true;
            break;
        }
    if (!found) throw MetricError("target id not among candidates");
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] == target) continue;
        if (scores[i] > target_score ||
            (scores[i] == target_score && candidates[i] < target))
            ++rank;
    }
    return rank;
}

// Observation count a completed candidate would have in the bag.
inline uint32_t answer_count(const TripleBag& bag, const QueryPattern& q, uint32_t candidate) {
    switch (q.slot) {
        case Slot::head: return bag.count(candidate, q.rel, q.tail);
        case Slot::relation: return bag.count(q.head, candidate, q.tail);
        case Slot::tail: return bag.count(q.head, q.rel, candidate);
    }
    return 0;
}

// Ground-truth competition ranks by observation count in `full_bag`:
// rank(c) = 1 + #{c' : count(c') > count(c)}. Candidates the bag never saw
// all share the trailing rank band. Returned ranks align with `candidates`.
inline std::vector<uint32_t> ground_truth_ranks(const TripleBag& full_bag,
                                                const QueryPattern& q,
                                                const std::vector<uint32_t>& candidates) {
    std::vector<uint32_t> counts(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i)
        counts[i] = answer_count(full_bag, q, candidates[i]);
    std::vector<uint32_t> ranks(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        uint32_t rank = 1;
        for (size_t j = 0; j < candidates.size(); ++j)
            if (counts[j] > counts[i]) ++rank;
        ranks[i] = rank;
    }
    return ranks;
}

// ---- report -------------------------------------------------------------

struct MetricCell {
    std::string relation; // relation symbol, or "*" pooled over relations
    std::string slot;     // head | relation | tail | *
    std::string metric;
    double value = 0.0;
    size_t n = 0; // number of queries aggregated
    uint32_t fold = 0;
};

struct RankingReport {
    Protocol protocol = Protocol::triple_gen;
    uint32_t fold = 0;
    std::vector<MetricCell> cells;

    double value(const std::string& relation, const std::string& slot,
                 const std::string& metric) const {
        for (const auto& c : cells)
            if (c.relation == relation && c.slot == slot && c.metric == metric) return c.value;
        throw MetricError("no report cell (" + relation + ", " + slot + ", " + metric + ")");
    }
    bool has(const std::string& relation, const std::string& slot,
             const std::string& metric) const {
        for (const auto& c : cells)
            if (c.relation == relation && c.slot == slot && c.metric == metric) return true;
        return false;
    }
};

struct EvalOptions {
    uint32_t hits_k = 5;
};

namespace detail {

struct QueryOutcome {
    RelationId rel;
    Slot slot;
    uint32_t inferred;
    uint32_t ground_truth; // only meaningful under triple_gen
};

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail

// Evaluates one fold. Under triple_gen each held-out test triple spawns all
// three slot queries and contributes rank pairs (inferred vs count-derived
// ground truth over the full bag) plus standard metrics of the true answer's
// inferred rank. Under env_gen / domain_transfer every held-out record is a
// test item (multiplicity counts) and standard metrics are reported.
// Entity slots rank over all entities, the relation slot over all relations.
inline RankingReport evaluate(const CompletionScorer& scorer, const TripleBag& bag,
                              const FoldSpec& fold, const Vocabulary& vocab,
                              const TripleBag& full_bag, const EvalOptions& opts = {}) {
    const bool pair_metrics = fold.protocol == Protocol::triple_gen;

    std::vector<uint32_t> all_entities(vocab.num_entities());
    for (uint32_t i = 0; i < all_entities.size(); ++i) all_entities[i] = i;
    std::vector<uint32_t> all_relations(vocab.num_relations());
    for (uint32_t i = 0; i < all_relations.size(); ++i) all_relations[i] = i;

    std::vector<detail::QueryOutcome> outcomes;
    for (auto id : fold.test_ids) {
        const auto& rec = bag.record(id);
        const Triple t = rec.triple();
        for (Slot slot : {Slot::head, Slot::relation, Slot::tail}) {
            auto q = QueryPattern::for_slot(slot, t);
            uint32_t truth = slot == Slot::head ? t.head
                             : slot == Slot::relation ? t.rel
                                                      : t.tail;
            const auto& base = slot == Slot::relation ? all_relations : all_entities;

            std::vector<uint32_t> candidates = base;
            auto excluded = scorer.excluded_candidates(q);
            if (!excluded.empty()) {
                std::vector<bool> drop(base.size(), false);
                for (auto e : excluded)
                    if (e < drop.size() && e != truth) drop[e] = true;
                candidates.clear();
                for (auto c : base)
                    if (!drop[c]) candidates.push_back(c);
            }

            auto scores = scorer.score_candidates(q, candidates);
            detail::QueryOutcome o;
            o.rel = t.rel;
            o.slot = slot;
            o.inferred = competition_rank(candidates, scores, truth);
            o.ground_truth = 1;
            if (pair_metrics) {
                auto gt = ground_truth_ranks(full_bag, q, candidates);
                for (size_t i = 0; i < candidates.size(); ++i)
                    if (candidates[i] == truth) {
                        o.ground_truth = gt[i];
                        break;
                    }
            }
            outcomes.push_back(o);
        }
    }

    RankingReport report;
    report.protocol = fold.protocol;
    report.fold = fold.fold_index;

    // Group keys: each relation alone plus "*" pooling all, crossed with each
    // slot alone plus "*" pooling all.
    auto group_value = [&](const std::string& rel_key, const std::string& slot_key) {
        std::vector<RankPair> pairs;
        std::vector<uint32_t> ranks;
        for (const auto& o : outcomes) {
            if (rel_key != "*" && vocab.relation(o.rel) != rel_key) continue;
            if (slot_key != "*" && to_string(o.slot) != slot_key) continue;
            pairs.push_back({o.ground_truth, o.inferred});
            ranks.push_back(o.inferred);
        }
        if (ranks.empty()) return;
        auto add = [&](const std::string& metric, double value) {
            report.cells.push_back({rel_key, slot_key, metric, value, ranks.size(),
                                    fold.fold_index});
        };
        if (pair_metrics) {
            add("mrr_star", mrr_star(pairs));
            add("hits5_star", hits_at_5_star(pairs));
        }
        add("mrr", mrr(ranks));
        add("hits@" + std::to_string(opts.hits_k), hits_at_k(ranks, opts.hits_k));
    };

    std::vector<std::string> rel_keys = {"*"};
    for (const auto& r : vocab.relations()) rel_keys.push_back(r);
    for (const auto& rk : rel_keys)
        for (const char* sk : {"*", "head", "relation", "tail"}) group_value(rk, sk);
    return report;
}

// CSV layout: optional `# manifest=<hash>` origin comment, a header row,
// then one row per cell. Numbers print with %.12g so identical reports are
// byte-identical.
inline void write_report_csv(const RankingReport& report, std::ostream& out,
                             const std::string& manifest_hash = {}) {
    if (!manifest_hash.empty()) out << "# manifest=" << manifest_hash << "\n";
    out << "relation,slot,metric,value,n,fold\n";
    for (const auto& c : report.cells)
        out << c.relation << ',' << c.slot << ',' << c.metric << ','
            << detail::format_value(c.value) << ',' << c.n << ',' << c.fold << "\n";
}

inline std::vector<MetricCell> read_report_cells(std::istream& in) {
    std::vector<MetricCell> cells;
    std::string line;
    size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "relation,slot,metric,value,n,fold")
                throw ParseError("expected report header row, got '" + line + "'", lineno);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        size_t start = 0;
        for (size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        if (fields.size() != 6)
            throw ParseError("expected 6 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        MetricCell c;
        c.relation = fields[0];
        c.slot = fields[1];
        c.metric = fields[2];
        try {
            c.value = std::stod(fields[3]);
            c.n = std::stoull(fields[4]);
            c.fold = static_cast<uint32_t>(std::stoul(fields[5]));
        } catch (const std::exception&) {
            throw ParseError("bad numeric field in report row '" + line + "'", lineno);
        }
        cells.push_back(std::move(c));
    }
    if (!header_seen) throw ParseError("report has no header row");
    return cells;
}

inline std::vector<MetricCell> read_report_cells_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return read_report_cells(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace rcse
