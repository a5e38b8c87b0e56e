#pragma once

#include "rcse/error.hpp"
#include "rcse/evaluator.hpp"
#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace rcse {

// Pre-trained word vectors in the common text format: a `count dim` header
// line, then one `token v1 ... v_dim` row per token, space-separated.
class StaticWordVectors {
public:
    static StaticWordVectors load(std::istream& in) {
        StaticWordVectors out;
        std::string line;
        size_t lineno = 0;
        if (!std::getline(in, line)) throw ParseError("empty vector file");
        ++lineno;
        {
            std::istringstream hdr(line);
            long long count = 0, dim = 0;
            if (!(hdr >> count >> dim) || count < 0 || dim < 1)
                throw ParseError("expected 'count dim' header, got '" + line + "'", lineno);
            out.dim_ = static_cast<size_t>(dim);
            out.declared_count_ = static_cast<size_t>(count);
        }
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string token;
            row >> token;
            if (token.empty()) throw ParseError("missing token", lineno);
            std::vector<double> vec(out.dim_);
            double norm_sq = 0.0;
            for (size_t j = 0; j < out.dim_; ++j) {
                if (!(row >> vec[j]))
                    throw ParseError("token '" + token + "' has fewer than " +
                                         std::to_string(out.dim_) + " values",
                                     lineno);
                norm_sq += vec[j] * vec[j];
            }
            double extra;
            if (row >> extra)
                throw ParseError("token '" + token + "' has more than " +
                                     std::to_string(out.dim_) + " values",
                                 lineno);
            if (norm_sq == 0.0)
                throw ParseError("token '" + token + "' has a zero vector (unusable for "
                                 "cosine)",
                                 lineno);
            if (!out.vecs_.emplace(token, std::move(vec)).second)
                throw ParseError("duplicate token '" + token + "'", lineno);
        }
        if (out.vecs_.size() != out.declared_count_)
            throw ParseError("header declares " + std::to_string(out.declared_count_) +
                             " tokens, file has " + std::to_string(out.vecs_.size()));
        return out;
    }

    static StaticWordVectors load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open '" + path + "' for reading");
        try {
            return load(in);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what());
        }
    }

    bool has(const std::string& token) const { return vecs_.count(token) > 0; }

    const std::vector<double>& vector(const std::string& token) const {
        auto it = vecs_.find(token);
        if (it == vecs_.end())
            throw UnknownSymbolError("no word vector for token '" + token + "'");
        return it->second;
    }

    size_t dim() const { return dim_; }
    size_t size() const { return vecs_.size(); }

private:
    size_t dim_ = 0;
    size_t declared_count_ = 0;
    std::unordered_map<std::string, std::vector<double>> vecs_;
};

// Memorization baseline: a candidate's score is the training-set count of the
// completed triple. No generalization by construction — unseen pairs score
// zero everywhere.
class FrequencyScorer : public CompletionScorer {
public:
    explicit FrequencyScorer(const TripleBag& train_bag) : train_bag_(train_bag) {}

    std::vector<double> score_candidates(const QueryPattern& q,
                                         const std::vector<uint32_t>& candidates) const override {
        std::vector<double> out;
        out.reserve(candidates.size());
        for (auto c : candidates)
            out.push_back(static_cast<double>(answer_count(train_bag_, q, c)));
        return out;
    }

private:
    const TripleBag& train_bag_;
};

inline std::vector<std::pair<uint32_t, double>> freq_complete(
    const FrequencyScorer& scorer, const QueryPattern& q,
    const std::vector<uint32_t>& candidates) {
    return rank_answers(scorer, q, candidates);
}

enum class MissingTokenPolicy { skip, error };
enum class CosineAggregation { mean, max };

// Word-vector baseline: collect the training answers for the query's fixed
// pair (the comparison group C), then score each candidate by cosine
// similarity to C — against the mean vector of C by default, or the best
// single member under max aggregation. Members of C are reported as excluded
// candidates per the evaluator contract. An empty C falls back to all-zero
// scores; the fallback and any skipped missing tokens are counted for
// reporting.
class CosineScorer : public CompletionScorer {
public:
    CosineScorer(const StaticWordVectors& vectors, const TripleBag& train_bag,
                 const Vocabulary& vocab,
                 MissingTokenPolicy missing = MissingTokenPolicy::skip,
                 CosineAggregation aggregation = CosineAggregation::mean)
        : vectors_(vectors),
          train_bag_(train_bag),
          vocab_(vocab),
          missing_(missing),
          aggregation_(aggregation) {}

    std::vector<double> score_candidates(const QueryPattern& q,
                                         const std::vector<uint32_t>& candidates) const override {
        auto group = comparison_group(q);
        std::vector<const std::vector<double>*> member_vecs;
        for (auto id : group) {
            const std::string& token = token_of(q, id);
            if (!vectors_.has(token)) {
                if (missing_ == MissingTokenPolicy::error)
                    throw UnknownSymbolError("no word vector for token '" + token + "'");
                ++missing_tokens_;
                continue;
            }
            member_vecs.push_back(&vectors_.vector(token));
        }

        std::vector<double> out(candidates.size(), 0.0);
        if (member_vecs.empty()) {
            ++empty_group_queries_;
            return out;
        }

        std::vector<double> mean(vectors_.dim(), 0.0);
        if (aggregation_ == CosineAggregation::mean) {
            for (const auto* v : member_vecs)
                for (size_t j = 0; j < mean.size(); ++j) mean[j] += (*v)[j];
            for (auto& x : mean) x /= static_cast<double>(member_vecs.size());
        }

        for (size_t i = 0; i < candidates.size(); ++i) {
            const std::string& token = token_of(q, candidates[i]);
            if (!vectors_.has(token)) {
                if (missing_ == MissingTokenPolicy::error)
                    throw UnknownSymbolError("no word vector for token '" + token + "'");
                ++missing_tokens_;
                continue; // scores 0
            }
            const auto& cv = vectors_.vector(token);
            if (aggregation_ == CosineAggregation::mean) {
                out[i] = cosine(cv, mean);
            } else {
                double best = -2.0;
                for (const auto* v : member_vecs) best = std::max(best, cosine(cv, *v));
                out[i] = best;
            }
        }
        return out;
    }

    std::vector<uint32_t> excluded_candidates(const QueryPattern& q) const override {
        return comparison_group(q);
    }

    size_t empty_group_queries() const { return empty_group_queries_; }
    size_t missing_tokens() const { return missing_tokens_; }

private:
    std::vector<uint32_t> comparison_group(const QueryPattern& q) const {
        switch (q.slot) {
            case Slot::head: return train_bag_.heads_for(q.rel, q.tail);
            case Slot::relation: return train_bag_.relations_for(q.head, q.tail);
            case Slot::tail: return train_bag_.tails_for(q.head, q.rel);
        }
        return {};
    }

    const std::string& token_of(const QueryPattern& q, uint32_t id) const {
        return q.slot == Slot::relation ? vocab_.relation(id) : vocab_.entity(id);
    }

    static double cosine(const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (size_t j = 0; j < a.size(); ++j) {
            dot += a[j] * b[j];
            na += a[j] * a[j];
            nb += b[j] * b[j];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    }

    const StaticWordVectors& vectors_;
    const TripleBag& train_bag_;
    const Vocabulary& vocab_;
    MissingTokenPolicy missing_;
    CosineAggregation aggregation_;
    mutable size_t empty_group_queries_ = 0;
    mutable size_t missing_tokens_ = 0;
};

// Synthetic stand-in for pretrained word vectors, written in the standard
// text format. Each entity type (and the relation set) gets its own cluster
// axis; per-token deterministic noise comes from the token's hash, so output
// depends only on the vocabulary contents and seed. Same-type tokens are
// similar on average but individual pairs overlap across types — like real
// distributional vectors, the types are separable yet not cleanly, and there
// is no per-token co-occurrence structure. `noise` sets the overlap.
inline void write_toy_vectors(const Vocabulary& vocab, std::ostream& out, size_t dim = 12,
                              uint64_t seed = 0, double noise = 0.65) {
    if (dim < 6) throw ConfigError("toy vectors need dim >= 6 for the type clusters");
    if (noise < 0) throw ConfigError("toy vector noise must be >= 0");
    auto emit = [&](const std::string& token, size_t cluster) {
        Rng rng(derive_seed(seed, "wordvec", fnv1a64(token)));
        out << token;
        for (size_t j = 0; j < dim; ++j) {
            double x = (j == cluster ? 1.0 : 0.0) + noise * (2.0 * rng.uniform() - 1.0);
            char buf[64];
            std::snprintf(buf, sizeof(buf), " %.12g", x);
            out << buf;
        }
        out << "\n";
    };
    out << vocab.num_entities() + vocab.num_relations() << ' ' << dim << "\n";
    for (EntityId e = 0; e < vocab.num_entities(); ++e)
        emit(vocab.entity(e), static_cast<size_t>(vocab.entity_type(e)));
    for (RelationId r = 0; r < vocab.num_relations(); ++r) emit(vocab.relation(r), 4);
}

// Probability that uniform guessing within the answer's type puts the correct
// answer in the top k: min(1, k / type_size).
inline double type_chance_bound(size_t answer_type_size, uint32_t k) {
    if (answer_type_size < 1) throw ConfigError("type size must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    return std::min(1.0, static_cast<double>(k) / static_cast<double>(answer_type_size));
}

// Expected MRR of a uniform guesser over T candidates: the true answer's rank
// is uniform on 1..T, so E[1/rank] = H(T)/T with the harmonic number H.
inline double expected_mrr_uniform(size_t type_size) {
    if (type_size < 1) throw ConfigError("type size must be >= 1");
    double h = 0.0;
    for (size_t i = 1; i <= type_size; ++i) h += 1.0 / static_cast<double>(i);
    return h / static_cast<double>(type_size);
}

} // namespace rcse
