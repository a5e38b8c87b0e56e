#pragma once

#include "rcse/error.hpp"
#include "rcse/model.hpp"
#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rcse {

struct NegativeSamplerConfig {
    uint32_t ratio = 9;
    // 0 means the default budget of 100 * ratio draw attempts per positive.
    uint64_t max_attempts = 0;
    // Closed-world filter: reject corruptions that appear in the training bag.
    bool filter = true;
    // Draw the replacement entity only from entities sharing the replaced
    // slot's type (ablation flag; plain uniform replacement by default).
    bool type_matched = false;
};

// Produces `ratio` corrupted copies of one positive: flip a fair coin for the
// head or tail slot, replace that entity with a uniform draw, keep the
// relation. A corruption is rejected when it equals the positive in the
// perturbed slot or (with filtering on) when the training bag has seen it.
// Runs of the same seed stream reproduce the same negatives.
inline std::vector<LabeledTriple> sample_negatives(const LabeledTriple& positive,
                                                   const TripleBag& train_bag,
                                                   const Vocabulary& vocab,
                                                   const NegativeSamplerConfig& cfg, Rng& rng) {
    if (cfg.ratio < 1) throw ConfigError("negative ratio must be >= 1");
    if (vocab.num_entities() < 2)
        throw ConfigError("negative sampling needs at least 2 entities");

    const uint64_t budget = cfg.max_attempts ? cfg.max_attempts : 100ULL * cfg.ratio;
    std::vector<EntityId> head_pool, tail_pool;
    if (cfg.type_matched) {
        head_pool = vocab.entities_of_type(vocab.entity_type(positive.head));
        tail_pool = vocab.entities_of_type(vocab.entity_type(positive.tail));
    }

    std::vector<LabeledTriple> out;
    out.reserve(cfg.ratio);
    uint64_t attempts = 0;
    while (out.size() < cfg.ratio) {
        if (attempts++ >= budget) {
            throw SamplingExhaustedError(
                "could not corrupt (" + vocab.entity(positive.head) + ", " +
                vocab.relation(positive.rel) + ", " + vocab.entity(positive.tail) + "): " +
                std::to_string(budget) + " attempts yielded " + std::to_string(out.size()) +
                " of " + std::to_string(cfg.ratio) + " negatives");
        }
        const bool corrupt_head = rng.coin();
        EntityId replacement;
        if (cfg.type_matched) {
            const auto& pool = corrupt_head ? head_pool : tail_pool;
            if (pool.size() < 2)
                throw SamplingExhaustedError("type-matched pool too small for (" +
                                             vocab.entity(positive.head) + ", " +
                                             vocab.relation(positive.rel) + ", " +
                                             vocab.entity(positive.tail) + ")");
            replacement = pool[rng.uniform_index(pool.size())];
        } else {
            replacement = static_cast<EntityId>(rng.uniform_index(vocab.num_entities()));
        }
        LabeledTriple neg = positive;
        neg.y = -1;
        if (corrupt_head) {
            if (replacement == positive.head) continue;
            neg.head = replacement;
        } else {
            if (replacement == positive.tail) continue;
            neg.tail = replacement;
        }
        if (cfg.filter && train_bag.contains(neg.head, neg.rel, neg.tail)) continue;
        out.push_back(neg);
    }
    return out;
}

// Seed-taking convenience wrapper with its own derived stream.
inline std::vector<LabeledTriple> sample_negatives(const LabeledTriple& positive,
                                                   const TripleBag& train_bag,
                                                   const Vocabulary& vocab,
                                                   const NegativeSamplerConfig& cfg,
                                                   uint64_t seed) {
    Rng rng(derive_seed(seed, "negatives", pack_triple(positive.head, positive.rel,
                                                       positive.tail)));
    return sample_negatives(positive, train_bag, vocab, cfg, rng);
}

} // namespace rcse
