#pragma once

#include "rcse/config.hpp"
#include "rcse/error.hpp"
#include "rcse/evaluator.hpp"
#include "rcse/model.hpp"
#include "rcse/negatives.hpp"
#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace rcse {

enum class Optimizer { sgd, adagrad };

inline const char* to_string(Optimizer o) {
    return o == Optimizer::sgd ? "sgd" : "adagrad";
}

struct TrainConfig {
    size_t d = 100;
    double learning_rate = 0.1;
    size_t batch_size = 128;
    size_t max_epochs = 500;
    uint32_t negative_ratio = 9;
    size_t patience = 10;
    uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adagrad;
    bool filter_negatives = true;
    BlockForm block_form = BlockForm::full;
    uint64_t neg_max_attempts = 0; // 0 -> sampler default
    // L2 pull toward zero on every row a batch touches; 0 disables it.
    double weight_decay = 0.0;
    // Corrupt entities only within the replaced slot's type, which makes the
    // negatives hard (same-type distractors) instead of mostly type mismatches.
    bool type_matched_negatives = false;
};

// Builds a TrainConfig from key=value pairs (file or CLI assembled), on top
// of a base of defaults. Unknown keys are rejected to catch typos.
inline TrainConfig train_config_from(const KeyValueMap& kv, TrainConfig base = {}) {
    static const char* known[] = {"dim",        "learning_rate", "batch_size",
                                  "max_epochs", "negative_ratio", "patience",
                                  "seed",       "optimizer",      "filter_negatives",
                                  "block_form", "neg_max_attempts", "weight_decay",
                                  "type_matched_negatives"};
    for (const auto& [key, value] : kv) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown training config key '" + key + "'");
    }
    base.d = config_u64(kv, "dim", base.d);
    base.learning_rate = config_double(kv, "learning_rate", base.learning_rate);
    base.batch_size = config_u64(kv, "batch_size", base.batch_size);
    base.max_epochs = config_u64(kv, "max_epochs", base.max_epochs);
    base.negative_ratio = static_cast<uint32_t>(config_u64(kv, "negative_ratio",
                                                           base.negative_ratio));
    base.patience = config_u64(kv, "patience", base.patience);
    base.seed = config_u64(kv, "seed", base.seed);
    base.neg_max_attempts = config_u64(kv, "neg_max_attempts", base.neg_max_attempts);
    base.filter_negatives = config_bool(kv, "filter_negatives", base.filter_negatives);
    base.weight_decay = config_double(kv, "weight_decay", base.weight_decay);
    base.type_matched_negatives =
        config_bool(kv, "type_matched_negatives", base.type_matched_negatives);
    std::string opt = config_string(kv, "optimizer", to_string(base.optimizer));
    if (opt == "sgd")
        base.optimizer = Optimizer::sgd;
    else if (opt == "adagrad")
        base.optimizer = Optimizer::adagrad;
    else
        throw ConfigError("optimizer must be sgd or adagrad, got '" + opt + "'");
    std::string form = config_string(
        kv, "block_form", base.block_form == BlockForm::diagonal ? "diagonal" : "full");
    if (form == "full")
        base.block_form = BlockForm::full;
    else if (form == "diagonal")
        base.block_form = BlockForm::diagonal;
    else
        throw ConfigError("block_form must be full or diagonal, got '" + form + "'");
    return base;
}

struct EpochStats {
    double loss = 0.0;    // mean loss over all labeled examples of the epoch
    double val_mrr = 0.0; // 0 when no validation triples were given
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    size_t best_epoch = 0;
};

struct TrainResult {
    EmbeddingModel model;
    TrainHistory history;
};

// Per-parameter optimizer state. Adagrad keeps one squared-gradient
// accumulator per parameter and steps by lr * g / sqrt(accum + eps), so the
// very first step is close to lr * sign(g).
class OptimizerState {
public:
    OptimizerState(const EmbeddingModel& model, Optimizer kind, double learning_rate)
        : kind_(kind),
          lr_(learning_rate),
          accum_entities_(kind == Optimizer::adagrad ? model.entity_vecs().size() : 0, 0.0),
          accum_relations_(kind == Optimizer::adagrad ? model.relation_params().size() : 0,
                           0.0) {}

    void apply_row(EmbeddingModel& model, bool entity_row, uint32_t id, const double* g) {
        const size_t d = model.dim();
        double* row = entity_row ? model.entity_row(id) : model.relation_row(id);
        if (kind_ == Optimizer::sgd) {
            for (size_t j = 0; j < d; ++j) row[j] -= lr_ * g[j];
            return;
        }
        double* accum = (entity_row ? accum_entities_.data() : accum_relations_.data()) +
                        static_cast<size_t>(id) * d;
        for (size_t j = 0; j < d; ++j) {
            accum[j] += g[j] * g[j];
            row[j] -= lr_ * g[j] / std::sqrt(accum[j] + kEps);
        }
    }

    static constexpr double kEps = 1e-8;

private:
    Optimizer kind_;
    double lr_;
    std::vector<double> accum_entities_;
    std::vector<double> accum_relations_;
};

// One triple's update. Head is applied before tail; with head == tail the two
// contributions land sequentially on the same row.
inline void apply_update(EmbeddingModel& model, const SparseGradient& g, OptimizerState& opt) {
    opt.apply_row(model, true, g.head, g.d_head.data());
    opt.apply_row(model, true, g.tail, g.d_tail.data());
    opt.apply_row(model, false, g.rel, g.d_rel.data());
}

// Mean reciprocal rank of validation triples' true heads and tails against
// all entities — the early-stopping signal. No ground-truth-rank machinery;
// plain competition ranks.
inline double validation_mrr(const EmbeddingModel& model, const Vocabulary& vocab,
                             const std::vector<Triple>& val_triples) {
    ModelScorer scorer(model);
    std::vector<uint32_t> candidates(vocab.num_entities());
    for (uint32_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    std::vector<uint32_t> ranks;
    ranks.reserve(val_triples.size() * 2);
    for (const auto& t : val_triples) {
        for (Slot slot : {Slot::head, Slot::tail}) {
            auto q = QueryPattern::for_slot(slot, t);
            auto scores = scorer.score_candidates(q, candidates);
            uint32_t truth = slot == Slot::head ? t.head : t.tail;
            ranks.push_back(competition_rank(candidates, scores, truth));
        }
    }
    return mrr(ranks);
}

inline std::vector<Triple> triples_of(const TripleBag& bag, const std::vector<RecordId>& ids) {
    std::vector<Triple> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(bag.record(id).triple());
    return out;
}

// Minibatch SGD/Adagrad over the training records. Each epoch reshuffles the
// records and redraws negatives from epoch-derived seed streams, accumulates
// mean gradients per batch (over positives and negatives together), and
// applies them row-by-row in id order. Early stopping watches validation MRR
// with the configured patience and returns the parameters of the best epoch;
// without validation triples it runs all epochs and returns the final state.
inline TrainResult train(const TrainConfig& cfg, const TripleBag& train_bag,
                         const Vocabulary& vocab, const std::vector<Triple>& val_triples) {
    if (train_bag.empty()) throw ConfigError("training bag is empty");
    if (cfg.learning_rate < 0) throw ConfigError("learning rate must be >= 0");
    if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (cfg.negative_ratio < 1) throw ConfigError("negative ratio must be >= 1");
    if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (cfg.weight_decay < 0) throw ConfigError("weight decay must be >= 0");

    NegativeSamplerConfig neg_cfg;
    neg_cfg.ratio = cfg.negative_ratio;
    neg_cfg.filter = cfg.filter_negatives;
    neg_cfg.max_attempts = cfg.neg_max_attempts;
    neg_cfg.type_matched = cfg.type_matched_negatives;

    EmbeddingModel model = EmbeddingModel::init_random(vocab, cfg.d, cfg.seed, cfg.block_form);
    EmbeddingModel best_model = model;
    OptimizerState opt(model, cfg.optimizer, cfg.learning_rate);

    TrainHistory history;
    double best_mrr = -1.0;
    size_t best_epoch = 0;

    std::vector<RecordId> order(train_bag.size());
    for (RecordId i = 0; i < order.size(); ++i) order[i] = i;

    for (size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", epoch));
        deterministic_shuffle(order, shuffle_rng);
        Rng neg_rng(derive_seed(cfg.seed, "negatives", epoch));

        double loss_sum = 0.0;
        size_t loss_n = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(start + cfg.batch_size, order.size());
            std::map<uint32_t, std::vector<double>> ent_grad, rel_grad;
            size_t examples = 0;
            auto absorb = [&](const LabeledTriple& x) {
                loss_sum += model.loss(x);
                ++loss_n;
                ++examples;
                auto g = model.gradients(x);
                auto add = [&](std::map<uint32_t, std::vector<double>>& into, uint32_t id,
                               const std::vector<double>& vec) {
                    auto it = into.try_emplace(id, model.dim(), 0.0).first;
                    for (size_t j = 0; j < vec.size(); ++j) it->second[j] += vec[j];
                };
                add(ent_grad, g.head, g.d_head);
                add(ent_grad, g.tail, g.d_tail);
                add(rel_grad, g.rel, g.d_rel);
            };
            for (size_t i = start; i < end; ++i) {
                const auto& rec = train_bag.record(order[i]);
                LabeledTriple pos{rec.head, rec.rel, rec.tail, +1};
                absorb(pos);
                for (const auto& neg :
                     sample_negatives(pos, train_bag, vocab, neg_cfg, neg_rng))
                    absorb(neg);
            }
            const double scale = 1.0 / static_cast<double>(examples);
            for (auto& [id, vec] : ent_grad) {
                const double* row = model.entity_row(id);
                for (size_t j = 0; j < vec.size(); ++j)
                    vec[j] = vec[j] * scale + cfg.weight_decay * row[j];
                opt.apply_row(model, true, id, vec.data());
            }
            for (auto& [id, vec] : rel_grad) {
                const double* row = model.relation_row(id);
                for (size_t j = 0; j < vec.size(); ++j)
                    vec[j] = vec[j] * scale + cfg.weight_decay * row[j];
                opt.apply_row(model, false, id, vec.data());
            }
        }

        EpochStats stats;
        stats.loss = loss_sum / static_cast<double>(loss_n);
        if (!std::isfinite(stats.loss))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                  " (mean loss not finite, learning rate " +
                                  std::to_string(cfg.learning_rate) + ")");
        if (!val_triples.empty()) stats.val_mrr = validation_mrr(model, vocab, val_triples);
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.epochs.push_back(stats);

        if (!val_triples.empty()) {
            if (stats.val_mrr > best_mrr) {
                best_mrr = stats.val_mrr;
                best_epoch = epoch;
                best_model = model;
            } else if (epoch - best_epoch >= cfg.patience) {
                break;
            }
        } else {
            best_epoch = epoch;
        }
    }
    if (val_triples.empty()) best_model = model;
    history.best_epoch = best_epoch;
    return TrainResult{std::move(best_model), std::move(history)};
}

// History CSV: epoch,loss,val_mrr. Wall time stays out of the file so that
// identical runs produce identical bytes; callers can report EpochStats.seconds
// through channels that carry no reproducibility promise.
inline void write_history_csv(const TrainHistory& history, std::ostream& out) {
    out << "epoch,loss,val_mrr\n";
    for (size_t i = 0; i < history.epochs.size(); ++i) {
        const auto& e = history.epochs[i];
        out << i << ',' << detail::format_value(e.loss) << ','
            << detail::format_value(e.val_mrr) << "\n";
    }
}

} // namespace rcse
