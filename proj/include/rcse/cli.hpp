#pragma once

#include "rcse/baselines.hpp"
#include "rcse/config.hpp"
#include "rcse/dataset_gen.hpp"
#include "rcse/error.hpp"
#include "rcse/evaluator.hpp"
#include "rcse/model.hpp"
#include "rcse/rng.hpp"
#include "rcse/splits.hpp"
#include "rcse/stats.hpp"
#include "rcse/trainer.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rcse::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

using nlohmann::json;

inline std::string hex_u64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for hashing");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    return "fnv1a64:" + hex_u64(fnv1a64_bytes(bytes.data(), bytes.size()));
}

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create output directory '" + path + "': " + ec.message());
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

// Writes <out_dir>/manifest.json before any result file and returns the
// manifest hash that result CSVs embed in their comment line. The manifest
// captures everything the run depends on — input content hashes, seed,
// effective parameters — so identical manifests imply identical outputs.
inline std::string write_manifest(const std::string& out_dir, const std::string& subcommand,
                                  uint64_t seed, const std::string& config_path,
                                  const std::vector<std::pair<std::string, std::string>>& inputs,
                                  const json& params) {
    json j;
    j["subcommand"] = subcommand;
    j["tool_version"] = kVersion;
    j["seed"] = seed;
    j["config"] = config_path;
    j["output_dir"] = out_dir;
    json in = json::object();
    for (const auto& [label, path] : inputs)
        in[label] = {{"path", path}, {"hash", hash_file(path)}};
    j["inputs"] = in;
    j["params"] = params;

    const std::string text = j.dump(2) + "\n";
    const std::string hash = "fnv1a64:" + hex_u64(fnv1a64(text));
    auto out = open_out(out_dir + "/manifest.json");
    out << text;
    if (!out) throw IoError("write to '" + out_dir + "/manifest.json' failed");
    return hash;
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == ',') {
            if (i > start) out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    return out;
}

} // namespace detail

// ---- gen -----------------------------------------------------------------

struct GenArgs {
    std::string out_dir, config_path;
    uint64_t seed = 0;
    double dispersion = 0, concentration = 0;
    uint64_t rooms = 0;
    uint64_t pref_seed = 0;
    uint64_t vector_dim = 12;
    bool seed_set = false, dispersion_set = false, concentration_set = false,
         rooms_set = false, pref_seed_set = false;
};

inline int run_gen(const GenArgs& a) {
    GenParams p;
    if (!a.config_path.empty()) p = genparams_from(parse_key_values_file(a.config_path), p);
    if (a.seed_set) p.seed = a.seed;
    if (a.dispersion_set) p.dispersion = a.dispersion;
    if (a.concentration_set) p.concentration = a.concentration;
    if (a.rooms_set)
        for (auto& e : p.env) e.num_rooms = a.rooms;
    if (a.pref_seed_set) p.pref_seed = a.pref_seed;

    detail::ensure_dir(a.out_dir);
    detail::json params;
    {
        std::ostringstream eff;
        write_genparams(p, eff);
        params["genparams"] = eff.str();
        params["vector_dim"] = a.vector_dim;
    }
    std::vector<std::pair<std::string, std::string>> inputs;
    if (!a.config_path.empty()) inputs.emplace_back("config", a.config_path);
    const std::string manifest =
        detail::write_manifest(a.out_dir, "gen", p.seed, a.config_path, inputs, params);

    auto generated = generate_corpus(p);
    const auto& corpus = generated.corpus;
    write_triples_file(corpus.bag, corpus.vocab, a.out_dir + "/triples.tsv");
    write_entity_types_file(corpus.vocab, a.out_dir + "/entity_types.tsv");
    {
        auto out = detail::open_out(a.out_dir + "/genparams.txt");
        write_genparams(p, out);
    }
    {
        auto out = detail::open_out(a.out_dir + "/word_vectors.txt");
        write_toy_vectors(corpus.vocab, out, a.vector_dim, p.seed);
    }
    {
        auto out = detail::open_out(a.out_dir + "/stats.csv");
        out << "# manifest=" << manifest << "\n";
        write_stats_csv(corpus_stats(corpus.bag, corpus.vocab), out);
    }
    std::cout << "gen: " << corpus.bag.size() << " observations of "
              << corpus.bag.num_unique_triples() << " unique triples, "
              << corpus.vocab.num_entities() << " entities -> " << a.out_dir << "\n";
    return 0;
}

// ---- split ---------------------------------------------------------------

struct SplitArgs {
    std::string triples, types, out_dir, protocol;
    std::string target_triples, target_types;
    std::string relations = "atLocation";
    uint64_t folds = 5;
    uint64_t seed = 0;
    uint64_t train_rooms = 0; // 0 = use every remaining room
};

inline int run_split(const SplitArgs& a) {
    auto parsed_protocol = parse_protocol(a.protocol);
    if (!parsed_protocol)
        throw ConfigError("protocol must be triple_gen, env_gen or domain_transfer, got '" +
                          a.protocol + "'");
    const Protocol protocol = *parsed_protocol;
    Corpus corpus = load_corpus(a.triples, a.types);

    detail::ensure_dir(a.out_dir);
    std::vector<std::pair<std::string, std::string>> inputs = {{"triples", a.triples}};
    if (!a.types.empty()) inputs.emplace_back("types", a.types);
    if (!a.target_triples.empty()) inputs.emplace_back("target_triples", a.target_triples);
    if (!a.target_types.empty()) inputs.emplace_back("target_types", a.target_types);
    detail::json params = {{"protocol", a.protocol},
                           {"folds", a.folds},
                           {"train_rooms", a.train_rooms},
                           {"relations", a.relations}};
    const std::string manifest =
        detail::write_manifest(a.out_dir, "split", a.seed, "", inputs, params);
    (void)manifest; // fold files carry their own protocol headers

    if (protocol == Protocol::domain_transfer) {
        if (a.target_triples.empty())
            throw ConfigError("domain_transfer needs --target-triples");
        Corpus target = load_corpus(a.target_triples, a.target_types);
        auto split =
            make_domain_transfer_split(corpus, target, detail::split_commas(a.relations));
        write_triples_file(split.merged.bag, split.merged.vocab,
                           a.out_dir + "/merged_triples.tsv");
        write_entity_types_file(split.merged.vocab, a.out_dir + "/merged_types.tsv");
        write_fold_file(split.fold, a.out_dir + "/fold_0.tsv");
        {
            auto out = detail::open_out(a.out_dir + "/transfer_report.txt");
            out << "kept=" << split.report.kept << "\n"
                << "outside_filter=" << split.report.outside_filter << "\n"
                << "dropped_oov=" << split.report.dropped_oov << "\n";
        }
        std::cout << "split: domain_transfer kept " << split.report.kept
                  << " target records (" << split.report.outside_filter
                  << " outside filter, " << split.report.dropped_oov << " out of vocabulary) -> "
                  << a.out_dir << "\n";
        return 0;
    }

    std::vector<FoldSpec> folds;
    if (protocol == Protocol::triple_gen) {
        folds = make_triple_gen_folds(corpus.bag, static_cast<uint32_t>(a.folds), a.seed);
    } else {
        std::optional<uint32_t> train_rooms;
        if (a.train_rooms > 0) train_rooms = static_cast<uint32_t>(a.train_rooms);
        folds = make_env_gen_folds(corpus.bag, static_cast<uint32_t>(a.folds), a.seed,
                                   train_rooms);
    }
    for (size_t i = 0; i < folds.size(); ++i)
        write_fold_file(folds[i], a.out_dir + "/fold_" + std::to_string(i) + ".tsv");
    std::cout << "split: " << folds.size() << " " << a.protocol << " folds -> " << a.out_dir
              << "\n";
    return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
    std::string triples, types, fold, out_dir, config_path;
    uint64_t dim = 0, batch = 0, epochs = 0, neg_ratio = 0, patience = 0, seed = 0;
    double lr = 0;
    double weight_decay = 0;
    std::string optimizer, block_form;
    bool filter_negatives = true;
    bool type_matched = false;
    bool dim_set = false, batch_set = false, epochs_set = false, neg_ratio_set = false,
         patience_set = false, seed_set = false, lr_set = false, filter_set = false,
         wd_set = false, type_matched_set = false;
};

inline int run_train(const TrainArgs& a) {
    Corpus corpus = load_corpus(a.triples, a.types);
    FoldSpec fold = read_fold_file(a.fold);

    TrainConfig cfg;
    if (!a.config_path.empty())
        cfg = train_config_from(parse_key_values_file(a.config_path), cfg);
    if (a.dim_set) cfg.d = a.dim;
    if (a.lr_set) cfg.learning_rate = a.lr;
    if (a.batch_set) cfg.batch_size = a.batch;
    if (a.epochs_set) cfg.max_epochs = a.epochs;
    if (a.neg_ratio_set) cfg.negative_ratio = static_cast<uint32_t>(a.neg_ratio);
    if (a.patience_set) cfg.patience = a.patience;
    if (a.seed_set) cfg.seed = a.seed;
    if (a.filter_set) cfg.filter_negatives = a.filter_negatives;
    if (a.wd_set) cfg.weight_decay = a.weight_decay;
    if (a.type_matched_set) cfg.type_matched_negatives = a.type_matched;
    if (!a.optimizer.empty()) cfg = train_config_from({{"optimizer", a.optimizer}}, cfg);
    if (!a.block_form.empty()) cfg = train_config_from({{"block_form", a.block_form}}, cfg);

    detail::ensure_dir(a.out_dir);
    std::vector<std::pair<std::string, std::string>> inputs = {{"triples", a.triples},
                                                               {"fold", a.fold}};
    if (!a.types.empty()) inputs.emplace_back("types", a.types);
    if (!a.config_path.empty()) inputs.emplace_back("config", a.config_path);
    detail::json params = {{"dim", cfg.d},
                           {"learning_rate", cfg.learning_rate},
                           {"batch_size", cfg.batch_size},
                           {"max_epochs", cfg.max_epochs},
                           {"negative_ratio", cfg.negative_ratio},
                           {"patience", cfg.patience},
                           {"optimizer", to_string(cfg.optimizer)},
                           {"block_form",
                            cfg.block_form == BlockForm::diagonal ? "diagonal" : "full"},
                           {"filter_negatives", cfg.filter_negatives},
                           {"weight_decay", cfg.weight_decay},
                           {"type_matched_negatives", cfg.type_matched_negatives}};
    const std::string manifest =
        detail::write_manifest(a.out_dir, "train", cfg.seed, a.config_path, inputs, params);

    TripleBag train_bag = corpus.bag.subset(fold.train_ids);
    auto val = triples_of(corpus.bag, fold.val_ids);
    auto result = train(cfg, train_bag, corpus.vocab, val);

    save_checkpoint_file(result.model, corpus.vocab, a.out_dir + "/model.ckpt");
    {
        auto out = detail::open_out(a.out_dir + "/history.csv");
        out << "# manifest=" << manifest << "\n";
        write_history_csv(result.history, out);
    }
    const auto& epochs = result.history.epochs;
    double wall = 0.0;
    for (const auto& e : epochs) wall += e.seconds;
    std::cout << "train: " << epochs.size() << " epochs (best "
              << result.history.best_epoch << "), final loss "
              << detail::format_value(epochs.back().loss) << ", best val mrr "
              << detail::format_value(epochs[result.history.best_epoch].val_mrr) << ", "
              << detail::format_value(wall) << "s -> " << a.out_dir << "\n";
    return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
    std::string triples, types, fold, checkpoint, out_dir;
    uint64_t hits_k = 5;
    bool raw = false; // rank over every candidate instead of the filtered set
    std::vector<std::string> compare; // name=report.csv, repeatable
    std::string metric = "mrr", relation = "*", slot = "*";
};

inline int run_eval_compare(const EvalArgs& a) {
    // group fold-level metric values by scorer name, then test each pair
    std::map<std::string, std::vector<double>> groups;
    std::vector<std::pair<std::string, std::string>> inputs;
    size_t index = 0;
    for (const auto& entry : a.compare) {
        auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
            throw ConfigError("--compare wants name=report.csv, got '" + entry + "'");
        const std::string name = entry.substr(0, eq);
        const std::string path = entry.substr(eq + 1);
        auto cells = read_report_cells_file(path);
        bool found = false;
        for (const auto& c : cells)
            if (c.relation == a.relation && c.slot == a.slot && c.metric == a.metric) {
                groups[name].push_back(c.value);
                found = true;
                break;
            }
        if (!found)
            throw MetricError(path + " has no (" + a.relation + ", " + a.slot + ", " +
                              a.metric + ") cell");
        inputs.emplace_back("compare_" + std::to_string(index++), path);
    }
    if (groups.size() < 2)
        throw ConfigError("significance testing needs reports from >= 2 scorer names");

    detail::ensure_dir(a.out_dir);
    detail::json params = {{"metric", a.metric},
                           {"relation", a.relation},
                           {"slot", a.slot},
                           {"mode", "compare"}};
    const std::string manifest =
        detail::write_manifest(a.out_dir, "eval", 0, "", inputs, params);

    auto out = detail::open_out(a.out_dir + "/significance.csv");
    out << "# manifest=" << manifest << "\n";
    out << "metric,relation,slot,group_a,group_b,n_a,n_b,u,p_value\n";
    for (auto ia = groups.begin(); ia != groups.end(); ++ia)
        for (auto ib = std::next(ia); ib != groups.end(); ++ib) {
            auto mwu = mann_whitney_u(ia->second, ib->second);
            out << a.metric << ',' << a.relation << ',' << a.slot << ',' << ia->first << ','
                << ib->first << ',' << ia->second.size() << ',' << ib->second.size() << ','
                << detail::format_value(mwu.u) << ',' << detail::format_value(mwu.p) << "\n";
            std::cout << "compare: " << ia->first << " vs " << ib->first << " on " << a.metric
                      << " p=" << detail::format_value(mwu.p) << "\n";
        }
    return 0;
}

inline int run_eval(const EvalArgs& a) {
    if (!a.compare.empty()) return run_eval_compare(a);
    if (a.triples.empty() || a.fold.empty() || a.checkpoint.empty())
        throw ConfigError("eval needs --triples, --fold and --checkpoint (or --compare)");

    Corpus corpus = load_corpus(a.triples, a.types);
    FoldSpec fold = read_fold_file(a.fold);
    auto ckpt = load_checkpoint_file(a.checkpoint);
    if (ckpt.vocab.fingerprint() != corpus.vocab.fingerprint())
        throw ConfigError("checkpoint vocabulary does not match the corpus (different "
                          "symbols or order)");

    detail::ensure_dir(a.out_dir);
    std::vector<std::pair<std::string, std::string>> inputs = {
        {"triples", a.triples}, {"fold", a.fold}, {"checkpoint", a.checkpoint}};
    if (!a.types.empty()) inputs.emplace_back("types", a.types);
    detail::json params = {{"hits_k", a.hits_k}, {"raw", a.raw}};
    const std::string manifest =
        detail::write_manifest(a.out_dir, "eval", fold.seed, "", inputs, params);

    // Default protocol removes answers the training split already confirms
    // from every candidate list (never the queried truth); --raw keeps them.
    TripleBag train_bag = corpus.bag.subset(fold.train_ids);
    ModelScorer model_scorer(ckpt.model);
    FilteredScorer filtered(model_scorer, train_bag);
    const CompletionScorer& scorer =
        a.raw ? static_cast<const CompletionScorer&>(model_scorer) : filtered;
    EvalOptions opts;
    opts.hits_k = static_cast<uint32_t>(a.hits_k);
    auto report = evaluate(scorer, corpus.bag, fold, corpus.vocab, corpus.bag, opts);
    {
        auto out = detail::open_out(a.out_dir + "/report.csv");
        write_report_csv(report, out, manifest);
    }
    std::cout << "eval: fold " << fold.fold_index << " mrr "
              << detail::format_value(report.value("*", "*", "mrr")) << " -> " << a.out_dir
              << "\n";
    return 0;
}

// ---- query ---------------------------------------------------------------

struct QueryArgs {
    std::string checkpoint, head, relation, tail, out_dir;
    uint64_t top = 10;
    bool head_set = false, relation_set = false, tail_set = false;
};

inline int run_query(const QueryArgs& a) {
    const int fixed = int(a.head_set) + int(a.relation_set) + int(a.tail_set);
    if (fixed != 2)
        throw ConfigError("provide exactly two of --head/--relation/--tail; the missing "
                          "one is the slot to complete");
    auto ckpt = load_checkpoint_file(a.checkpoint);
    const Vocabulary& vocab = ckpt.vocab;

    QueryPattern q;
    if (!a.head_set) q.slot = Slot::head;
    else if (!a.relation_set) q.slot = Slot::relation;
    else q.slot = Slot::tail;
    if (a.head_set) q.head = vocab.entity_id(a.head);
    if (a.relation_set) q.rel = vocab.relation_id(a.relation);
    if (a.tail_set) q.tail = vocab.entity_id(a.tail);

    const size_t n = q.slot == Slot::relation ? vocab.num_relations() : vocab.num_entities();
    std::vector<uint32_t> candidates(n);
    for (uint32_t i = 0; i < n; ++i) candidates[i] = i;

    ModelScorer scorer(ckpt.model);
    auto ranked = rank_answers(scorer, q, candidates);
    const size_t limit = a.top == 0 ? ranked.size() : std::min<size_t>(a.top, ranked.size());

    std::ostringstream tsv;
    for (size_t i = 0; i < limit; ++i) {
        const std::string& symbol = q.slot == Slot::relation
                                        ? vocab.relation(ranked[i].first)
                                        : vocab.entity(ranked[i].first);
        tsv << (i + 1) << '\t' << symbol << '\t' << detail::format_value(ranked[i].second)
            << "\n";
    }
    std::cout << tsv.str();

    if (!a.out_dir.empty()) {
        detail::ensure_dir(a.out_dir);
        detail::json params = {{"slot", to_string(q.slot)},
                               {"head", a.head},
                               {"relation", a.relation},
                               {"tail", a.tail},
                               {"top", a.top}};
        detail::write_manifest(a.out_dir, "query", 0, "",
                               {{"checkpoint", a.checkpoint}}, params);
        auto out = detail::open_out(a.out_dir + "/answers.tsv");
        out << tsv.str();
    }
    return 0;
}

// ---- baseline ------------------------------------------------------------

struct BaselineArgs {
    std::string kind, triples, types, fold, out_dir, vectors;
    std::string aggregation = "mean", missing_tokens = "skip";
    uint64_t hits_k = 5;
    uint64_t type_size = 0;
    bool raw = false; // same candidate protocol switch as eval
};

inline int run_baseline(const BaselineArgs& a) {
    if (a.kind == "chance") {
        if (a.type_size == 0) throw ConfigError("chance baseline needs --type-size");
        const double hits = type_chance_bound(a.type_size, static_cast<uint32_t>(a.hits_k));
        const double mrr_u = expected_mrr_uniform(a.type_size);
        std::ostringstream csv;
        csv << "metric,value\n"
            << "hits@" << a.hits_k << "_chance," << detail::format_value(hits) << "\n"
            << "mrr_uniform," << detail::format_value(mrr_u) << "\n";
        if (!a.out_dir.empty()) {
            detail::ensure_dir(a.out_dir);
            detail::json params = {{"kind", "chance"},
                                   {"type_size", a.type_size},
                                   {"hits_k", a.hits_k}};
            const std::string manifest =
                detail::write_manifest(a.out_dir, "baseline", 0, "", {}, params);
            auto out = detail::open_out(a.out_dir + "/chance.csv");
            out << "# manifest=" << manifest << "\n" << csv.str();
        }
        std::cout << csv.str();
        return 0;
    }
    if (a.kind != "freq" && a.kind != "cosine")
        throw ConfigError("baseline kind must be freq, cosine or chance, got '" + a.kind +
                          "'");
    if (a.triples.empty() || a.fold.empty() || a.out_dir.empty())
        throw ConfigError("baseline " + a.kind + " needs --triples, --fold and --out");

    Corpus corpus = load_corpus(a.triples, a.types);
    FoldSpec fold = read_fold_file(a.fold);
    TripleBag train_bag = corpus.bag.subset(fold.train_ids);

    detail::ensure_dir(a.out_dir);
    std::vector<std::pair<std::string, std::string>> inputs = {{"triples", a.triples},
                                                               {"fold", a.fold}};
    if (!a.types.empty()) inputs.emplace_back("types", a.types);
    if (!a.vectors.empty()) inputs.emplace_back("vectors", a.vectors);
    detail::json params = {{"kind", a.kind},
                           {"hits_k", a.hits_k},
                           {"aggregation", a.aggregation},
                           {"missing_tokens", a.missing_tokens},
                           {"raw", a.raw}};
    const std::string manifest =
        detail::write_manifest(a.out_dir, "baseline", fold.seed, "", inputs, params);

    EvalOptions opts;
    opts.hits_k = static_cast<uint32_t>(a.hits_k);
    // Baselines rank under the same candidate protocol as eval so their
    // reports are comparable cell by cell.
    auto run = [&](const CompletionScorer& s) {
        FilteredScorer filtered(s, train_bag);
        const CompletionScorer& use =
            a.raw ? s : static_cast<const CompletionScorer&>(filtered);
        return evaluate(use, corpus.bag, fold, corpus.vocab, corpus.bag, opts);
    };
    RankingReport report;
    std::vector<std::string> extra_comments;
    if (a.kind == "freq") {
        FrequencyScorer scorer(train_bag);
        report = run(scorer);
    } else {
        if (a.vectors.empty()) throw ConfigError("cosine baseline needs --vectors");
        auto wv = StaticWordVectors::load_file(a.vectors);
        MissingTokenPolicy policy;
        if (a.missing_tokens == "skip") policy = MissingTokenPolicy::skip;
        else if (a.missing_tokens == "error") policy = MissingTokenPolicy::error;
        else throw ConfigError("--missing-tokens must be skip or error");
        CosineAggregation agg;
        if (a.aggregation == "mean") agg = CosineAggregation::mean;
        else if (a.aggregation == "max") agg = CosineAggregation::max;
        else throw ConfigError("--aggregation must be mean or max");
        CosineScorer scorer(wv, train_bag, corpus.vocab, policy, agg);
        report = run(scorer);
        if (scorer.empty_group_queries() > 0)
            extra_comments.push_back("# cosine_empty_group_queries=" +
                                     std::to_string(scorer.empty_group_queries()) +
                                     " (scored zero for every candidate)");
        if (scorer.missing_tokens() > 0)
            extra_comments.push_back("# cosine_missing_token_events=" +
                                     std::to_string(scorer.missing_tokens()));
    }
    {
        auto out = detail::open_out(a.out_dir + "/report.csv");
        out << "# manifest=" << manifest << "\n";
        for (const auto& line : extra_comments) out << line << "\n";
        write_report_csv(report, out);
    }
    for (const auto& line : extra_comments) std::cerr << "baseline: " << line.substr(2) << "\n";
    std::cout << "baseline: " << a.kind << " fold " << fold.fold_index << " mrr "
              << detail::format_value(report.value("*", "*", "mrr")) << " -> " << a.out_dir
              << "\n";
    return 0;
}

// ---- memsize -------------------------------------------------------------

struct MemsizeArgs {
    uint64_t entities = 0, relations = 0, dim = 0;
};

inline int run_memsize(const MemsizeArgs& a) {
    std::cout << memory_bytes(a.entities, a.relations, a.dim) << "\n";
    return 0;
}

// ---- driver --------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"Counted-triple knowledge-graph embeddings with ranking baselines"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded synthetic corpus");
    gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
    gen_cmd->add_option("--config", gen.config_path, "Generator key=value parameter file");
    auto* gen_seed = gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    auto* gen_disp =
        gen_cmd->add_option("--dispersion", gen.dispersion, "Relative spread of counts, [0,1)");
    auto* gen_conc = gen_cmd->add_option("--concentration", gen.concentration,
                                         "Dirichlet concentration of object preferences");
    auto* gen_rooms =
        gen_cmd->add_option("--rooms", gen.rooms, "Environments per type (all four types)");
    auto* gen_pref = gen_cmd->add_option(
        "--pref-seed", gen.pref_seed,
        "Separate seed for object preferences (share it across corpora to share semantics)");
    gen_cmd->add_option("--vector-dim", gen.vector_dim,
                        "Dimension of the emitted synthetic word vectors");

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split", "Build cross-validation folds");
    split_cmd->add_option("--triples", split.triples, "Corpus TSV")->required();
    split_cmd->add_option("--types", split.types, "Entity-type TSV");
    split_cmd->add_option("--out", split.out_dir, "Output directory")->required();
    split_cmd
        ->add_option("--protocol", split.protocol,
                     "triple_gen | env_gen | domain_transfer")
        ->required();
    split_cmd->add_option("--folds", split.folds, "Number of folds (default 5)");
    split_cmd->add_option("--seed", split.seed, "Fold assignment seed");
    split_cmd->add_option("--train-rooms", split.train_rooms,
                          "env_gen: cap training environments per type");
    split_cmd->add_option("--target-triples", split.target_triples,
                          "domain_transfer: target-domain corpus TSV");
    split_cmd->add_option("--target-types", split.target_types,
                          "domain_transfer: target-domain entity types");
    split_cmd->add_option("--relations", split.relations,
                          "domain_transfer: comma-separated relation filter");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train the embedding on a fold");
    train_cmd->add_option("--triples", train_args.triples, "Corpus TSV")->required();
    train_cmd->add_option("--types", train_args.types, "Entity-type TSV");
    train_cmd->add_option("--fold", train_args.fold, "Fold TSV from split")->required();
    train_cmd->add_option("--out", train_args.out_dir, "Output directory")->required();
    train_cmd->add_option("--config", train_args.config_path,
                          "Training key=value config (flags win over file keys)");
    auto* t_dim = train_cmd->add_option("--dim", train_args.dim, "Embedding dimension (even)");
    auto* t_lr = train_cmd->add_option("--lr", train_args.lr, "Learning rate");
    auto* t_batch = train_cmd->add_option("--batch", train_args.batch, "Minibatch size");
    auto* t_epochs = train_cmd->add_option("--epochs", train_args.epochs, "Maximum epochs");
    auto* t_ratio =
        train_cmd->add_option("--neg-ratio", train_args.neg_ratio, "Negatives per positive");
    auto* t_patience =
        train_cmd->add_option("--patience", train_args.patience, "Early-stopping patience");
    auto* t_seed = train_cmd->add_option("--seed", train_args.seed, "Training seed");
    train_cmd->add_option("--optimizer", train_args.optimizer, "sgd | adagrad");
    train_cmd->add_option("--block-form", train_args.block_form, "full | diagonal");
    auto* t_filter = train_cmd->add_option("--filter-negatives", train_args.filter_negatives,
                                           "Reject negatives present in the training bag");
    auto* t_wd = train_cmd->add_option("--weight-decay", train_args.weight_decay,
                                       "L2 pull toward zero on touched rows");
    auto* t_tm = train_cmd->add_option("--type-matched-negatives", train_args.type_matched,
                                       "Corrupt entities only within the slot's type");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a fold");
    eval_cmd->add_option("--triples", eval_args.triples, "Corpus TSV");
    eval_cmd->add_option("--types", eval_args.types, "Entity-type TSV");
    eval_cmd->add_option("--fold", eval_args.fold, "Fold TSV from split");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Model checkpoint");
    eval_cmd->add_option("--out", eval_args.out_dir, "Output directory")->required();
    eval_cmd->add_option("--hits-k", eval_args.hits_k, "Hits@K cutoff (default 5)");
    eval_cmd->add_flag("--raw", eval_args.raw,
                       "Keep train-confirmed answers in the candidate lists");
    eval_cmd->add_option("--compare", eval_args.compare,
                         "name=report.csv (repeat per fold and scorer) for significance "
                         "testing instead of evaluation");
    eval_cmd->add_option("--metric", eval_args.metric, "Compared metric (default mrr)");
    eval_cmd->add_option("--relation", eval_args.relation,
                         "Compared relation cell (default *)");
    eval_cmd->add_option("--slot", eval_args.slot, "Compared slot cell (default *)");

    QueryArgs query;
    auto* query_cmd = app.add_subcommand("query", "Rank completions for a partial triple");
    query_cmd->add_option("--checkpoint", query.checkpoint, "Model checkpoint")->required();
    auto* q_head = query_cmd->add_option("--head", query.head, "Fixed head entity");
    auto* q_rel = query_cmd->add_option("--relation", query.relation, "Fixed relation");
    auto* q_tail = query_cmd->add_option("--tail", query.tail, "Fixed tail entity");
    query_cmd->add_option("--top", query.top, "Answers to print, 0 = all (default 10)");
    query_cmd->add_option("--out", query.out_dir,
                          "Also write answers.tsv and a manifest here");

    BaselineArgs baseline;
    auto* base_cmd = app.add_subcommand("baseline", "Run a non-embedding scorer");
    base_cmd->add_option("--kind", baseline.kind, "freq | cosine | chance")->required();
    base_cmd->add_option("--triples", baseline.triples, "Corpus TSV");
    base_cmd->add_option("--types", baseline.types, "Entity-type TSV");
    base_cmd->add_option("--fold", baseline.fold, "Fold TSV from split");
    base_cmd->add_option("--out", baseline.out_dir, "Output directory");
    base_cmd->add_option("--vectors", baseline.vectors, "cosine: word-vector file");
    base_cmd->add_option("--aggregation", baseline.aggregation, "cosine: mean | max");
    base_cmd->add_option("--missing-tokens", baseline.missing_tokens,
                         "cosine: skip | error");
    base_cmd->add_option("--hits-k", baseline.hits_k, "Hits@K cutoff (default 5)");
    base_cmd->add_option("--type-size", baseline.type_size,
                         "chance: size of the answer type");
    base_cmd->add_flag("--raw", baseline.raw,
                       "Keep train-confirmed answers in the candidate lists");

    MemsizeArgs memsize;
    auto* mem_cmd = app.add_subcommand("memsize", "Embedding memory footprint in bytes");
    mem_cmd->add_option("--entities", memsize.entities, "Entity count")->required();
    mem_cmd->add_option("--relations", memsize.relations, "Relation count")->required();
    mem_cmd->add_option("--dim", memsize.dim, "Embedding dimension")->required();

    std::vector<const char*> argv;
    argv.push_back("rcse");
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen_cmd->parsed()) {
            gen.seed_set = gen_seed->count() > 0;
            gen.dispersion_set = gen_disp->count() > 0;
            gen.concentration_set = gen_conc->count() > 0;
            gen.rooms_set = gen_rooms->count() > 0;
            gen.pref_seed_set = gen_pref->count() > 0;
            return run_gen(gen);
        }
        if (split_cmd->parsed()) return run_split(split);
        if (train_cmd->parsed()) {
            train_args.dim_set = t_dim->count() > 0;
            train_args.lr_set = t_lr->count() > 0;
            train_args.batch_set = t_batch->count() > 0;
            train_args.epochs_set = t_epochs->count() > 0;
            train_args.neg_ratio_set = t_ratio->count() > 0;
            train_args.patience_set = t_patience->count() > 0;
            train_args.seed_set = t_seed->count() > 0;
            train_args.filter_set = t_filter->count() > 0;
            train_args.wd_set = t_wd->count() > 0;
            train_args.type_matched_set = t_tm->count() > 0;
            return run_train(train_args);
        }
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (query_cmd->parsed()) {
            query.head_set = q_head->count() > 0;
            query.relation_set = q_rel->count() > 0;
            query.tail_set = q_tail->count() > 0;
            return run_query(query);
        }
        if (base_cmd->parsed()) return run_baseline(baseline);
        if (mem_cmd->parsed()) return run_memsize(memsize);
    } catch (const Error& e) {
        std::cerr << "error[" << e.tag() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace rcse::cli
