#pragma once

#include "rcse/config.hpp"
#include "rcse/error.hpp"
#include "rcse/rng.hpp"
#include "rcse/triples.hpp"
#include "rcse/vocab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rcse {

// Default symbol pools: 74 household objects + 9 rooms (the four environment
// types plus five distractor locations) + 17 materials + 17 affordances =
// 117 entities. The array sizes are compile-time checked.
namespace pools {

inline constexpr std::array<std::string_view, 74> kObjects = {
    "mug",        "cup",        "plate",       "bowl",        "fork",
    "knife",      "spoon",      "pan",         "pot",         "kettle",
    "toaster",    "microwave",  "fridge",      "oven",        "stove",
    "sink",       "dishwasher", "cabinet",     "counter",     "blender",
    "cuttingBoard", "trashCan", "soap",        "towel",       "toilet",
    "shower",     "bathtub",    "mirror",      "toothbrush",  "razor",
    "shampoo",    "toiletPaper", "scale",      "hairDryer",   "bed",
    "pillow",     "blanket",    "lamp",        "nightstand",  "dresser",
    "wardrobe",   "alarmClock", "book",        "laptop",      "television",
    "sofa",       "armchair",   "coffeeTable", "remote",      "gameConsole",
    "painting",   "plant",      "vase",        "rug",         "curtain",
    "shelf",      "desk",       "chair",       "stool",       "clock",
    "phone",      "tablet",     "keyboard",    "speaker",     "candle",
    "basket",     "ladder",     "broom",       "vacuum",      "iron",
    "fan",        "spatula",    "whisk",       "tray",
};

// The first four must match EnvType order: location triples of an
// environment point at its type's room entity.
inline constexpr std::array<std::string_view, 9> kRooms = {
    "bathroom", "bedroom", "kitchen", "livingroom", "garage",
    "office",   "hallway", "closet",  "basement",
};

inline constexpr std::array<std::string_view, 17> kMaterials = {
    "wood",   "metal",     "glass",  "fabric", "ceramic", "plastic",
    "leather", "stone",    "paper",  "rubber", "porcelain", "steel",
    "cotton", "marble",    "granite", "wax",   "brass",
};

inline constexpr std::array<std::string_view, 17> kAffordances = {
    "pickUp", "open",  "close", "turnOn", "turnOff", "fill",
    "empty",  "wash",  "cook",  "slice",  "toggle",  "push",
    "pull",   "throw", "dirty", "breakable", "useUp",
};

} // namespace pools

// Per-environment-type targets: median triple counts per environment, median
// distinct head entities per environment, and how many environments to
// generate.
struct EnvTypeParams {
    double median_location = 0;
    double median_material = 0;
    double median_affordance = 0;
    double median_entities = 0;
    size_t num_rooms = 30;
};

struct GenParams {
    std::array<EnvTypeParams, 4> env = {{
        {28.0, 21.0, 46.0, 18.0, 30},   // bathroom
        {28.5, 16.0, 54.5, 20.0, 30},   // bedroom
        {59.5, 51.0, 109.0, 27.0, 30},  // kitchen
        {22.5, 8.0, 37.0, 20.0, 30},    // livingroom
    }};
    size_t object_pool = pools::kObjects.size();
    size_t room_pool = pools::kRooms.size();
    size_t material_pool = pools::kMaterials.size();
    size_t affordance_pool = pools::kAffordances.size();
    double dispersion = 0.15;    // relative spread of per-env counts
    double concentration = 0.3;  // Dirichlet sharpness of object preferences
    // Objects draw their preferences as a blend of one of `archetypes` shared
    // latent profiles (weight archetype_strength) and an independent Dirichlet
    // draw. Archetypes give the corpus cross-object structure a learner can
    // exploit on unseen pairs; 0 makes every object fully idiosyncratic.
    size_t archetypes = 8;
    double archetype_strength = 0.7;
    uint64_t seed = 0;
    // When set, per-object preferences derive from this seed instead of `seed`,
    // so two corpora with different `seed` but equal `pref_seed` share object
    // semantics while drawing disjoint environments (a transfer-style pair).
    std::optional<uint64_t> pref_seed;
};

struct GeneratedCorpus {
    Corpus corpus; // vocabulary covers the full pools, including unobserved entities
    std::vector<std::pair<std::string, EntityType>> type_rows;
};

namespace detail {

inline std::string pool_name(const std::string_view* defaults, size_t default_count,
                             const char* synth_prefix, size_t i) {
    if (i < default_count) return std::string(defaults[i]);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_%03zu", synth_prefix, i);
    return buf;
}

// Count around `median` scaled by +-dispersion. With zero dispersion a
// half-integer median alternates floor/ceil across environments so the
// empirical midpoint median lands exactly on the target.
inline int64_t draw_count(double median, double dispersion, size_t env_index, Rng& rng) {
    if (dispersion <= 0.0) {
        double lo = std::floor(median);
        if (lo == median) return static_cast<int64_t>(median);
        return static_cast<int64_t>(env_index % 2 == 0 ? lo : std::ceil(median));
    }
    double v = median * (1.0 + dispersion * (2.0 * rng.uniform() - 1.0));
    return std::max<int64_t>(0, std::llround(v));
}

inline size_t sample_from(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0;
    double x = rng.uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (x < acc) return i;
    }
    return weights.size() - 1;
}

inline std::vector<uint32_t> weighted_sample_distinct(std::vector<double> weights, size_t n,
                                                      Rng& rng) {
    std::vector<uint32_t> out;
    n = std::min(n, weights.size());
    out.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        size_t pick = sample_from(weights, rng);
        if (weights[pick] <= 0.0) { // weight mass exhausted: take lowest unused
            pick = 0;
            while (pick < weights.size() && weights[pick] <= 0.0) ++pick;
            if (pick == weights.size()) break;
        }
        out.push_back(static_cast<uint32_t>(pick));
        weights[pick] = 0.0;
    }
    return out;
}

} // namespace detail

inline void validate(const GenParams& p) {
    if (p.dispersion < 0.0 || p.dispersion >= 1.0)
        throw ConfigError("dispersion must lie in [0, 1)");
    if (p.concentration <= 0.0) throw ConfigError("concentration must be positive");
    if (p.archetype_strength < 0.0 || p.archetype_strength > 1.0)
        throw ConfigError("archetype strength must lie in [0, 1]");
    if (p.room_pool < kEnvTypes.size())
        throw ConfigError("room pool must cover the " + std::to_string(kEnvTypes.size()) +
                          " environment types");
    if (p.object_pool < 1 || p.material_pool < 1 || p.affordance_pool < 1)
        throw ConfigError("entity pools must be non-empty");
    for (size_t t = 0; t < p.env.size(); ++t) {
        const auto& e = p.env[t];
        std::string name = to_string(kEnvTypes[t]);
        if (e.num_rooms == 0) continue; // type switched off entirely
        if (e.median_location <= 0 || e.median_material <= 0 || e.median_affordance <= 0 ||
            e.median_entities <= 0)
            throw ConfigError("medians for " + name + " must be positive");
        if (e.median_entities > static_cast<double>(p.object_pool))
            throw ConfigError("median entity count for " + name + " (" +
                              std::to_string(e.median_entities) +
                              ") exceeds the object pool (" + std::to_string(p.object_pool) +
                              ")");
    }
}

// Seeded synthetic corpus with per-environment counts drawn around the
// env-type medians. Every object carries stable latent preferences — which
// room types it frequents, which materials and affordances it exhibits — so
// observation counts are skewed and ground-truth ranks are informative.
inline GeneratedCorpus generate_corpus(const GenParams& p) {
    validate(p);

    GeneratedCorpus out;
    Vocabulary& vocab = out.corpus.vocab;
    auto declare = [&](size_t count, const std::string_view* defaults, size_t ndefault,
                       const char* synth, EntityType type) {
        std::vector<EntityId> ids;
        ids.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            std::string name = detail::pool_name(defaults, ndefault, synth, i);
            EntityId id = vocab.intern_entity(name);
            vocab.set_entity_type(id, type);
            out.type_rows.emplace_back(std::move(name), type);
            ids.push_back(id);
        }
        return ids;
    };
    auto objects = declare(p.object_pool, pools::kObjects.data(), pools::kObjects.size(),
                           "object", EntityType::object);
    auto rooms = declare(p.room_pool, pools::kRooms.data(), pools::kRooms.size(), "room",
                         EntityType::room);
    auto materials = declare(p.material_pool, pools::kMaterials.data(),
                             pools::kMaterials.size(), "material", EntityType::material);
    auto affordances = declare(p.affordance_pool, pools::kAffordances.data(),
                               pools::kAffordances.size(), "affordance",
                               EntityType::affordance);
    RelationId at_location = vocab.intern_relation("atLocation");
    RelationId has_material = vocab.intern_relation("hasMaterial");
    RelationId has_affordance = vocab.intern_relation("hasAffordance");

    // Latent per-object preference distributions, independent of environment
    // order so corpora with different room counts share object identities.
    // Each object blends one shared archetype profile with its own draw, which
    // couples an object's rooms, materials and affordances to its behavior
    // group and makes unseen pairs predictable from similar objects.
    const uint64_t pref_master = p.pref_seed.value_or(p.seed);
    std::vector<std::vector<double>> arch_room, arch_mat, arch_aff;
    for (size_t k = 0; k < p.archetypes; ++k) {
        Rng rng(derive_seed(pref_master, "archetype", k));
        arch_room.push_back(rng.dirichlet(kEnvTypes.size(), p.concentration));
        arch_mat.push_back(rng.dirichlet(p.material_pool, p.concentration));
        arch_aff.push_back(rng.dirichlet(p.affordance_pool, p.concentration));
    }
    std::vector<std::vector<double>> room_pref(p.object_pool), mat_pref(p.object_pool),
        aff_pref(p.object_pool);
    for (size_t i = 0; i < p.object_pool; ++i) {
        Rng rng(derive_seed(pref_master, "object-prefs", i));
        room_pref[i] = rng.dirichlet(kEnvTypes.size(), p.concentration);
        mat_pref[i] = rng.dirichlet(p.material_pool, p.concentration);
        aff_pref[i] = rng.dirichlet(p.affordance_pool, p.concentration);
        if (p.archetypes > 0 && p.archetype_strength > 0.0) {
            const size_t k = rng.uniform_index(p.archetypes);
            const double s = p.archetype_strength;
            auto blend = [&](std::vector<double>& own, const std::vector<double>& arch) {
                for (size_t j = 0; j < own.size(); ++j)
                    own[j] = s * arch[j] + (1.0 - s) * own[j];
            };
            blend(room_pref[i], arch_room[k]);
            blend(mat_pref[i], arch_mat[k]);
            blend(aff_pref[i], arch_aff[k]);
        }
    }

    std::vector<ObservationRecord> records;
    for (size_t t = 0; t < kEnvTypes.size(); ++t) {
        const auto& tp = p.env[t];
        const EnvType env_type = kEnvTypes[t];
        for (size_t e = 0; e < tp.num_rooms; ++e) {
            char env_buf[32];
            std::snprintf(env_buf, sizeof(env_buf), "%s_%03zu", to_string(env_type),
                          e);
            const std::string env_id = env_buf;
            Rng rng(derive_seed(p.seed, "env", t, e));

            const auto n_loc =
                static_cast<size_t>(detail::draw_count(tp.median_location, p.dispersion, e, rng));
            const auto n_mat =
                static_cast<size_t>(detail::draw_count(tp.median_material, p.dispersion, e, rng));
            const auto n_aff = static_cast<size_t>(
                detail::draw_count(tp.median_affordance, p.dispersion, e, rng));
            auto n_ent = static_cast<size_t>(
                detail::draw_count(tp.median_entities, p.dispersion, e, rng));
            n_ent = std::clamp<size_t>(n_ent, 1, p.object_pool);

            // objects present in this environment, drawn by room-type affinity
            std::vector<double> weights(p.object_pool);
            for (size_t i = 0; i < p.object_pool; ++i) weights[i] = room_pref[i][t];
            auto present = detail::weighted_sample_distinct(std::move(weights), n_ent, rng);

            auto push = [&](uint32_t obj_idx, RelationId rel, EntityId tail) {
                records.push_back(
                    {objects[obj_idx], rel, tail, env_type, env_id});
            };
            // location sightings: each present object at least once, extras uniform
            const EntityId room = rooms[t];
            for (size_t j = 0; j < std::min(n_loc, present.size()); ++j)
                push(present[j], at_location, room);
            for (size_t j = present.size(); j < n_loc; ++j)
                push(present[rng.uniform_index(present.size())], at_location, room);
            for (size_t j = 0; j < n_mat; ++j) {
                uint32_t obj = present[rng.uniform_index(present.size())];
                push(obj, has_material, materials[detail::sample_from(mat_pref[obj], rng)]);
            }
            for (size_t j = 0; j < n_aff; ++j) {
                uint32_t obj = present[rng.uniform_index(present.size())];
                push(obj, has_affordance,
                     affordances[detail::sample_from(aff_pref[obj], rng)]);
            }
        }
    }
    out.corpus.bag = TripleBag(std::move(records));
    return out;
}

// ---- empirical statistics ------------------------------------------------

struct EnvTypeStats {
    double location = 0, material = 0, affordance = 0, entities = 0;
    size_t rooms = 0;
};

struct CorpusStats {
    std::array<EnvTypeStats, 4> per_type; // EnvType order
    EnvTypeStats all;
};

namespace detail {

inline double midpoint_median(std::vector<int64_t> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    if (n % 2 == 1) return static_cast<double>(xs[n / 2]);
    return 0.5 * static_cast<double>(xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace detail

// Per-environment-type midpoint medians of the three relation counts and of
// the distinct head-entity count, plus a pooled "all" row.
inline CorpusStats corpus_stats(const TripleBag& bag, const Vocabulary& vocab) {
    auto rel_or_npos = [&](const char* name) -> uint32_t {
        auto id = vocab.find_relation(name);
        return id ? *id : UINT32_MAX;
    };
    const uint32_t at_location = rel_or_npos("atLocation");
    const uint32_t has_material = rel_or_npos("hasMaterial");
    const uint32_t has_affordance = rel_or_npos("hasAffordance");

    std::array<std::array<std::vector<int64_t>, 4>, 4> per; // [type][column]
    std::array<std::vector<int64_t>, 4> pooled;
    std::array<size_t, 4> room_counts = {0, 0, 0, 0};

    for (const auto& env_id : bag.env_ids()) {
        int64_t loc = 0, mat = 0, aff = 0;
        std::set<EntityId> heads;
        for (auto rid : bag.records_in_env(env_id)) {
            const auto& rec = bag.record(rid);
            heads.insert(rec.head);
            if (rec.rel == at_location) ++loc;
            else if (rec.rel == has_material) ++mat;
            else if (rec.rel == has_affordance) ++aff;
        }
        const auto t = static_cast<size_t>(bag.env_type_of(env_id));
        const int64_t ents = static_cast<int64_t>(heads.size());
        per[t][0].push_back(loc);
        per[t][1].push_back(mat);
        per[t][2].push_back(aff);
        per[t][3].push_back(ents);
        pooled[0].push_back(loc);
        pooled[1].push_back(mat);
        pooled[2].push_back(aff);
        pooled[3].push_back(ents);
        ++room_counts[t];
    }

    CorpusStats stats;
    for (size_t t = 0; t < 4; ++t) {
        stats.per_type[t].location = detail::midpoint_median(per[t][0]);
        stats.per_type[t].material = detail::midpoint_median(per[t][1]);
        stats.per_type[t].affordance = detail::midpoint_median(per[t][2]);
        stats.per_type[t].entities = detail::midpoint_median(per[t][3]);
        stats.per_type[t].rooms = room_counts[t];
    }
    stats.all.location = detail::midpoint_median(pooled[0]);
    stats.all.material = detail::midpoint_median(pooled[1]);
    stats.all.affordance = detail::midpoint_median(pooled[2]);
    stats.all.entities = detail::midpoint_median(pooled[3]);
    stats.all.rooms = room_counts[0] + room_counts[1] + room_counts[2] + room_counts[3];
    return stats;
}

inline void write_stats_csv(const CorpusStats& stats, std::ostream& out) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    out << "env_type,median_location,median_material,median_affordance,median_entities,"
           "rooms\n";
    for (size_t t = 0; t < 4; ++t) {
        const auto& s = stats.per_type[t];
        out << to_string(kEnvTypes[t]) << ',' << fmt(s.location) << ',' << fmt(s.material)
            << ',' << fmt(s.affordance) << ',' << fmt(s.entities) << ',' << s.rooms << "\n";
    }
    out << "all," << fmt(stats.all.location) << ',' << fmt(stats.all.material) << ','
        << fmt(stats.all.affordance) << ',' << fmt(stats.all.entities) << ','
        << stats.all.rooms << "\n";
}

// ---- parameter capture ---------------------------------------------------

// Round-trippable key=value capture of a generator invocation.
inline void write_genparams(const GenParams& p, std::ostream& out) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    out << "# corpus generator parameters\n";
    for (size_t t = 0; t < kEnvTypes.size(); ++t) {
        const char* name = to_string(kEnvTypes[t]);
        const auto& e = p.env[t];
        out << name << ".location=" << fmt(e.median_location) << "\n"
            << name << ".material=" << fmt(e.median_material) << "\n"
            << name << ".affordance=" << fmt(e.median_affordance) << "\n"
            << name << ".entities=" << fmt(e.median_entities) << "\n"
            << name << ".rooms=" << e.num_rooms << "\n";
    }
    out << "object_pool=" << p.object_pool << "\n"
        << "room_pool=" << p.room_pool << "\n"
        << "material_pool=" << p.material_pool << "\n"
        << "affordance_pool=" << p.affordance_pool << "\n"
        << "dispersion=" << fmt(p.dispersion) << "\n"
        << "concentration=" << fmt(p.concentration) << "\n"
        << "archetypes=" << p.archetypes << "\n"
        << "archetype_strength=" << fmt(p.archetype_strength) << "\n"
        << "seed=" << p.seed << "\n";
    if (p.pref_seed) out << "pref_seed=" << *p.pref_seed << "\n";
}

inline GenParams genparams_from(const KeyValueMap& kv, GenParams base = {}) {
    std::vector<std::string> known = {"object_pool", "room_pool",     "material_pool",
                                      "affordance_pool", "dispersion", "concentration",
                                      "seed", "pref_seed", "archetypes",
                                      "archetype_strength"};
    for (size_t t = 0; t < kEnvTypes.size(); ++t)
        for (const char* field : {".location", ".material", ".affordance", ".entities",
                                  ".rooms"})
            known.push_back(std::string(to_string(kEnvTypes[t])) + field);
    for (const auto& [key, value] : kv)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown generator config key '" + key + "'");

    for (size_t t = 0; t < kEnvTypes.size(); ++t) {
        std::string name = to_string(kEnvTypes[t]);
        auto& e = base.env[t];
        e.median_location = config_double(kv, name + ".location", e.median_location);
        e.median_material = config_double(kv, name + ".material", e.median_material);
        e.median_affordance = config_double(kv, name + ".affordance", e.median_affordance);
        e.median_entities = config_double(kv, name + ".entities", e.median_entities);
        e.num_rooms = config_u64(kv, name + ".rooms", e.num_rooms);
    }
    base.object_pool = config_u64(kv, "object_pool", base.object_pool);
    base.room_pool = config_u64(kv, "room_pool", base.room_pool);
    base.material_pool = config_u64(kv, "material_pool", base.material_pool);
    base.affordance_pool = config_u64(kv, "affordance_pool", base.affordance_pool);
    base.dispersion = config_double(kv, "dispersion", base.dispersion);
    base.concentration = config_double(kv, "concentration", base.concentration);
    base.archetypes = config_u64(kv, "archetypes", base.archetypes);
    base.archetype_strength =
        config_double(kv, "archetype_strength", base.archetype_strength);
    base.seed = config_u64(kv, "seed", base.seed);
    if (kv.count("pref_seed")) base.pref_seed = config_u64(kv, "pref_seed", 0);
    return base;
}

} // namespace rcse
