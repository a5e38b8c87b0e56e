#pragma once

#include "rcse/error.hpp"
#include "rcse/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rcse {

using EntityId = uint32_t;
using RelationId = uint32_t;
using RecordId = uint32_t;

enum class EntityType : uint8_t { object, room, material, affordance };

inline const char* to_string(EntityType t) {
    switch (t) {
        case EntityType::object: return "object";
        case EntityType::room: return "room";
        case EntityType::material: return "material";
        case EntityType::affordance: return "affordance";
    }
    return "object";
}

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
    if (s == "object") return EntityType::object;
    if (s == "room") return EntityType::room;
    if (s == "material") return EntityType::material;
    if (s == "affordance") return EntityType::affordance;
    return std::nullopt;
}

// Symbol tables for entities and relations. Ids are dense 0-based indices in
// first-seen order; symbols are case-sensitive exact strings. Each entity
// carries one type tag; entities interned without an explicit tag default to
// `object` until a type table is applied.
class Vocabulary {
public:
    EntityId intern_entity(const std::string& symbol) {
        auto it = entity_ids_.find(symbol);
        if (it != entity_ids_.end()) return it->second;
        auto id = static_cast<EntityId>(entities_.size());
        entities_.push_back(symbol);
        entity_types_.push_back(EntityType::object);
        entity_ids_.emplace(symbol, id);
        return id;
    }

    RelationId intern_relation(const std::string& symbol) {
        auto it = relation_ids_.find(symbol);
        if (it != relation_ids_.end()) return it->second;
        auto id = static_cast<RelationId>(relations_.size());
        relations_.push_back(symbol);
        relation_ids_.emplace(symbol, id);
        return id;
    }

    std::optional<EntityId> find_entity(std::string_view symbol) const {
        auto it = entity_ids_.find(std::string(symbol));
        if (it == entity_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<RelationId> find_relation(std::string_view symbol) const {
        auto it = relation_ids_.find(std::string(symbol));
        if (it == relation_ids_.end()) return std::nullopt;
        return it->second;
    }

    EntityId entity_id(std::string_view symbol) const {
        auto id = find_entity(symbol);
        if (!id) throw UnknownSymbolError("unknown entity '" + std::string(symbol) + "'");
        return *id;
    }

    RelationId relation_id(std::string_view symbol) const {
        auto id = find_relation(symbol);
        if (!id) throw UnknownSymbolError("unknown relation '" + std::string(symbol) + "'");
        return *id;
    }

    const std::string& entity(EntityId id) const {
        if (id >= entities_.size())
            throw UnknownSymbolError("entity id " + std::to_string(id) + " out of range");
        return entities_[id];
    }

    const std::string& relation(RelationId id) const {
        if (id >= relations_.size())
            throw UnknownSymbolError("relation id " + std::to_string(id) + " out of range");
        return relations_[id];
    }

    void set_entity_type(EntityId id, EntityType t) {
        if (id >= entities_.size())
            throw UnknownSymbolError("entity id " + std::to_string(id) + " out of range");
        entity_types_[id] = t;
    }

    EntityType entity_type(EntityId id) const {
        if (id >= entities_.size())
            throw UnknownSymbolError("entity id " + std::to_string(id) + " out of range");
        return entity_types_[id];
    }

    size_t num_entities() const { return entities_.size(); }
    size_t num_relations() const { return relations_.size(); }

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& relations() const { return relations_; }

    std::vector<EntityId> entities_of_type(EntityType t) const {
        std::vector<EntityId> out;
        for (EntityId i = 0; i < entity_types_.size(); ++i)
            if (entity_types_[i] == t) out.push_back(i);
        return out;
    }

    // Hash over the symbol tables; binds trained parameters to the exact
    // vocabulary they were trained against.
    uint64_t fingerprint() const {
        uint64_t h = fnv1a64("rcse-vocab");
        for (const auto& e : entities_) {
            h = fnv1a64(e, h);
            h = fnv1a64("\x1f", h);
        }
        h = fnv1a64("\x1e", h);
        for (const auto& r : relations_) {
            h = fnv1a64(r, h);
            h = fnv1a64("\x1f", h);
        }
        return h;
    }

private:
    std::vector<std::string> entities_;
    std::vector<std::string> relations_;
    std::vector<EntityType> entity_types_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
};

} // namespace rcse
