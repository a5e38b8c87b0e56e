#pragma once

#include "rcse/error.hpp"
#include "rcse/rng.hpp"
#include "rcse/vocab.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace rcse {

// A triple with its supervision label: +1 for observed facts, -1 for sampled
// negatives.
struct LabeledTriple {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;
    int y = +1;

    friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

// log(1 + e^x) without overflow for large |x|.
inline double softplus(double x) {
    double m = x > 0.0 ? x : 0.0;
    return m + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// Gradient of one triple's loss; touches exactly the head row, tail row, and
// relation row. When head == tail the two entity blocks refer to the same row
// and must be accumulated, not assigned.
struct SparseGradient {
    EntityId head = 0;
    RelationId rel = 0;
    EntityId tail = 0;
    std::vector<double> d_head;
    std::vector<double> d_tail;
    std::vector<double> d_rel;
};

// Whether relation blocks carry a rotation component. `diagonal` pins every
// block's off-diagonal parameter to zero (init and gradients), giving a plain
// diagonal bilinear model for ablation.
enum class BlockForm { full, diagonal };

inline uint64_t memory_bytes(uint64_t num_entities, uint64_t num_relations, uint64_t d) {
    return (num_entities + num_relations) * d * 8;
}

// Embedding parameters: one d-vector per entity, one d-vector per relation.
// A relation vector encodes a block-diagonal d x d mapping with d/2 blocks
//   [ a_k  -b_k ]
//   [ b_k   a_k ]
// where a_k = params[2k], b_k = params[2k+1]. Every such matrix is normal and
// any two of them commute, and the parameter count stays at d per relation,
// which is what the 8-bytes-per-dimension memory footprint assumes.
class EmbeddingModel {
public:
    EmbeddingModel(size_t num_entities, size_t num_relations, size_t d,
                   uint64_t vocab_fingerprint, BlockForm form = BlockForm::full)
        : d_(d),
          num_entities_(num_entities),
          num_relations_(num_relations),
          vocab_fingerprint_(vocab_fingerprint),
          form_(form),
          entity_vecs_(num_entities * d, 0.0),
          relation_params_(num_relations * d, 0.0) {
        if (d == 0 || d % 2 != 0)
            throw ConfigError("embedding dimension must be positive and even, got " +
                              std::to_string(d));
        if (num_entities == 0 || num_relations == 0)
            throw ConfigError("model needs at least one entity and one relation");
    }

    // Entity rows uniform in [-6/sqrt(d), +6/sqrt(d)]; relation blocks start
    // near the identity mapping (a ~ 1, b ~ 0) so initial scores are plain
    // dot products with small perturbations.
    static EmbeddingModel init_random(const Vocabulary& vocab, size_t d, uint64_t seed,
                                      BlockForm form = BlockForm::full) {
        EmbeddingModel m(vocab.num_entities(), vocab.num_relations(), d, vocab.fingerprint(),
                         form);
        Rng rng(derive_seed(seed, "model-init"));
        const double bound = 6.0 / std::sqrt(static_cast<double>(d));
        for (auto& x : m.entity_vecs_) x = rng.uniform(-bound, bound);
        for (size_t r = 0; r < m.num_relations_; ++r) {
            double* row = m.relation_row(static_cast<RelationId>(r));
            for (size_t k = 0; k < d / 2; ++k) {
                row[2 * k] = 1.0 + rng.uniform(-0.01, 0.01);
                double b = rng.uniform(-0.01, 0.01);
                row[2 * k + 1] = form == BlockForm::diagonal ? 0.0 : b;
            }
        }
        return m;
    }

    size_t dim() const { return d_; }
    size_t num_entities() const { return num_entities_; }
    size_t num_relations() const { return num_relations_; }
    uint64_t vocab_fingerprint() const { return vocab_fingerprint_; }
    BlockForm block_form() const { return form_; }

    double* entity_row(EntityId e) { return entity_vecs_.data() + check_entity(e) * d_; }
    const double* entity_row(EntityId e) const {
        return entity_vecs_.data() + check_entity(e) * d_;
    }
    double* relation_row(RelationId r) { return relation_params_.data() + check_relation(r) * d_; }
    const double* relation_row(RelationId r) const {
        return relation_params_.data() + check_relation(r) * d_;
    }

    const std::vector<double>& entity_vecs() const { return entity_vecs_; }
    const std::vector<double>& relation_params() const { return relation_params_; }

    double score(EntityId h, RelationId r, EntityId t) const {
        const double* vh = entity_row(h);
        const double* vt = entity_row(t);
        const double* w = relation_row(r);
        double f = 0.0;
        for (size_t k = 0; k < d_; k += 2) {
            const double a = w[k], b = w[k + 1];
            const double h0 = vh[k], h1 = vh[k + 1];
            const double t0 = vt[k], t1 = vt[k + 1];
            f += a * (h0 * t0 + h1 * t1) + b * (h1 * t0 - h0 * t1);
        }
        return f;
    }

    double loss(const LabeledTriple& x) const {
        return softplus(-static_cast<double>(x.y) * score(x.head, x.rel, x.tail));
    }

    static double loss_from_score(double f, int y) { return softplus(-y * f); }

    SparseGradient gradients(const LabeledTriple& x) const {
        const double f = score(x.head, x.rel, x.tail);
        // d/df of softplus(-y f) = -y * sigmoid(-y f)
        const double g = -static_cast<double>(x.y) * sigmoid(-x.y * f);

        SparseGradient out;
        out.head = x.head;
        out.rel = x.rel;
        out.tail = x.tail;
        out.d_head.assign(d_, 0.0);
        out.d_tail.assign(d_, 0.0);
        out.d_rel.assign(d_, 0.0);

        const double* vh = entity_row(x.head);
        const double* vt = entity_row(x.tail);
        const double* w = relation_row(x.rel);
        for (size_t k = 0; k < d_; k += 2) {
            const double a = w[k], b = w[k + 1];
            const double h0 = vh[k], h1 = vh[k + 1];
            const double t0 = vt[k], t1 = vt[k + 1];
            out.d_rel[k] = g * (h0 * t0 + h1 * t1);
            out.d_rel[k + 1] = form_ == BlockForm::diagonal ? 0.0 : g * (h1 * t0 - h0 * t1);
            out.d_head[k] = g * (a * t0 - b * t1);
            out.d_head[k + 1] = g * (a * t1 + b * t0);
            out.d_tail[k] = g * (a * h0 + b * h1);
            out.d_tail[k + 1] = g * (a * h1 - b * h0);
        }
        return out;
    }

    // Dense d x d matrix for one relation, row-major; reference form used by
    // the tests' independent oracle and handy for debugging.
    std::vector<double> dense_relation_matrix(RelationId r) const {
        const double* w = relation_row(r);
        std::vector<double> m(d_ * d_, 0.0);
        for (size_t k = 0; k < d_; k += 2) {
            const double a = w[k], b = w[k + 1];
            m[k * d_ + k] = a;
            m[k * d_ + k + 1] = -b;
            m[(k + 1) * d_ + k] = b;
            m[(k + 1) * d_ + k + 1] = a;
        }
        return m;
    }

    bool all_finite() const {
        for (double x : entity_vecs_)
            if (!std::isfinite(x)) return false;
        for (double x : relation_params_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    uint64_t memory_footprint_bytes() const {
        return memory_bytes(num_entities_, num_relations_, d_);
    }

    friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
        return a.d_ == b.d_ && a.num_entities_ == b.num_entities_ &&
               a.num_relations_ == b.num_relations_ && a.entity_vecs_ == b.entity_vecs_ &&
               a.relation_params_ == b.relation_params_;
    }

private:
    size_t check_entity(EntityId e) const {
        if (e >= num_entities_)
            throw UnknownSymbolError("entity id " + std::to_string(e) + " out of range");
        return e;
    }
    size_t check_relation(RelationId r) const {
        if (r >= num_relations_)
            throw UnknownSymbolError("relation id " + std::to_string(r) + " out of range");
        return r;
    }

    size_t d_;
    size_t num_entities_;
    size_t num_relations_;
    uint64_t vocab_fingerprint_;
    BlockForm form_;
    std::vector<double> entity_vecs_;
    std::vector<double> relation_params_;
};

namespace detail {

// CRC-32 (IEEE), bitwise implementation; speed is irrelevant for checkpoint
// sizes here.
inline uint32_t crc32(const void* data, size_t n, uint32_t crc = 0) {
    const auto* p = static_cast<const unsigned char*>(data);
    crc = ~crc;
    for (size_t i = 0; i < n; ++i) {
        crc ^= p[i];
        for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xedb88320u & (~(crc & 1u) + 1u));
    }
    return ~crc;
}

class ByteSink {
public:
    void u8(uint8_t x) { bytes_.push_back(static_cast<char>(x)); }
    void u32le(uint32_t x) {
        for (int i = 0; i < 4; ++i) u8(static_cast<uint8_t>(x >> (8 * i)));
    }
    void u64le(uint64_t x) {
        for (int i = 0; i < 8; ++i) u8(static_cast<uint8_t>(x >> (8 * i)));
    }
    void f64le(double x) {
        uint64_t bits;
        std::memcpy(&bits, &x, 8);
        u64le(bits);
    }
    void str(const std::string& s) {
        u32le(static_cast<uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

class ByteSource {
public:
    explicit ByteSource(std::istream& in) : in_(in) {}

    uint8_t u8() {
        int c = in_.get();
        if (c == EOF) throw IoError("checkpoint truncated");
        consumed_.push_back(static_cast<char>(c));
        return static_cast<uint8_t>(c);
    }
    uint32_t u32le() {
        uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(u8()) << (8 * i);
        return x;
    }
    uint64_t u64le() {
        uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(u8()) << (8 * i);
        return x;
    }
    double f64le() {
        uint64_t bits = u64le();
        double x;
        std::memcpy(&x, &bits, 8);
        return x;
    }
    std::string str() {
        uint32_t n = u32le();
        std::string s;
        s.reserve(n);
        for (uint32_t i = 0; i < n; ++i) s.push_back(static_cast<char>(u8()));
        return s;
    }
    const std::string& consumed() const { return consumed_; }

private:
    std::istream& in_;
    std::string consumed_;
};

} // namespace detail

inline constexpr char kCheckpointMagic[4] = {'R', 'C', 'S', 'E'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Checkpoint layout: magic "RCSE", u32 format version, u64 d / |E| / |R|
// (little-endian), the vocabulary symbol table (u32 length-prefixed UTF-8,
// entities then relations), entity rows then relation rows as row-major
// little-endian f64, and a trailing CRC-32 over all preceding bytes.
inline void save_checkpoint(const EmbeddingModel& model, const Vocabulary& vocab,
                            std::ostream& out) {
    if (vocab.fingerprint() != model.vocab_fingerprint())
        throw ConfigError("model was not trained against this vocabulary");
    if (vocab.num_entities() != model.num_entities() ||
        vocab.num_relations() != model.num_relations())
        throw ConfigError("vocabulary size does not match model");

    detail::ByteSink sink;
    for (char c : kCheckpointMagic) sink.u8(static_cast<uint8_t>(c));
    sink.u32le(kCheckpointVersion);
    sink.u64le(model.dim());
    sink.u64le(model.num_entities());
    sink.u64le(model.num_relations());
    for (const auto& s : vocab.entities()) sink.str(s);
    for (const auto& s : vocab.relations()) sink.str(s);
    for (double x : model.entity_vecs()) sink.f64le(x);
    for (double x : model.relation_params()) sink.f64le(x);

    const std::string& body = sink.bytes();
    uint32_t crc = detail::crc32(body.data(), body.size());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    detail::ByteSink tail;
    tail.u32le(crc);
    out.write(tail.bytes().data(), 4);
    if (!out) throw IoError("checkpoint write failed");
}

struct LoadedCheckpoint {
    Vocabulary vocab;
    EmbeddingModel model;
};

inline LoadedCheckpoint load_checkpoint(std::istream& in) {
    detail::ByteSource src(in);
    char magic[4];
    for (char& c : magic) c = static_cast<char>(src.u8());
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw IoError("not a checkpoint file (bad magic)");
    uint32_t version = src.u32le();
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    uint64_t d = src.u64le();
    uint64_t num_e = src.u64le();
    uint64_t num_r = src.u64le();
    if (d == 0 || d % 2 != 0 || num_e == 0 || num_r == 0)
        throw IoError("checkpoint header has impossible sizes");

    Vocabulary vocab;
    for (uint64_t i = 0; i < num_e; ++i) vocab.intern_entity(src.str());
    for (uint64_t i = 0; i < num_r; ++i) vocab.intern_relation(src.str());
    if (vocab.num_entities() != num_e || vocab.num_relations() != num_r)
        throw IoError("checkpoint symbol table contains duplicates");

    EmbeddingModel model(num_e, num_r, d, vocab.fingerprint());
    for (uint64_t e = 0; e < num_e; ++e) {
        double* row = model.entity_row(static_cast<EntityId>(e));
        for (uint64_t j = 0; j < d; ++j) row[j] = src.f64le();
    }
    for (uint64_t r = 0; r < num_r; ++r) {
        double* row = model.relation_row(static_cast<RelationId>(r));
        for (uint64_t j = 0; j < d; ++j) row[j] = src.f64le();
    }

    uint32_t expect = detail::crc32(src.consumed().data(), src.consumed().size());
    uint32_t stored = src.u32le();
    if (stored != expect) throw IoError("checkpoint checksum mismatch (corrupt file)");
    return LoadedCheckpoint{std::move(vocab), std::move(model)};
}

inline void save_checkpoint_file(const EmbeddingModel& model, const Vocabulary& vocab,
                                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_checkpoint(model, vocab, out);
}

inline LoadedCheckpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_checkpoint(in);
}

} // namespace rcse
