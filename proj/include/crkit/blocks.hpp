#pragma once

#include "error.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace crkit {

/// How a variable block behaves under the formal bar operation.
enum class BlockRole {
    Holomorphic,     // swapped with its paired antiholomorphic block
    Antiholomorphic, // swapped with its paired holomorphic block
    RealParam,       // fixed (deformation parameters, curve time)
    Auxiliary,       // fixed (Segre coordinates x_j)
};

struct Block {
    std::string name;
    int arity = 0;
    BlockRole role = BlockRole::Auxiliary;
    int pair = -1; // index of the conjugate block, or -1
};

/// Ordered list of named variable blocks with a conjugation pairing.
/// Immutable once built; series share it by shared_ptr.
class VariableBlocks {
  public:
    static std::shared_ptr<const VariableBlocks> make(std::vector<Block> blocks) {
        auto vb = std::make_shared<VariableBlocks>();
        vb->blocks_ = std::move(blocks);
        vb->offsets_.resize(vb->blocks_.size());
        int off = 0;
        for (std::size_t b = 0; b < vb->blocks_.size(); ++b) {
            const Block &blk = vb->blocks_[b];
            if (blk.arity <= 0)
                throw InputError("VariableBlocks: block '" + blk.name + "' has non-positive arity");
            for (std::size_t c = 0; c < b; ++c)
                if (vb->blocks_[c].name == blk.name)
                    throw InputError("VariableBlocks: duplicate block name '" + blk.name + "'");
            vb->offsets_[b] = off;
            off += blk.arity;
        }
        vb->total_ = off;
        for (std::size_t b = 0; b < vb->blocks_.size(); ++b) {
            const Block &blk = vb->blocks_[b];
            if (blk.pair >= 0) {
                if (blk.pair >= (int)vb->blocks_.size())
                    throw InputError("VariableBlocks: pair index out of range for '" + blk.name + "'");
                const Block &other = vb->blocks_[blk.pair];
                if (other.pair != (int)b)
                    throw InputError("VariableBlocks: pairing of '" + blk.name + "' is not mutual");
                if (other.arity != blk.arity)
                    throw InputError("VariableBlocks: paired blocks '" + blk.name + "', '" + other.name +
                                     "' differ in arity");
                bool hol = blk.role == BlockRole::Holomorphic && other.role == BlockRole::Antiholomorphic;
                bool anti = blk.role == BlockRole::Antiholomorphic && other.role == BlockRole::Holomorphic;
                if (!hol && !anti)
                    throw InputError("VariableBlocks: pairing of '" + blk.name + "' must join a holomorphic "
                                     "block with an antiholomorphic one");
            }
        }
        return vb;
    }

    int block_count() const { return (int)blocks_.size(); }
    int total_vars() const { return total_; }
    const Block &block(int b) const { return blocks_[b]; }
    int offset(int b) const { return offsets_[b]; }

    int find_block(const std::string &name) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (blocks_[b].name == name)
                return (int)b;
        return -1;
    }

    /// Flat variable index of `name.idx` (idx is 1-based).
    int var_index(const std::string &block_name, int idx) const {
        int b = find_block(block_name);
        if (b < 0)
            throw InputError("VariableBlocks: no block named '" + block_name + "'");
        if (idx < 1 || idx > blocks_[b].arity)
            throw InputError("VariableBlocks: index out of range for '" + block_name + "'");
        return offsets_[b] + idx - 1;
    }

    /// Block containing flat variable index v.
    int block_of_var(int v) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (v >= offsets_[b] && v < offsets_[b] + blocks_[b].arity)
                return (int)b;
        throw InputError("VariableBlocks: variable index out of range");
    }

    /// Canonical qualified name of flat variable v, e.g. "z.1".
    std::string var_name(int v) const {
        int b = block_of_var(v);
        return blocks_[b].name + "." + std::to_string(v - offsets_[b] + 1);
    }

    bool same_structure(const VariableBlocks &o) const {
        if (blocks_.size() != o.blocks_.size())
            return false;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const Block &x = blocks_[b], &y = o.blocks_[b];
            if (x.name != y.name || x.arity != y.arity || x.role != y.role || x.pair != y.pair)
                return false;
        }
        return true;
    }

    std::string describe() const {
        std::string s;
        for (const Block &b : blocks_) {
            if (!s.empty())
                s += ", ";
            s += b.name + "(" + std::to_string(b.arity) + ")";
        }
        return s;
    }

  private:
    std::vector<Block> blocks_;
    std::vector<int> offsets_;
    int total_ = 0;
};

using BlocksPtr = std::shared_ptr<const VariableBlocks>;

/// Convenience builder: {name, arity, role, pair_name_or_empty}.
struct BlockSpec {
    std::string name;
    int arity;
    BlockRole role;
    std::string pair; // name of the conjugate block, "" if none
};

inline BlocksPtr make_blocks(const std::vector<BlockSpec> &specs) {
    std::vector<Block> blocks;
    blocks.reserve(specs.size());
    for (const BlockSpec &s : specs)
        blocks.push_back(Block{s.name, s.arity, s.role, -1});
    for (std::size_t b = 0; b < specs.size(); ++b) {
        if (specs[b].pair.empty())
            continue;
        int p = -1;
        for (std::size_t c = 0; c < specs.size(); ++c)
            if (specs[c].name == specs[b].pair)
                p = (int)c;
        if (p < 0)
            throw InputError("make_blocks: pair block '" + specs[b].pair + "' not found");
        blocks[b].pair = p;
    }
    return VariableBlocks::make(std::move(blocks));
}

} // namespace crkit
