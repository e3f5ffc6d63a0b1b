#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "catlm/treebank.hpp"

namespace catlm {

// Rendering granularity of one catena slot, ordered by abstraction:
// lexical form < part of speech ("_" prefix) < relation ("@" prefix).
enum class Level : uint8_t { Lex = 0, Pos = 1, Rel = 2 };

struct LevelMode {
    bool all_mixes = true;
    Level single = Level::Lex;

    static LevelMode AllMixes() { return {true, Level::Lex}; }
    static LevelMode Single(Level level) { return {false, level}; }
};

// Token ids of one catena, sorted ascending (sentence order).
using NodeSet = std::vector<int>;

// All catenae of the tree as node sets, via the bottom-up recursion:
// a leaf yields itself; an inner node yields itself plus every combination
// of catenae rooted in its children. max_len == 0 disables the length cap.
std::vector<NodeSet> catena_node_sets(const DepTree& tree, int max_len = 5);

// Independent oracle: every nonempty node subset inducing a connected
// subgraph. Only for trees of <= 20 tokens (OracleTooLarge otherwise).
std::set<NodeSet> enumerate_subtrees_bruteforce(const DepTree& tree);

// One constituent per token: the token plus its full dominance closure.
std::set<NodeSet> constituents(const DepTree& tree);

// Slot string for a token at a level (Lex lowercases the form).
std::string element(const TokenNode& token, Level level);

// Space-joined elements in increasing token id order.
std::string render(const DepTree& tree, const NodeSet& nodes, std::span<const Level> levels);

// Rendering multiset for one tree. With all_mixes, each node set of size k
// contributes 3^k renderings.
std::map<std::string, uint64_t> extract_catenae(const DepTree& tree, int max_len = 5,
                                                LevelMode mode = LevelMode::AllMixes());

}  // namespace catlm
