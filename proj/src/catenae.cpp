#include "catlm/catenae.hpp"

#include <algorithm>
#include <bit>

#include "catlm/error.hpp"
#include "catlm/utf8.hpp"

namespace catlm {

std::vector<NodeSet> catena_node_sets(const DepTree& tree, int max_len) {
    validate_tree(tree);
    const size_t n = tree.tokens.size();
    const size_t cap = max_len > 0 ? size_t(max_len) : n;
    auto children = tree.child_lists();

    // rooted[v] = catenae rooted in v, built children-first
    std::vector<std::vector<NodeSet>> rooted(n + 1);
    // post-order over the tree
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> stack{tree.root_id()};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (int c : children[size_t(v)]) stack.push_back(c);
    }
    std::reverse(order.begin(), order.end());

    for (int v : order) {
        std::vector<NodeSet> sets{NodeSet{v}};
        for (int child : children[size_t(v)]) {
            const size_t base = sets.size();
            for (size_t i = 0; i < base; ++i) {
                for (const NodeSet& sub : rooted[size_t(child)]) {
                    if (sets[i].size() + sub.size() > cap) continue;
                    NodeSet merged;
                    merged.reserve(sets[i].size() + sub.size());
                    std::merge(sets[i].begin(), sets[i].end(), sub.begin(), sub.end(),
                               std::back_inserter(merged));
                    sets.push_back(std::move(merged));
                }
            }
        }
        rooted[size_t(v)] = std::move(sets);
    }

    std::vector<NodeSet> all;
    for (size_t v = 1; v <= n; ++v)
        for (NodeSet& s : rooted[v]) all.push_back(std::move(s));
    return all;
}

std::set<NodeSet> enumerate_subtrees_bruteforce(const DepTree& tree) {
    validate_tree(tree);
    const size_t n = tree.tokens.size();
    require(n <= 20, Err::OracleTooLarge,
            "brute-force enumeration limited to 20 tokens, got " + std::to_string(n));

    // undirected adjacency over tree edges
    std::vector<std::vector<int>> adj(n + 1);
    for (const TokenNode& t : tree.tokens) {
        if (t.head == 0) continue;
        adj[size_t(t.id)].push_back(t.head);
        adj[size_t(t.head)].push_back(t.id);
    }

    std::set<NodeSet> subtrees;
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        int start = std::countr_zero(mask) + 1;
        uint32_t seen = 0;
        std::vector<int> queue{start};
        seen |= 1u << (start - 1);
        while (!queue.empty()) {
            int v = queue.back();
            queue.pop_back();
            for (int w : adj[size_t(v)]) {
                uint32_t bit = 1u << (w - 1);
                if ((mask & bit) && !(seen & bit)) {
                    seen |= bit;
                    queue.push_back(w);
                }
            }
        }
        if (seen != mask) continue;
        NodeSet nodes;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) nodes.push_back(int(i) + 1);
        subtrees.insert(std::move(nodes));
    }
    return subtrees;
}

std::set<NodeSet> constituents(const DepTree& tree) {
    validate_tree(tree);
    auto children = tree.child_lists();
    std::set<NodeSet> out;
    for (const TokenNode& t : tree.tokens) {
        NodeSet closure;
        std::vector<int> stack{t.id};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            closure.push_back(v);
            for (int c : children[size_t(v)]) stack.push_back(c);
        }
        std::sort(closure.begin(), closure.end());
        out.insert(std::move(closure));
    }
    return out;
}

std::string element(const TokenNode& token, Level level) {
    switch (level) {
        case Level::Lex: return ascii_lower(token.form);
        case Level::Pos: return "_" + token.upos;
        case Level::Rel: return "@" + token.deprel;
    }
    return {};
}

std::string render(const DepTree& tree, const NodeSet& nodes, std::span<const Level> levels) {
    require(nodes.size() == levels.size(), Err::ShapeError, "render: one level per node required");
    std::string out;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += ' ';
        out += element(tree.tokens[size_t(nodes[i]) - 1], levels[i]);
    }
    return out;
}

std::map<std::string, uint64_t> extract_catenae(const DepTree& tree, int max_len, LevelMode mode) {
    std::map<std::string, uint64_t> counts;
    std::vector<Level> levels;
    for (const NodeSet& nodes : catena_node_sets(tree, max_len)) {
        const size_t k = nodes.size();
        if (!mode.all_mixes) {
            levels.assign(k, mode.single);
            ++counts[render(tree, nodes, levels)];
            continue;
        }
        size_t combos = 1;
        for (size_t i = 0; i < k; ++i) combos *= 3;
        levels.assign(k, Level::Lex);
        for (size_t m = 0; m < combos; ++m) {
            size_t rest = m;
            for (size_t i = 0; i < k; ++i) {
                levels[i] = Level(rest % 3);
                rest /= 3;
            }
            ++counts[render(tree, nodes, levels)];
        }
    }
    return counts;
}

}  // namespace catlm
