#include <doctest.h>

#include <algorithm>
#include <set>

#include "catlm/catenae.hpp"
#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "support/oracles.hpp"

using namespace catlm;
namespace ts = catlm::testsupport;

namespace {

DepTree make_tree(const std::vector<std::tuple<std::string, std::string, int, std::string>>& rows) {
    DepTree tree;
    int id = 1;
    for (const auto& [form, upos, head, deprel] : rows) {
        TokenNode t;
        t.id = id++;
        t.form = form;
        t.upos = upos;
        t.head = head;
        t.deprel = deprel;
        tree.tokens.push_back(std::move(t));
    }
    return tree;
}

// Mary had a little lamb: had is the root; Mary and lamb hang off had;
// a and little hang off lamb.
DepTree mary_tree() {
    return make_tree({{"Mary", "NOUN", 2, "nsubj"},
                      {"had", "VERB", 0, "root"},
                      {"a", "DET", 5, "det"},
                      {"little", "ADJ", 5, "nmod"},
                      {"lamb", "NOUN", 2, "dobj"}});
}

DepTree star_tree(int leaves) {
    std::vector<std::tuple<std::string, std::string, int, std::string>> rows;
    rows.push_back({"hub", "VERB", 0, "root"});
    for (int i = 0; i < leaves; ++i)
        rows.push_back({"leaf" + std::to_string(i), "NOUN", 1, "dep"});
    return make_tree(rows);
}

DepTree chain_tree(int n) {
    std::vector<std::tuple<std::string, std::string, int, std::string>> rows;
    for (int i = 0; i < n; ++i)
        rows.push_back({"c" + std::to_string(i), "NOUN", i, i == 0 ? "root" : "dep"});
    return make_tree(rows);
}

std::set<NodeSet> as_set(const std::vector<NodeSet>& sets) {
    return std::set<NodeSet>(sets.begin(), sets.end());
}

}  // namespace

TEST_SUITE("catenae") {

TEST_CASE("single node tree yields exactly one catena") {
    auto tree = make_tree({{"hi", "INTJ", 0, "root"}});
    auto sets = catena_node_sets(tree, 0);
    CHECK(sets.size() == 1);
    auto rendered = extract_catenae(tree, 5, LevelMode::Single(Level::Lex));
    CHECK(rendered.size() == 1);
    CHECK(rendered.count("hi") == 1);
}

TEST_CASE("mary tree lexical catenae include the paper's examples") {
    auto counts = extract_catenae(mary_tree(), 5, LevelMode::Single(Level::Lex));
    CHECK(counts.count("mary had lamb") == 1);
    CHECK(counts.count("had a lamb") == 1);
    CHECK(counts.count("a little lamb") == 1);
    // not a catena: "mary a" is disconnected
    CHECK(counts.count("mary a") == 0);
}

TEST_CASE("mary tree has 17 node sets, a superset of the worked table") {
    auto oracle = enumerate_subtrees_bruteforce(mary_tree());
    CHECK(oracle.size() == 17);
    auto sets = as_set(catena_node_sets(mary_tree(), 0));
    CHECK(sets == oracle);
    // "had a little lamb" (BCDE) satisfies the definition even though the
    // worked table in the source material omits it
    CHECK(oracle.count(NodeSet{2, 3, 4, 5}) == 1);
}

TEST_CASE("mary tree constituents") {
    auto cons = constituents(mary_tree());
    std::set<NodeSet> expected{{1}, {1, 2, 3, 4, 5}, {3}, {4}, {3, 4, 5}};
    CHECK(cons == expected);
}

TEST_CASE("constituents are always catenae") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        DepTree tree = ts::random_tree(1 + int(rng.next_below(10)), rng);
        auto cons = constituents(tree);
        auto all = enumerate_subtrees_bruteforce(tree);
        for (const NodeSet& c : cons) CHECK(all.count(c) == 1);
    }
}

TEST_CASE("star with 6 leaves has 70 connected subsets") {
    auto oracle = enumerate_subtrees_bruteforce(star_tree(6));
    CHECK(oracle.size() == 70);  // 2^6 containing the hub plus 6 leaf singletons
    CHECK(as_set(catena_node_sets(star_tree(6), 0)) == oracle);
}

TEST_CASE("chain of 7 has 28 connected subsets") {
    auto oracle = enumerate_subtrees_bruteforce(chain_tree(7));
    CHECK(oracle.size() == 28);  // contiguous segments
    CHECK(as_set(catena_node_sets(chain_tree(7), 0)) == oracle);
}

TEST_CASE("chain constituents are the suffixes") {
    auto cons = constituents(chain_tree(7));
    CHECK(cons.size() == 7);
    for (const NodeSet& c : cons) {
        // each constituent is a contiguous run ending at node 7
        CHECK(c.back() == 7);
        for (size_t i = 1; i < c.size(); ++i) CHECK(c[i] == c[i - 1] + 1);
    }
}

TEST_CASE("recursive extractor equals brute force on random trees") {
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 1 + int(rng.next_below(10));
        DepTree tree = ts::random_tree(n, rng);
        CHECK(as_set(catena_node_sets(tree, 0)) == enumerate_subtrees_bruteforce(tree));
    }
}

TEST_CASE("length cap filters by node-set size") {
    auto sets = catena_node_sets(chain_tree(7), 3);
    for (const NodeSet& s : sets) CHECK(s.size() <= 3);
    CHECK(sets.size() == 7 + 6 + 5);
}

TEST_CASE("every node set has exactly one node whose head is outside") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        DepTree tree = ts::random_tree(1 + int(rng.next_below(10)), rng);
        for (const NodeSet& s : catena_node_sets(tree, 0)) {
            int external_heads = 0;
            for (int id : s) {
                int head = tree.tokens[size_t(id) - 1].head;
                if (std::find(s.begin(), s.end(), head) == s.end()) ++external_heads;
            }
            CHECK(external_heads == 1);
        }
    }
}

TEST_CASE("rendering prefixes and lowercasing") {
    auto tree = mary_tree();
    std::vector<Level> levels{Level::Lex, Level::Pos, Level::Rel};
    CHECK(render(tree, {1, 2, 5}, levels) == "mary _VERB @dobj");
}

TEST_CASE("all-mixes yields 3^k renderings per node set") {
    auto tree = mary_tree();
    for (int max_len : {1, 2, 3}) {
        auto node_sets = catena_node_sets(tree, max_len);
        uint64_t expected = 0;
        for (const NodeSet& s : node_sets) {
            uint64_t combos = 1;
            for (size_t i = 0; i < s.size(); ++i) combos *= 3;
            expected += combos;
        }
        auto counts = extract_catenae(tree, max_len, LevelMode::AllMixes());
        uint64_t total = 0;
        for (const auto& [rendering, count] : counts) total += count;
        CHECK(total == expected);
    }
    // spot checks for small sizes: k=1 gives 3, k=2 gives 9, k=3 gives 27
    auto single = extract_catenae(make_tree({{"hi", "INTJ", 0, "root"}}), 5);
    uint64_t n1 = 0;
    for (const auto& [r, c] : single) n1 += c;
    CHECK(n1 == 3);
}

TEST_CASE("oracle refuses oversized trees") {
    CHECK_THROWS_AS(enumerate_subtrees_bruteforce(chain_tree(21)), CatlmError);
}

}  // TEST_SUITE
