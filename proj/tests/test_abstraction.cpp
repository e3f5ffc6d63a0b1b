#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "catlm/abstraction.hpp"
#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "catlm/toytext.hpp"

using namespace catlm;

namespace {

EmbeddingSpace space_with(const std::vector<std::pair<std::string, Eigen::RowVector2d>>& rows) {
    EmbeddingSpace s;
    s.vectors.resize(long(rows.size()), 2);
    for (size_t i = 0; i < rows.size(); ++i) {
        s.targets.push_back(rows[i].first);
        s.vectors.row(long(i)) = rows[i].second;
    }
    s.rebuild_index();
    return s;
}

// a pair of vectors whose cosine is exactly `c`
Eigen::RowVector2d unit_at(double c) { return {c, std::sqrt(1.0 - c * c)}; }

MinimalPair mk_pair(const std::string& a, const std::string& b) { return {a, b, 1}; }

}  // namespace

TEST_SUITE("abstraction") {

TEST_CASE("instancehood from rendering prefixes") {
    CHECK(is_instance_of("a minute", "a _NOUN"));
    CHECK(is_instance_of("a minute", "a @root"));
    CHECK(is_instance_of("you _VERB it", "_PRON @root @expl"));
    CHECK_FALSE(is_instance_of("a minute", "a minute"));       // no slot differs
    CHECK_FALSE(is_instance_of("a _NOUN", "a minute"));        // wrong direction
    CHECK_FALSE(is_instance_of("a minute", "_DET"));           // arity mismatch
    CHECK_FALSE(is_instance_of("_VERB it", "jump _PRON"));     // slot 1 goes backwards
}

TEST_CASE("extract_minimal_pairs finds witnessed slotwise abstractions") {
    auto corpus = RawCorpus::from_sentences({"the cat sleeps .", "the cat runs .",
                                             "the dog sleeps ."});
    auto trees = toytext::parse(corpus);
    Constructicon::BuildParams params;
    params.min_freq = 1;
    params.max_catena_len = 3;
    auto c = Constructicon::build(trees, params);
    PairParams pp;
    pp.min_freq = 1;
    auto pairs = extract_minimal_pairs(trees, c, pp);
    REQUIRE(!pairs.empty());
    bool found = false;
    for (const auto& p : pairs) {
        CHECK(is_instance_of(p.cat1, p.cat2));
        CHECK(p.witness_count >= 1);
        if (p.cat1 == "the cat" && p.cat2 == "the _NOUN") {
            found = true;
            CHECK(p.witness_count == 2);  // two sentences contain "the cat"
        }
    }
    CHECK(found);
}

TEST_CASE("pairs below the frequency floor are dropped") {
    auto corpus = RawCorpus::from_sentences({"the cat sleeps .", "the cat runs .",
                                             "the dog sleeps ."});
    auto trees = toytext::parse(corpus);
    Constructicon::BuildParams params;
    params.min_freq = 1;
    auto c = Constructicon::build(trees, params);
    PairParams pp;
    pp.min_freq = 3;  // only renderings seen three times qualify
    auto pairs = extract_minimal_pairs(trees, c, pp);
    for (const auto& p : pairs) {
        CHECK(c.frequency(p.cat1) >= 3);
        CHECK(c.frequency(p.cat2) >= 3);
    }
}

TEST_CASE("worked shift arithmetic: 0.71 then 0.34 gives 0.37") {
    auto input = space_with({{"a minute", {1, 0}}, {"a _NOUN", unit_at(0.28)}});
    auto best = space_with({{"a minute", {1, 0}}, {"a _NOUN", unit_at(0.32)}});
    std::vector<EmbeddingSpace> stages{
        space_with({{"a minute", {1, 0}}, {"a _NOUN", unit_at(0.71)}}),
        space_with({{"a minute", {1, 0}}, {"a _NOUN", unit_at(0.51)}}),
        space_with({{"a minute", {1, 0}}, {"a _NOUN", unit_at(0.34)}})};
    std::vector<MinimalPair> pairs{mk_pair("a minute", "a _NOUN")};
    auto records = compute_shifts(pairs, input, best, stages);
    REQUIRE(records.size() == 1);
    CHECK(records[0].cos_input == doctest::Approx(0.28).epsilon(1e-9));
    CHECK(records[0].cos_best == doctest::Approx(0.32).epsilon(1e-9));
    CHECK(records[0].cos_by_stage.size() == 3);
    CHECK(records[0].shift == doctest::Approx(0.37).epsilon(1e-9));

    // reversing the stage order negates the shift
    std::vector<EmbeddingSpace> reversed{stages[2], stages[1], stages[0]};
    auto back = compute_shifts(pairs, input, best, reversed);
    CHECK(back[0].shift == doctest::Approx(-0.37).epsilon(1e-9));
}

TEST_CASE("identical end spaces give zero shift") {
    auto s = space_with({{"x y", {1, 0}}, {"x _NOUN", unit_at(0.5)}});
    std::vector<EmbeddingSpace> stages{s, s};
    std::vector<MinimalPair> pairs{mk_pair("x y", "x _NOUN")};
    auto records = compute_shifts(pairs, s, s, stages);
    REQUIRE(records.size() == 1);
    CHECK(records[0].shift == doctest::Approx(0.0));
}

TEST_CASE("pairs missing from required spaces are skipped with a note") {
    auto full = space_with({{"a b", {1, 0}}, {"a _X", unit_at(0.4)}});
    auto missing = space_with({{"a b", {1, 0}}, {"unrelated", {0, 1}}});
    std::vector<MinimalPair> pairs{mk_pair("a b", "a _X")};
    std::ostringstream log;
    auto none = compute_shifts(pairs, full, full, std::vector<EmbeddingSpace>{missing, full}, &log);
    CHECK(none.empty());
    CHECK(log.str().find("first stage") != std::string::npos);

    // missing best space is tolerated: recorded as NaN
    auto records = compute_shifts(pairs, full, missing, std::vector<EmbeddingSpace>{full, full});
    REQUIRE(records.size() == 1);
    CHECK(std::isnan(records[0].cos_best));
}

TEST_CASE("too few stage spaces rejected") {
    auto s = space_with({{"a b", {1, 0}}});
    std::vector<MinimalPair> pairs{mk_pair("a b", "a _X")};
    CHECK_THROWS_AS(compute_shifts(pairs, s, s, std::vector<EmbeddingSpace>{s}), CatlmError);
}

TEST_CASE("group averages: singleton and mean") {
    ShiftRecord r1, r2;
    r1.pair = {"a x", "a _N", 1};
    r1.shift = 0.2;
    r1.cos_input = 0.5;
    r2.pair = {"a y", "a _N", 1};
    r2.shift = 0.4;
    r2.cos_input = 0.7;
    std::vector<ShiftRecord> records{r1, r2};
    auto by_cat2 = group_averages(records, GroupBy::Cat2);
    REQUIRE(by_cat2.size() == 1);
    CHECK(by_cat2[0].key == "a _N");
    CHECK(by_cat2[0].mean_shift == doctest::Approx(0.3));
    CHECK(by_cat2[0].mean_cos_input == doctest::Approx(0.6));
    CHECK(by_cat2[0].n == 2);

    auto by_cat1 = group_averages(records, GroupBy::Cat1);
    REQUIRE(by_cat1.size() == 2);
    CHECK(by_cat1[0].key == "a y");  // higher mean shift first
    CHECK(by_cat1[0].mean_shift == doctest::Approx(0.4));
}

TEST_CASE("group averages are permutation invariant") {
    Rng rng(3);
    std::vector<ShiftRecord> records;
    for (int i = 0; i < 20; ++i) {
        ShiftRecord r;
        r.pair = {"c" + std::to_string(i % 4), "g" + std::to_string(i % 3), 1};
        r.shift = rng.next_double() - 0.5;
        r.cos_input = rng.next_double();
        records.push_back(std::move(r));
    }
    auto before = group_averages(records, GroupBy::Cat2);
    std::reverse(records.begin(), records.end());
    auto after = group_averages(records, GroupBy::Cat2);
    REQUIRE(before.size() == after.size());
    for (size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].key == after[i].key);
        CHECK(before[i].mean_shift == doctest::Approx(after[i].mean_shift).epsilon(1e-12));
    }
}

TEST_CASE("binning respects boundaries and names empty bins") {
    std::vector<ShiftGroup> groups;
    for (double shift : {-0.2, -0.051, -0.05, 0.0, 0.05, 0.051, 0.2}) {
        ShiftGroup g;
        g.key = "k" + std::to_string(groups.size());
        g.mean_shift = shift;
        g.mean_cos_input = 0.5 + shift;
        g.n = 1;
        groups.push_back(std::move(g));
    }
    auto report = bin_and_test(groups);
    CHECK(report.bin_sizes[0] == 2);  // -0.2, -0.051
    CHECK(report.bin_sizes[1] == 3);  // boundary values land in the middle
    CHECK(report.bin_sizes[2] == 2);

    std::vector<ShiftGroup> no_high(groups.begin(), groups.begin() + 3);
    try {
        bin_and_test(no_high);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::DegenerateBinning);
        CHECK(std::string(e.what()).find("high") != std::string::npos);
    }
}

TEST_CASE("separated bins test significant, one distribution does not") {
    Rng rng(41);
    auto make_groups = [&](double lo, double mid, double hi) {
        std::vector<ShiftGroup> groups;
        auto add = [&](double shift_center, double cos_center, int n) {
            for (int i = 0; i < n; ++i) {
                ShiftGroup g;
                g.key = "k" + std::to_string(groups.size());
                g.mean_shift = shift_center + 0.01 * (rng.next_double() - 0.5);
                g.mean_cos_input = cos_center + 0.02 * (rng.next_double() - 0.5);
                g.n = 1;
                groups.push_back(std::move(g));
            }
        };
        add(-0.2, lo, 15);
        add(0.0, mid, 15);
        add(0.2, hi, 15);
        return groups;
    };
    // disjoint cosine supports: strongly significant
    auto separated = bin_and_test(make_groups(0.1, 0.5, 0.9));
    CHECK(separated.p < 0.001);
    CHECK(separated.posthoc_p[0][1] < 0.01);
    CHECK(separated.posthoc_p[1][2] < 0.01);

    // cosines all drawn around the same level: usually not significant;
    // a full false-positive-rate simulation runs in the acceptance suite
    int significant = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto report = bin_and_test(make_groups(0.5, 0.5, 0.5));
        if (report.p < 0.05) ++significant;
    }
    CHECK(significant <= 6);
}

TEST_CASE("hypothesis report serializes to json") {
    std::vector<ShiftGroup> groups;
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        ShiftGroup g;
        g.key = "k" + std::to_string(i);
        g.mean_shift = (i % 3 - 1) * 0.2;
        g.mean_cos_input = rng.next_double();
        g.n = 1;
        groups.push_back(std::move(g));
    }
    auto report = bin_and_test(groups);
    std::string json = report.to_json_string();
    CHECK(json.find("kruskal_wallis") != std::string::npos);
    CHECK(json.find("dunn_p_bonferroni") != std::string::npos);
    CHECK(json.find("intermediate") != std::string::npos);
}

TEST_CASE("shift tsv layout") {
    auto input = space_with({{"a b", {1, 0}}, {"a _X", unit_at(0.5)}});
    std::vector<EmbeddingSpace> stages{input, input};
    std::vector<MinimalPair> pairs{mk_pair("a b", "a _X")};
    auto records = compute_shifts(pairs, input, input, stages);
    std::ostringstream out;
    write_shifts_tsv(out, records);
    CHECK(out.str().find("cat1\tcat2\twitnesses\tcos_input\tcos_best\tcos_stage_1\tcos_stage_2\tshift") == 0);
    CHECK(out.str().find("a b\ta _X\t1\t0.5") != std::string::npos);
}

}  // TEST_SUITE
