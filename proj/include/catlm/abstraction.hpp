#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "catlm/constructicon.hpp"
#include "catlm/semspace.hpp"
#include "catlm/treebank.hpp"

namespace catlm {

// cat1 is an instance of cat2: both render the same node set, every slot of
// cat2 is at least as abstract as the matching slot of cat1, and at least
// one slot is strictly more abstract.
struct MinimalPair {
    std::string cat1;
    std::string cat2;
    uint64_t witness_count = 0;  // input sentences where one node set realizes both
};

struct ShiftRecord {
    MinimalPair pair;
    double cos_input = 0.0;
    double cos_best = 0.0;               // NaN when the pair is absent from the best space
    std::vector<double> cos_by_stage;    // stages where both renderings are present
    std::vector<double> cos_at_stage;    // one entry per stage space, NaN when absent
    double shift = 0.0;                  // first-stage cosine minus last-stage cosine
};

struct ShiftGroup {
    std::string key;  // a cat1 or cat2 rendering
    double mean_shift = 0.0;
    double mean_cos_input = 0.0;
    size_t n = 0;
};

struct HypothesisReport {
    double h = 0.0;
    double p = 1.0;
    // bins ordered low / intermediate / high
    std::array<std::array<double, 3>, 3> posthoc_p{};
    std::array<std::array<double, 3>, 3> posthoc_p_bonferroni{};
    std::array<size_t, 3> bin_sizes{};
    std::array<std::vector<double>, 3> bin_cosines;

    std::string to_json_string() const;
};

struct PairParams {
    uint64_t min_freq = 2;  // both renderings must reach this in the constructicon
    int min_arity = 2;      // matches the semantic spaces' target inventory
    int max_arity = 3;
    int min_sent_len = 1;
    int max_sent_len = 25;
};

// Checks the slotwise abstraction order from the rendering prefixes alone
// ("_" part of speech, "@" relation, bare form otherwise).
bool is_instance_of(std::string_view cat1, std::string_view cat2);

std::vector<MinimalPair> extract_minimal_pairs(std::span<const DepTree> trees,
                                               const Constructicon& constructicon,
                                               const PairParams& params = {});

// One record per pair whose renderings have nonzero vectors in the input
// space and the first and last stage spaces. The best space is optional per
// pair (NaN when missing); pairs missing required spaces are skipped with a
// note to `log`.
std::vector<ShiftRecord> compute_shifts(std::span<const MinimalPair> pairs,
                                        const EmbeddingSpace& input_space,
                                        const EmbeddingSpace& best_space,
                                        std::span<const EmbeddingSpace> stage_spaces,
                                        std::ostream* log = nullptr);

enum class GroupBy { Cat1, Cat2 };

std::vector<ShiftGroup> group_averages(std::span<const ShiftRecord> records, GroupBy by);

// Bins groups by mean shift (boundaries fall into the intermediate bin),
// then Kruskal-Wallis plus Dunn posthoc on the mean input cosines.
HypothesisReport bin_and_test(std::span<const ShiftGroup> groups, double low = -0.05,
                              double high = 0.05);

void write_shifts_tsv(std::ostream& out, std::span<const ShiftRecord> records);
std::vector<ShiftRecord> read_shifts_tsv(std::istream& in);
void write_groups_tsv(std::ostream& out, std::span<const ShiftGroup> groups);

}  // namespace catlm
