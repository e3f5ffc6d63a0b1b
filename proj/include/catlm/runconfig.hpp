#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "catlm/abstraction.hpp"
#include "catlm/babbler.hpp"
#include "catlm/charlm.hpp"
#include "catlm/constructicon.hpp"
#include "catlm/semspace.hpp"

namespace catlm {

// Flat key-value config with one section per module. Flags override config
// keys; the CATLM_SEED environment variable overrides the global seed.
struct RunConfig {
    // [run]
    uint64_t seed = 1;
    std::string annotator;  // command template with {input} and {output}

    // [corpus]
    uint64_t split_seed = 0;  // 0: derived from the global seed

    // [charlm]
    LMConfig lm;  // lm.seed 0: derived from the global seed

    // [babbler]
    BabbleMode babble_mode = BabbleMode::Multinomial;
    double temperature = 1.0;
    uint64_t target_tokens = 0;  // 0: token count of the training split
    uint64_t babble_seed = 0;    // 0: derived; per-snapshot babbling adds the epoch

    // [constructicon]
    Constructicon::BuildParams build;
    size_t top_k = 10000;
    Constructicon::RankBy rank_by = Constructicon::RankBy::Mi;

    // [semspace]
    int dim = 300;
    size_t num_targets = 50000;
    size_t num_contexts = 10000;
    SvdOptions svd;

    // [abstraction]
    PairParams pairs;
    double bin_low = -0.05;
    double bin_high = 0.05;
    GroupBy group_by = GroupBy::Cat2;

    // resolved values
    uint64_t effective_split_seed() const { return split_seed ? split_seed : seed; }
    uint64_t effective_lm_seed() const { return lm.seed ? lm.seed : seed; }
    uint64_t effective_babble_seed() const { return babble_seed ? babble_seed : seed; }

    void apply_env();  // CATLM_SEED
    void set(const std::string& dotted_key, const std::string& value);  // "section.key"
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace catlm
