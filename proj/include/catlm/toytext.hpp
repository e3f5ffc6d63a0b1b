#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catlm/corpus.hpp"
#include "catlm/treebank.hpp"

namespace catlm::toytext {

// Bundled synthetic English-like grammar: a weighted toy grammar over a
// closed lexicon, used for demo runs and end-to-end experiments where the
// real corpora and a full parser are unavailable.

struct GenConfig {
    uint64_t seed = 1;
    uint64_t target_tokens = 50000;
};

std::vector<std::string> generate(const GenConfig& config);

// Deterministic rule-based annotator for the toy lexicon. Tags by lexicon
// lookup (unknown words get "X") and attaches heads with fixed rules, so
// any input line—including model babbling—yields a valid tree.
DepTree parse_sentence(const std::string& sentence);
std::vector<DepTree> parse(const RawCorpus& text);

}  // namespace catlm::toytext
