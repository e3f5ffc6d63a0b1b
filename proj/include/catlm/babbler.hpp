#pragma once

#include <cstdint>

#include "catlm/charlm.hpp"
#include "catlm/corpus.hpp"

namespace catlm {

enum class BabbleMode { Multinomial, Greedy };

struct BabbleConfig {
    BabbleMode mode = BabbleMode::Multinomial;
    double temperature = 1.0;     // multinomial only
    uint64_t target_tokens = 1;   // stop at the first sentence boundary past this
    double max_len_chars = 0.0;   // <= 0: use mean_len + 2 * std_len from the stats
    uint64_t seed = 0;
};

// Samples sentences from a checkpoint. Each sentence starts with a
// character drawn from the input's initial-character distribution and grows
// until the model emits the end-of-sentence marker or the length cap is
// reached. Sentences accumulate until their token count crosses
// target_tokens. Zero-token sentences are discarded; 1000 in a row raise
// StalledBabbling.
RawCorpus babble(const Checkpoint& checkpoint, const LengthStats& stats,
                 const BabbleConfig& config);

}  // namespace catlm
