#include "catlm/babbler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "catlm/utf8.hpp"

namespace catlm {

namespace {

// temperature-adjusted multinomial draw: q_i proportional to p_i^(1/tau)
int sample_multinomial(std::vector<float>& probs, double temperature, Rng& rng,
                       std::vector<double>& cumulative) {
    cumulative.resize(probs.size());
    double total = 0.0;
    if (temperature == 1.0) {
        for (size_t i = 0; i < probs.size(); ++i) {
            total += double(probs[i]);
            cumulative[i] = total;
        }
    } else {
        const double inv_tau = 1.0 / temperature;
        for (size_t i = 0; i < probs.size(); ++i) {
            total += std::pow(double(std::max(probs[i], 1e-30f)), inv_tau);
            cumulative[i] = total;
        }
    }
    return int(rng.sample_cumulative(cumulative));
}

int argmax(const std::vector<float>& probs) {
    int best = 0;
    for (size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[size_t(best)]) best = int(i);
    return best;
}

}  // namespace

RawCorpus babble(const Checkpoint& checkpoint, const LengthStats& stats,
                 const BabbleConfig& config) {
    require(config.target_tokens >= 1, Err::ConfigError, "target_tokens must be >= 1");
    require(config.temperature > 0.0, Err::ConfigError, "temperature must be > 0");
    const double max_len =
        config.max_len_chars > 0.0 ? config.max_len_chars : stats.mean_len + 2.0 * stats.std_len;
    require(max_len > 0.0, Err::ConfigError, "sentence length cap must be > 0");
    const uint64_t cap = uint64_t(std::ceil(max_len));

    LmRunner runner(checkpoint);
    const CharVocab& vocab = runner.vocab();
    Rng rng(config.seed);

    // cumulative initial-character distribution, ordered by code point
    std::vector<char32_t> initial_chars;
    std::vector<double> initial_cum;
    double mass = 0.0;
    for (const auto& [cp, p] : stats.initial_char_dist) {
        initial_chars.push_back(cp);
        mass += p;
        initial_cum.push_back(mass);
    }
    require(!initial_chars.empty(), Err::ConfigError, "empty initial character distribution");

    std::vector<std::string> sentences;
    uint64_t total_tokens = 0;
    int consecutive_empty = 0;
    std::vector<double> scratch;
    std::vector<char32_t> sent;

    // One continuous stream, as in training: sentences separated by the
    // end-of-sentence marker, hidden state carried across boundaries. Only
    // the first character of each sentence is forced, drawn from the
    // input's initial-character distribution.
    LmState state = runner.zero_state();
    runner.step(state, vocab.eos_id());
    while (total_tokens < config.target_tokens) {
        sent.clear();
        char32_t first = initial_chars[rng.sample_cumulative(initial_cum)];
        sent.push_back(first);
        int pending = vocab.id_or_unk(first);  // appended but not yet consumed
        bool sampled_marker = false;
        while (sent.size() < cap) {
            std::vector<float> probs = runner.step(state, pending);
            int next = config.mode == BabbleMode::Greedy
                           ? argmax(probs)
                           : sample_multinomial(probs, config.temperature, rng, scratch);
            if (next == vocab.eos_id()) {
                sampled_marker = true;
                break;
            }
            sent.push_back(vocab.chars[size_t(next)]);
            pending = next;
        }
        if (!sampled_marker) runner.step(state, pending);  // cap hit: close the last char
        runner.step(state, vocab.eos_id());                // sentence boundary

        std::string sentence = utf8_encode(sent);
        uint64_t tokens = count_tokens(sentence);
        if (tokens == 0) {
            if (++consecutive_empty >= 1000)
                raise(Err::StalledBabbling,
                      "1000 consecutive sentences without tokens; target " +
                          std::to_string(config.target_tokens) + " unreachable");
            continue;
        }
        consecutive_empty = 0;
        sentences.push_back(std::move(sentence));
        total_tokens += tokens;
    }
    return RawCorpus::from_sentences(std::move(sentences));
}

}  // namespace catlm
