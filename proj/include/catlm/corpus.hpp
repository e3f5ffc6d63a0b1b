#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace catlm {

// One sentence per line, whitespace-tokenized UTF-8 text. The reserved
// end-of-sentence marker is the newline character: it separates sentences
// on disk and never occurs inside one.
struct RawCorpus {
    static constexpr char32_t kEosMarker = U'\n';

    std::vector<std::string> sentences;  // no trailing newline, nonempty
    uint64_t token_count = 0;            // whitespace-delimited tokens
    std::set<char32_t> char_inventory;   // every code point used, plus kEosMarker

    bool empty() const { return sentences.empty(); }

    // Validates UTF-8 and computes token_count / char_inventory.
    static RawCorpus from_sentences(std::vector<std::string> sentences);
};

struct CorpusSplits {
    RawCorpus train, validation, test;
};

struct LengthStats {
    double mean_len = 0.0;  // sentence length in code points
    double std_len = 0.0;   // population standard deviation
    std::map<char32_t, double> initial_char_dist;
};

// Number of whitespace-delimited tokens in a sentence.
uint64_t count_tokens(std::string_view sentence);

// Reads a corpus file (one sentence per line, empty lines dropped).
// Throws EmptyCorpus / EncodingError (with byte offset) / IoError.
RawCorpus read_corpus(const std::filesystem::path& path);

// Deterministic 80/10/10 sentence split; the held-out sets are drawn
// uniformly at random given the seed, and every split keeps file order.
CorpusSplits split_corpus(const RawCorpus& corpus, uint64_t split_seed);

CorpusSplits load_corpus(const std::filesystem::path& path, uint64_t split_seed);

LengthStats sentence_stats(const RawCorpus& corpus);

void write_corpus(const RawCorpus& corpus, const std::filesystem::path& path);

// Writes <prefix>.train / <prefix>.valid / <prefix>.test.
void write_splits(const CorpusSplits& splits, const std::filesystem::path& prefix);

}  // namespace catlm
