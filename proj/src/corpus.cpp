#include "catlm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "catlm/utf8.hpp"

namespace catlm {

uint64_t count_tokens(std::string_view sentence) {
    uint64_t n = 0;
    bool in_token = false;
    for (char c : sentence) {
        bool ws = (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f');
        if (!ws && !in_token) ++n;
        in_token = !ws;
    }
    return n;
}

RawCorpus RawCorpus::from_sentences(std::vector<std::string> sentences) {
    RawCorpus corpus;
    corpus.sentences = std::move(sentences);
    corpus.char_inventory.insert(kEosMarker);
    for (const std::string& s : corpus.sentences) {
        corpus.token_count += count_tokens(s);
        for (char32_t cp : utf8_decode(s)) corpus.char_inventory.insert(cp);
    }
    return corpus;
}

RawCorpus read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();

    std::vector<std::string> sentences;
    size_t line_start = 0;
    while (line_start <= bytes.size()) {
        size_t nl = bytes.find('\n', line_start);
        size_t line_end = (nl == std::string::npos) ? bytes.size() : nl;
        std::string_view line(bytes.data() + line_start, line_end - line_start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        utf8_length(line, line_start);  // validates; throws EncodingError with file offset
        if (!line.empty()) sentences.emplace_back(line);
        if (nl == std::string::npos) break;
        line_start = nl + 1;
    }
    if (sentences.empty()) raise(Err::EmptyCorpus, "no sentences in " + path.string());
    return RawCorpus::from_sentences(std::move(sentences));
}

CorpusSplits split_corpus(const RawCorpus& corpus, uint64_t split_seed) {
    if (corpus.empty()) raise(Err::EmptyCorpus, "cannot split an empty corpus");
    const size_t n = corpus.sentences.size();
    const size_t n_valid = n / 10;
    const size_t n_test = n / 10;

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(split_seed);
    rng.shuffle(std::span<uint32_t>(order));

    // 0 = train, 1 = validation, 2 = test; file order preserved per split
    std::vector<uint8_t> bucket(n, 0);
    for (size_t i = 0; i < n_valid; ++i) bucket[order[i]] = 1;
    for (size_t i = n_valid; i < n_valid + n_test; ++i) bucket[order[i]] = 2;

    std::vector<std::string> train, valid, test;
    for (size_t i = 0; i < n; ++i) {
        switch (bucket[i]) {
            case 1: valid.push_back(corpus.sentences[i]); break;
            case 2: test.push_back(corpus.sentences[i]); break;
            default: train.push_back(corpus.sentences[i]); break;
        }
    }
    CorpusSplits splits;
    splits.train = RawCorpus::from_sentences(std::move(train));
    splits.validation = RawCorpus::from_sentences(std::move(valid));
    splits.test = RawCorpus::from_sentences(std::move(test));
    return splits;
}

CorpusSplits load_corpus(const std::filesystem::path& path, uint64_t split_seed) {
    return split_corpus(read_corpus(path), split_seed);
}

LengthStats sentence_stats(const RawCorpus& corpus) {
    if (corpus.empty()) raise(Err::EmptyCorpus, "sentence_stats on empty corpus");
    LengthStats stats;
    std::map<char32_t, uint64_t> first_counts;
    double sum = 0.0, sum_sq = 0.0;
    for (const std::string& s : corpus.sentences) {
        double len = double(utf8_length(s));
        sum += len;
        sum_sq += len * len;
        ++first_counts[utf8_first(s)];
    }
    const double n = double(corpus.sentences.size());
    stats.mean_len = sum / n;
    double variance = sum_sq / n - stats.mean_len * stats.mean_len;
    stats.std_len = variance > 0.0 ? std::sqrt(variance) : 0.0;
    for (auto [cp, count] : first_counts) stats.initial_char_dist[cp] = double(count) / n;
    return stats;
}

void write_corpus(const RawCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    for (const std::string& s : corpus.sentences) out << s << '\n';
    if (!out) raise(Err::IoError, "write failed for " + path.string());
}

void write_splits(const CorpusSplits& splits, const std::filesystem::path& prefix) {
    write_corpus(splits.train, prefix.string() + ".train");
    write_corpus(splits.validation, prefix.string() + ".valid");
    write_corpus(splits.test, prefix.string() + ".test");
}

}  // namespace catlm
