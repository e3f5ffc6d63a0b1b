#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "catlm/corpus.hpp"
#include "catlm/error.hpp"

using namespace catlm;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& bytes) {
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    return path;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("token counting") {
    CHECK(count_tokens("the cat sat .") == 4);
    CHECK(count_tokens("  spaced\tout  ") == 2);
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("one") == 1);
}

TEST_CASE("from_sentences computes counts and inventory") {
    auto corpus = RawCorpus::from_sentences({"ab c", "de"});
    CHECK(corpus.token_count == 3);
    CHECK(corpus.char_inventory.count(U'a') == 1);
    CHECK(corpus.char_inventory.count(RawCorpus::kEosMarker) == 1);
    // every text character plus exactly the reserved marker
    CHECK(corpus.char_inventory.size() == 7);  // a b c d e space \n
}

TEST_CASE("10-sentence file splits 8/1/1 and is deterministic") {
    std::string text;
    for (int i = 0; i < 10; ++i) text += "sentence number " + std::to_string(i) + "\n";
    auto path = write_temp("catlm_split_test.txt", text);
    auto splits = load_corpus(path, 1);
    CHECK(splits.train.sentences.size() == 8);
    CHECK(splits.validation.sentences.size() == 1);
    CHECK(splits.test.sentences.size() == 1);

    auto again = load_corpus(path, 1);
    CHECK(again.train.sentences == splits.train.sentences);
    CHECK(again.validation.sentences == splits.validation.sentences);
    CHECK(again.test.sentences == splits.test.sentences);

    auto other_seed = load_corpus(path, 2);
    CHECK(other_seed.train.sentences.size() == 8);
    fs::remove(path);
}

TEST_CASE("splitting partitions the corpus and keeps file order") {
    std::vector<std::string> sentences;
    for (int i = 0; i < 137; ++i) sentences.push_back("s" + std::to_string(i));
    auto corpus = RawCorpus::from_sentences(sentences);
    auto splits = split_corpus(corpus, 42);

    std::vector<std::string> all;
    for (const auto* part : {&splits.train, &splits.validation, &splits.test})
        all.insert(all.end(), part->sentences.begin(), part->sentences.end());
    CHECK(all.size() == sentences.size());
    std::sort(all.begin(), all.end());
    std::vector<std::string> expected = sentences;
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);

    // file order within each split: indices must be increasing
    auto index_of = [&](const std::string& s) {
        return std::stoi(s.substr(1));
    };
    for (const auto* part : {&splits.train, &splits.validation, &splits.test})
        for (size_t i = 1; i < part->sentences.size(); ++i)
            CHECK(index_of(part->sentences[i - 1]) < index_of(part->sentences[i]));

    CHECK(splits.validation.sentences.size() == 13);
    CHECK(splits.test.sentences.size() == 13);
}

TEST_CASE("empty and undecodable files") {
    auto empty = write_temp("catlm_empty.txt", "\n\n");
    CHECK_THROWS_AS(read_corpus(empty), CatlmError);
    fs::remove(empty);

    auto bad = write_temp("catlm_bad_utf8.txt", std::string("ok line\nbad \xff byte\n"));
    try {
        read_corpus(bad);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::EncodingError);
        CHECK(std::string(e.what()).find("12") != std::string::npos);  // byte offset of 0xff
    }
    fs::remove(bad);
}

TEST_CASE("sentence_stats single sentence") {
    auto corpus = RawCorpus::from_sentences({"abc"});
    auto stats = sentence_stats(corpus);
    CHECK(stats.mean_len == doctest::Approx(3.0));
    CHECK(stats.std_len == doctest::Approx(0.0));
    CHECK(stats.initial_char_dist.at(U'a') == doctest::Approx(1.0));
}

TEST_CASE("sentence_stats population deviation") {
    auto corpus = RawCorpus::from_sentences({"ab", "abcd"});
    auto stats = sentence_stats(corpus);
    CHECK(stats.mean_len == doctest::Approx(3.0));
    CHECK(stats.std_len == doctest::Approx(1.0));  // population, not sample
    CHECK(stats.initial_char_dist.at(U'a') == doctest::Approx(1.0));
}

TEST_CASE("sentence_stats symmetric initial distribution") {
    auto corpus = RawCorpus::from_sentences({"x one", "y two"});
    auto stats = sentence_stats(corpus);
    CHECK(stats.initial_char_dist.at(U'x') == doctest::Approx(0.5));
    CHECK(stats.initial_char_dist.at(U'y') == doctest::Approx(0.5));
    double total = 0;
    for (auto [cp, p] : stats.initial_char_dist) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sentence_stats is permutation invariant") {
    auto a = sentence_stats(RawCorpus::from_sentences({"one", "three", "fifteen"}));
    auto b = sentence_stats(RawCorpus::from_sentences({"fifteen", "one", "three"}));
    CHECK(a.mean_len == doctest::Approx(b.mean_len));
    CHECK(a.std_len == doctest::Approx(b.std_len));
    CHECK(a.initial_char_dist == b.initial_char_dist);
}

TEST_CASE("multibyte characters count as single code points") {
    auto corpus = RawCorpus::from_sentences({"héllo"});
    auto stats = sentence_stats(corpus);
    CHECK(stats.mean_len == doctest::Approx(5.0));
    CHECK(corpus.char_inventory.count(U'é') == 1);
}

TEST_CASE("write and re-read round trip") {
    auto corpus = RawCorpus::from_sentences({"a b", "c d e"});
    fs::path path = fs::temp_directory_path() / "catlm_roundtrip.txt";
    write_corpus(corpus, path);
    auto back = read_corpus(path);
    CHECK(back.sentences == corpus.sentences);
    CHECK(back.token_count == corpus.token_count);
    fs::remove(path);
}

}  // TEST_SUITE
