#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "catlm/treebank.hpp"
#include "support/oracles.hpp"

using namespace catlm;
namespace fs = std::filesystem;

namespace {

std::string conllu_line(int id, const std::string& form, const std::string& upos, int head,
                        const std::string& deprel) {
    return std::to_string(id) + "\t" + form + "\t_\t" + upos + "\t_\t_\t" + std::to_string(head) +
           "\t" + deprel + "\t_\t_\n";
}

}  // namespace

TEST_SUITE("treebank") {

TEST_CASE("minimal two-token sentence") {
    std::istringstream in("# text = hi .\n" + conllu_line(1, "hi", "INTJ", 0, "root") +
                          conllu_line(2, ".", "PUNCT", 1, "punct") + "\n");
    auto trees = parse_conllu(in);
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].tokens.size() == 2);
    CHECK(trees[0].root_id() == 1);
    CHECK(trees[0].tokens[0].form == "hi");
    CHECK(trees[0].sentence_text == "hi .");
}

TEST_CASE("multiword ranges and empty nodes are skipped") {
    std::string block = conllu_line(1, "don't", "X", 0, "root");
    block.insert(0, "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n");
    block += "1.1\telided\t_\t_\t_\t_\t_\t_\t_\t_\n";
    std::istringstream in(block + "\n");
    auto trees = parse_conllu(in);
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].tokens.size() == 1);
}

TEST_CASE("head out of range raises MalformedTree") {
    std::istringstream in(conllu_line(1, "a", "X", 99, "dep") + "\n");
    try {
        parse_conllu(in);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::MalformedTree);
    }
}

TEST_CASE("two-cycle raises CyclicTree") {
    std::istringstream in(conllu_line(1, "a", "X", 2, "dep") + conllu_line(2, "b", "X", 1, "dep") +
                          "\n");
    try {
        parse_conllu(in);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::CyclicTree);
    }
}

TEST_CASE("multiple roots raise MultiRooted") {
    std::istringstream in(conllu_line(1, "a", "X", 0, "root") + conllu_line(2, "b", "X", 0, "root") +
                          "\n");
    try {
        parse_conllu(in);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::MultiRooted);
    }
}

TEST_CASE("wrong column count raises MalformedLine with line number") {
    std::istringstream in("1\tonly\tthree\n\n");
    try {
        parse_conllu(in);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::MalformedLine);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("SkipInvalid drops bad trees and keeps good ones") {
    std::string text = conllu_line(1, "ok", "X", 0, "root") + "\n" +
                       conllu_line(1, "bad", "X", 7, "dep") + "\n" +
                       conllu_line(1, "fine", "X", 0, "root") + "\n";
    std::istringstream in(text);
    std::ostringstream warnings;
    auto trees = parse_conllu(in, ParsePolicy::SkipInvalid, &warnings);
    CHECK(trees.size() == 2);
    CHECK(warnings.str().find("skipping invalid tree") != std::string::npos);
}

TEST_CASE("round trip preserves retained columns on random trees") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + int(rng.next_below(12));
        DepTree tree = testsupport::random_tree(n, rng);
        std::ostringstream out;
        write_conllu(out, tree);
        std::istringstream in(out.str());
        auto back = parse_conllu(in);
        REQUIRE(back.size() == 1);
        REQUIRE(back[0].tokens.size() == tree.tokens.size());
        for (size_t i = 0; i < tree.tokens.size(); ++i) {
            CHECK(back[0].tokens[i].id == tree.tokens[i].id);
            CHECK(back[0].tokens[i].form == tree.tokens[i].form);
            CHECK(back[0].tokens[i].upos == tree.tokens[i].upos);
            CHECK(back[0].tokens[i].head == tree.tokens[i].head);
            CHECK(back[0].tokens[i].deprel == tree.tokens[i].deprel);
        }
        // parsed trees satisfy the structural invariants by construction
        validate_tree(back[0]);
    }
}

TEST_CASE("annotate_external with a pass-through fixture") {
    fs::path work = fs::temp_directory_path() / "catlm_annotate_test";
    fs::create_directories(work);
    fs::path fixture = work / "fixture.conllu";
    {
        std::ofstream out(fixture);
        out << "# text = a b\n"
            << conllu_line(1, "a", "DET", 2, "det") << conllu_line(2, "b", "NOUN", 0, "root")
            << "\n";
    }
    auto corpus = RawCorpus::from_sentences({"a b"});
    std::string command = "cp " + fixture.string() + " {output} && cat {input} > /dev/null";
    auto trees = annotate_external(corpus, command, work);
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].tokens.size() == 2);
    auto direct = parse_conllu_file(fixture);
    CHECK(direct[0].tokens.size() == trees[0].tokens.size());
    fs::remove_all(work);
}

TEST_CASE("annotate_external failure carries exit code and stderr") {
    fs::path work = fs::temp_directory_path() / "catlm_annotate_fail";
    auto corpus = RawCorpus::from_sentences({"x"});
    try {
        annotate_external(corpus, "echo boom >&2; cat {input} > /dev/null; false # {output}", work);
        CHECK(false);
    } catch (const CatlmError& e) {
        CHECK(e.code() == Err::AnnotatorFailed);
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
    fs::remove_all(work);
}

TEST_CASE("annotate_external preserves sentence order") {
    fs::path work = fs::temp_directory_path() / "catlm_annotate_order";
    fs::create_directories(work);
    // stub annotator: one single-token tree per input line
    fs::path script = work / "stub.sh";
    {
        std::ofstream out(script);
        out << "#!/bin/sh\nn=0\nwhile IFS= read -r line; do\n"
            << "  n=$((n+1))\n"
            << "  printf '1\\t%s\\t_\\tX\\t_\\t_\\t0\\troot\\t_\\t_\\n\\n' \"$(echo $line | cut -d' ' -f1)\"\n"
            << "done < \"$1\" > \"$2\"\n";
    }
    fs::permissions(script, fs::perms::owner_all);
    auto corpus = RawCorpus::from_sentences({"first x", "second y", "third z"});
    auto trees = annotate_external(corpus, script.string() + " {input} {output}", work);
    REQUIRE(trees.size() == 3);
    CHECK(trees[0].tokens[0].form == "first");
    CHECK(trees[1].tokens[0].form == "second");
    CHECK(trees[2].tokens[0].form == "third");
    fs::remove_all(work);
}

TEST_CASE("missing placeholders rejected") {
    auto corpus = RawCorpus::from_sentences({"x"});
    CHECK_THROWS_AS(annotate_external(corpus, "cat", "/tmp/catlm_nowhere"), CatlmError);
}

}  // TEST_SUITE
