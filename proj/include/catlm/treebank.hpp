#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "catlm/corpus.hpp"

namespace catlm {

// One syntactic token. FORM/UPOS/HEAD/DEPREL drive the analysis; the other
// CoNLL-U columns are carried along so files round-trip.
struct TokenNode {
    int id = 0;  // 1-based
    std::string form;
    std::string upos = "_";
    int head = 0;  // 0 = root
    std::string deprel = "_";
    std::string lemma = "_", xpos = "_", feats = "_", deps = "_", misc = "_";
};

struct DepTree {
    std::vector<TokenNode> tokens;
    std::string sentence_text;  // "# text = ..." comment if present

    size_t size() const { return tokens.size(); }
    // child lists indexed by head id; index 0 holds the root's id
    std::vector<std::vector<int>> child_lists() const;
    int root_id() const;
};

enum class ParsePolicy {
    Strict,       // any invalid sentence aborts the parse
    SkipInvalid,  // invalid trees are dropped with a warning (parser noise)
};

// Throws MalformedTree / MultiRooted / CyclicTree with the sentence index.
void validate_tree(const DepTree& tree, size_t sentence_index = 0);

// CoNLL-U reader. Multiword-token ranges ("3-4") and empty nodes ("5.1")
// are skipped. Lines that are not 10 tab-separated columns raise
// MalformedLine regardless of policy.
std::vector<DepTree> parse_conllu(std::istream& in, ParsePolicy policy = ParsePolicy::Strict,
                                  std::ostream* warn = nullptr);
std::vector<DepTree> parse_conllu_file(const std::filesystem::path& path,
                                       ParsePolicy policy = ParsePolicy::Strict,
                                       std::ostream* warn = nullptr);

void write_conllu(std::ostream& out, const DepTree& tree);
void write_conllu(std::ostream& out, std::span<const DepTree> trees);
void write_conllu_file(const std::filesystem::path& path, std::span<const DepTree> trees);

// Substitutes {input}/{output} in the command template and runs it through
// /bin/sh with stderr captured next to the output. Raises AnnotatorFailed
// with the exit code and a stderr excerpt.
void run_annotator(const std::filesystem::path& input_text, const std::string& command_template,
                   const std::filesystem::path& output_conllu);

// Runs an external annotator over raw text. The command template must
// contain {input} and {output} placeholders; the command reads UTF-8 text
// from {input} and writes CoNLL-U to {output}, exiting 0 on success. The
// CoNLL-U output is kept in work_dir as the cache of the annotation.
std::vector<DepTree> annotate_external(const RawCorpus& text, const std::string& command_template,
                                       const std::filesystem::path& work_dir,
                                       ParsePolicy policy = ParsePolicy::SkipInvalid,
                                       std::ostream* warn = nullptr);

}  // namespace catlm
