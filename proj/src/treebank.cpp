#include "catlm/treebank.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "catlm/error.hpp"

namespace catlm {

std::vector<std::vector<int>> DepTree::child_lists() const {
    std::vector<std::vector<int>> children(tokens.size() + 1);
    for (const TokenNode& t : tokens) children[size_t(t.head)].push_back(t.id);
    return children;
}

int DepTree::root_id() const {
    for (const TokenNode& t : tokens)
        if (t.head == 0) return t.id;
    return 0;
}

void validate_tree(const DepTree& tree, size_t sentence_index) {
    const size_t n = tree.tokens.size();
    const std::string where = "sentence " + std::to_string(sentence_index);
    require(n > 0, Err::MalformedTree, where + ": no tokens");
    for (size_t i = 0; i < n; ++i) {
        const TokenNode& t = tree.tokens[i];
        require(t.id == int(i) + 1, Err::MalformedTree,
                where + ": token ids not consecutive at position " + std::to_string(i + 1));
        require(t.head >= 0 && t.head <= int(n), Err::MalformedTree,
                where + ": head " + std::to_string(t.head) + " out of range for " +
                    std::to_string(n) + " tokens");
    }
    int roots = 0;
    for (const TokenNode& t : tree.tokens) roots += (t.head == 0);
    require(roots <= 1, Err::MultiRooted, where + ": " + std::to_string(roots) + " roots");
    require(roots == 1, Err::CyclicTree, where + ": no root (head references form a cycle)");
    // walk each node to the root; a walk longer than n means a cycle
    for (const TokenNode& t : tree.tokens) {
        int cur = t.id;
        size_t steps = 0;
        while (cur != 0) {
            cur = tree.tokens[size_t(cur) - 1].head;
            if (++steps > n)
                raise(Err::CyclicTree, where + ": cycle through token " + std::to_string(t.id));
        }
    }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    size_t start = 0;
    for (;;) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

bool is_plain_id(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// Flushes one sentence block; returns true if a token block existed.
bool finish_sentence(std::vector<DepTree>& out, DepTree& tree, size_t index, ParsePolicy policy,
                     std::ostream* warn) {
    if (tree.tokens.empty()) {  // nothing pending, or a comment-only block
        tree = DepTree{};
        return false;
    }
    try {
        validate_tree(tree, index);
        out.push_back(std::move(tree));
    } catch (const CatlmError& e) {
        if (policy == ParsePolicy::Strict) throw;
        if (warn) *warn << "[warn] skipping invalid tree: " << e.what() << "\n";
    }
    tree = DepTree{};
    return true;
}

}  // namespace

std::vector<DepTree> parse_conllu(std::istream& in, ParsePolicy policy, std::ostream* warn) {
    std::vector<DepTree> trees;
    DepTree current;
    std::string line;
    size_t line_no = 0;
    size_t sentence_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (finish_sentence(trees, current, sentence_index, policy, warn)) ++sentence_index;
            continue;
        }
        if (line[0] == '#') {
            const std::string text_key = "# text = ";
            if (line.rfind(text_key, 0) == 0) current.sentence_text = line.substr(text_key.size());
            continue;
        }
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 10)
            raise(Err::MalformedLine, "line " + std::to_string(line_no) + ": expected 10 columns, got " +
                                          std::to_string(cols.size()));
        if (!is_plain_id(cols[0])) continue;  // multiword range "3-4" or empty node "5.1"
        TokenNode t;
        t.id = std::atoi(cols[0].c_str());
        t.form = cols[1];
        t.lemma = cols[2];
        t.upos = cols[3];
        t.xpos = cols[4];
        t.feats = cols[5];
        if (!is_plain_id(cols[6]))
            raise(Err::MalformedLine, "line " + std::to_string(line_no) + ": HEAD is not an integer");
        t.head = std::atoi(cols[6].c_str());
        t.deprel = cols[7];
        t.deps = cols[8];
        t.misc = cols[9];
        current.tokens.push_back(std::move(t));
    }
    finish_sentence(trees, current, sentence_index, policy, warn);
    return trees;
}

std::vector<DepTree> parse_conllu_file(const std::filesystem::path& path, ParsePolicy policy,
                                       std::ostream* warn) {
    std::ifstream in(path);
    if (!in) raise(Err::IoError, "cannot open " + path.string());
    return parse_conllu(in, policy, warn);
}

void write_conllu(std::ostream& out, const DepTree& tree) {
    std::string text = tree.sentence_text;
    if (text.empty()) {
        for (size_t i = 0; i < tree.tokens.size(); ++i) {
            if (i) text += ' ';
            text += tree.tokens[i].form;
        }
    }
    out << "# text = " << text << '\n';
    for (const TokenNode& t : tree.tokens) {
        out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t'
            << t.feats << '\t' << t.head << '\t' << t.deprel << '\t' << t.deps << '\t' << t.misc
            << '\n';
    }
    out << '\n';
}

void write_conllu(std::ostream& out, std::span<const DepTree> trees) {
    for (const DepTree& t : trees) write_conllu(out, t);
}

void write_conllu_file(const std::filesystem::path& path, std::span<const DepTree> trees) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    write_conllu(out, trees);
    if (!out) raise(Err::IoError, "write failed for " + path.string());
}

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string read_excerpt(const std::filesystem::path& path, size_t max_bytes = 400) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::string buf(max_bytes, '\0');
    in.read(buf.data(), std::streamsize(max_bytes));
    buf.resize(size_t(in.gcount()));
    while (!buf.empty() && (buf.back() == '\n' || buf.back() == '\r')) buf.pop_back();
    return buf;
}

}  // namespace

void run_annotator(const std::filesystem::path& input_text, const std::string& command_template,
                   const std::filesystem::path& output_conllu) {
    require(command_template.find("{input}") != std::string::npos &&
                command_template.find("{output}") != std::string::npos,
            Err::ConfigError, "annotator command needs {input} and {output} placeholders");
    std::string cmd = replace_all(command_template, "{input}", input_text.string());
    cmd = replace_all(cmd, "{output}", output_conllu.string());

    const auto stderr_path = output_conllu.string() + ".stderr";
    // run via a script file so the command may contain quotes or comments
    const auto script_path = output_conllu.string() + ".cmd.sh";
    {
        std::ofstream script(script_path);
        script << cmd << "\n";
        if (!script) raise(Err::IoError, "cannot write " + script_path);
    }
    std::string shell = "/bin/sh \"" + script_path + "\" 2> \"" + stderr_path + "\"";
    int rc = std::system(shell.c_str());
    int exit_code = (rc == -1) ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : 128 + WTERMSIG(rc));
    if (exit_code != 0)
        raise(Err::AnnotatorFailed, "exit code " + std::to_string(exit_code) + "; stderr: " +
                                        read_excerpt(stderr_path));
    std::error_code ec;
    std::filesystem::remove(script_path, ec);
    std::filesystem::remove(stderr_path, ec);
}

std::vector<DepTree> annotate_external(const RawCorpus& text, const std::string& command_template,
                                       const std::filesystem::path& work_dir, ParsePolicy policy,
                                       std::ostream* warn) {
    std::filesystem::create_directories(work_dir);
    const auto input_path = work_dir / "annotate_input.txt";
    const auto output_path = work_dir / "annotate_output.conllu";
    write_corpus(text, input_path);
    run_annotator(input_path, command_template, output_path);
    return parse_conllu_file(output_path, policy, warn);
}

}  // namespace catlm
