// Fixture annotator for the toy lexicon: reads raw text (one sentence per
// line), writes CoNLL-U. Usable wherever an external annotator command is
// expected: toyparse INPUT OUTPUT.

#include <fstream>
#include <iostream>

#include "catlm/corpus.hpp"
#include "catlm/error.hpp"
#include "catlm/toytext.hpp"
#include "catlm/treebank.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: toyparse INPUT OUTPUT\n";
        return 2;
    }
    try {
        auto corpus = catlm::read_corpus(argv[1]);
        auto trees = catlm::toytext::parse(corpus);
        catlm::write_conllu_file(argv[2], trees);
    } catch (const catlm::CatlmError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
