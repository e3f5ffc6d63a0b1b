#include "catlm/toytext.hpp"

#include <algorithm>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"

namespace catlm::toytext {

namespace {

struct WeightedWord {
    const char* word;
    double weight;
};

const WeightedWord kDet[] = {{"the", 10}, {"a", 8}, {"every", 2}, {"his", 3}, {"her", 3}};
const WeightedWord kAdj[] = {{"little", 4}, {"big", 4},   {"red", 3},
                             {"happy", 2},  {"old", 2},   {"funny", 1}};
const WeightedWord kNoun[] = {{"cat", 8},  {"dog", 8},  {"bird", 5}, {"lamb", 3}, {"girl", 6},
                              {"boy", 6},  {"ball", 5}, {"fish", 4}, {"cake", 3}, {"tree", 3},
                              {"house", 4}, {"car", 3},  {"book", 3}, {"duck", 2}, {"horse", 2}};
const WeightedWord kVerbTrans[] = {{"sees", 6},  {"likes", 6}, {"wants", 5}, {"finds", 4},
                                   {"eats", 4},  {"chases", 3}, {"holds", 2}, {"draws", 2}};
const WeightedWord kVerbIntrans[] = {{"sleeps", 4}, {"runs", 5},  {"jumps", 4},
                                     {"smiles", 3}, {"waits", 2}, {"swims", 2}};
const WeightedWord kVerbTransBase[] = {{"see", 6}, {"like", 6},  {"want", 5}, {"find", 4},
                                       {"eat", 4}, {"chase", 3}, {"hold", 2}, {"draw", 2}};
const WeightedWord kVerbIntransBase[] = {{"sleep", 4}, {"run", 5},  {"jump", 4},
                                         {"smile", 3}, {"wait", 2}, {"swim", 2}};
const WeightedWord kAux[] = {{"can", 5}, {"will", 4}, {"must", 2}};
const WeightedWord kAdv[] = {{"now", 3}, {"here", 3}, {"again", 3}, {"quickly", 2}, {"slowly", 2}};
const WeightedWord kPron[] = {{"she", 5}, {"he", 5}, {"it", 4}};
const WeightedWord kAdp[] = {{"in", 4}, {"on", 4}, {"near", 3}, {"with", 3}};
const WeightedWord kPunct[] = {{".", 9}, {"!", 1}};

template <size_t N>
const char* pick(Rng& rng, const WeightedWord (&words)[N]) {
    double total = 0.0;
    for (const WeightedWord& w : words) total += w.weight;
    double x = rng.next_double() * total;
    for (const WeightedWord& w : words) {
        x -= w.weight;
        if (x <= 0.0) return w.word;
    }
    return words[N - 1].word;
}

void emit_np(Rng& rng, std::vector<std::string>& out, int depth) {
    if (depth == 0 && rng.next_double() < 0.25) {
        out.push_back(pick(rng, kPron));
        return;
    }
    out.push_back(pick(rng, kDet));
    double adj_roll = rng.next_double();
    if (adj_roll < 0.35) out.push_back(pick(rng, kAdj));
    if (adj_roll < 0.08) out.push_back(pick(rng, kAdj));
    out.push_back(pick(rng, kNoun));
    if (depth == 0 && rng.next_double() < 0.12) {
        out.push_back(pick(rng, kAdp));
        emit_np(rng, out, depth + 1);
    }
}

void emit_sentence(Rng& rng, std::vector<std::string>& out) {
    emit_np(rng, out, 0);
    double form = rng.next_double();
    if (form < 0.30) {
        out.push_back(pick(rng, kVerbIntrans));
        if (rng.next_double() < 0.30) out.push_back(pick(rng, kAdv));
    } else if (form < 0.75) {
        out.push_back(pick(rng, kVerbTrans));
        emit_np(rng, out, 0);
        if (rng.next_double() < 0.15) out.push_back(pick(rng, kAdv));
    } else {
        out.push_back(pick(rng, kAux));
        if (rng.next_double() < 0.55) {
            out.push_back(pick(rng, kVerbTransBase));
            emit_np(rng, out, 0);
        } else {
            out.push_back(pick(rng, kVerbIntransBase));
        }
    }
    out.push_back(pick(rng, kPunct));
}

enum class Tag { Det, Adj, Noun, Verb, Aux, Adv, Pron, Adp, Punct, Unknown };

const std::unordered_map<std::string_view, Tag>& lexicon() {
    static const std::unordered_map<std::string_view, Tag> table = [] {
        std::unordered_map<std::string_view, Tag> t;
        for (const auto& w : kDet) t[w.word] = Tag::Det;
        for (const auto& w : kAdj) t[w.word] = Tag::Adj;
        for (const auto& w : kNoun) t[w.word] = Tag::Noun;
        for (const auto& w : kVerbTrans) t[w.word] = Tag::Verb;
        for (const auto& w : kVerbIntrans) t[w.word] = Tag::Verb;
        for (const auto& w : kVerbTransBase) t[w.word] = Tag::Verb;
        for (const auto& w : kVerbIntransBase) t[w.word] = Tag::Verb;
        for (const auto& w : kAux) t[w.word] = Tag::Aux;
        for (const auto& w : kAdv) t[w.word] = Tag::Adv;
        for (const auto& w : kPron) t[w.word] = Tag::Pron;
        for (const auto& w : kAdp) t[w.word] = Tag::Adp;
        for (const auto& w : kPunct) t[w.word] = Tag::Punct;
        return t;
    }();
    return table;
}

const char* upos_of(Tag tag) {
    switch (tag) {
        case Tag::Det: return "DET";
        case Tag::Adj: return "ADJ";
        case Tag::Noun: return "NOUN";
        case Tag::Verb: return "VERB";
        case Tag::Aux: return "AUX";
        case Tag::Adv: return "ADV";
        case Tag::Pron: return "PRON";
        case Tag::Adp: return "ADP";
        case Tag::Punct: return "PUNCT";
        case Tag::Unknown: return "X";
    }
    return "X";
}

bool nominal(Tag t) { return t == Tag::Noun || t == Tag::Pron; }

}  // namespace

std::vector<std::string> generate(const GenConfig& config) {
    require(config.target_tokens >= 1, Err::ConfigError, "target_tokens must be >= 1");
    Rng rng(config.seed);
    std::vector<std::string> sentences;
    uint64_t tokens = 0;
    std::vector<std::string> words;
    while (tokens < config.target_tokens) {
        words.clear();
        emit_sentence(rng, words);
        std::string line;
        for (size_t i = 0; i < words.size(); ++i) {
            if (i) line += ' ';
            line += words[i];
        }
        tokens += words.size();
        sentences.push_back(std::move(line));
    }
    return sentences;
}

DepTree parse_sentence(const std::string& sentence) {
    std::vector<std::string> words;
    {
        std::istringstream in(sentence);
        std::string w;
        while (in >> w) words.push_back(w);
    }
    DepTree tree;
    tree.sentence_text = sentence;
    if (words.empty()) return tree;

    const int n = int(words.size());
    std::vector<Tag> tags(words.size());
    const auto& lex = lexicon();
    for (size_t i = 0; i < words.size(); ++i) {
        auto it = lex.find(words[i]);
        tags[i] = it == lex.end() ? Tag::Unknown : it->second;
    }

    int root = 0;
    for (int i = 0; i < n; ++i)
        if (tags[size_t(i)] == Tag::Verb) {
            root = i;
            break;
        }

    auto nearest_right = [&](int from, auto pred) -> int {
        for (int j = from + 1; j < n; ++j)
            if (pred(tags[size_t(j)])) return j;
        return -1;
    };

    // PP objects: the nearest nominal right of each adposition
    std::vector<bool> is_pp_noun(words.size(), false);
    for (int i = 0; i < n; ++i)
        if (tags[size_t(i)] == Tag::Adp) {
            int j = nearest_right(i, nominal);
            if (j >= 0) is_pp_noun[size_t(j)] = true;
        }
    int subject = -1;  // rightmost nominal left of the root
    for (int i = 0; i < root; ++i)
        if (nominal(tags[size_t(i)])) subject = i;
    int object = -1;  // first non-PP nominal right of the root
    for (int i = root + 1; i < n; ++i)
        if (nominal(tags[size_t(i)]) && !is_pp_noun[size_t(i)]) {
            object = i;
            break;
        }

    std::vector<int> head(words.size(), root);
    std::vector<std::string> rel(words.size(), "dep");
    for (int i = 0; i < n; ++i) {
        if (i == root) continue;
        switch (tags[size_t(i)]) {
            case Tag::Det:
            case Tag::Adj: {
                int j = nearest_right(i, [](Tag t) { return t == Tag::Noun; });
                if (j >= 0) {
                    head[size_t(i)] = j;
                    rel[size_t(i)] = tags[size_t(i)] == Tag::Det ? "det" : "amod";
                }
                break;
            }
            case Tag::Aux: {
                int j = nearest_right(i, [](Tag t) { return t == Tag::Verb; });
                if (j >= 0) {
                    head[size_t(i)] = j;
                    rel[size_t(i)] = "aux";
                }
                break;
            }
            case Tag::Adv:
                rel[size_t(i)] = "advmod";
                break;
            case Tag::Adp: {
                int j = nearest_right(i, nominal);
                if (j >= 0) {
                    head[size_t(i)] = j;
                    rel[size_t(i)] = "case";
                }
                break;
            }
            case Tag::Noun:
            case Tag::Pron: {
                if (i == subject) {
                    rel[size_t(i)] = "nsubj";
                } else if (i < root) {
                    // pre-verbal nominal before the subject: lean on the next one
                    int j = nearest_right(i, nominal);
                    if (j >= 0 && j <= subject) {
                        head[size_t(i)] = j;
                        rel[size_t(i)] = "nmod";
                    }
                } else if (is_pp_noun[size_t(i)]) {
                    int j = -1;
                    for (int k = i - 1; k > root; --k)
                        if (nominal(tags[size_t(k)])) {
                            j = k;
                            break;
                        }
                    if (j >= 0) {
                        head[size_t(i)] = j;
                        rel[size_t(i)] = "nmod";
                    } else {
                        rel[size_t(i)] = "obl";
                    }
                } else if (i == object) {
                    rel[size_t(i)] = "obj";
                }
                break;
            }
            case Tag::Verb:
                rel[size_t(i)] = "conj";
                break;
            case Tag::Punct:
                rel[size_t(i)] = "punct";
                break;
            case Tag::Unknown:
                break;
        }
    }

    for (int i = 0; i < n; ++i) {
        TokenNode t;
        t.id = i + 1;
        t.form = words[size_t(i)];
        t.upos = upos_of(tags[size_t(i)]);
        t.head = (i == root) ? 0 : head[size_t(i)] + 1;
        t.deprel = (i == root) ? "root" : rel[size_t(i)];
        tree.tokens.push_back(std::move(t));
    }
    try {
        validate_tree(tree);
    } catch (const CatlmError&) {
        // the rules above cannot chain into a cycle, but keep a flat
        // fallback so the annotator contract (always a valid tree) holds
        for (int i = 0; i < n; ++i) {
            tree.tokens[size_t(i)].head = (i == root) ? 0 : root + 1;
            tree.tokens[size_t(i)].deprel = (i == root) ? "root" : "dep";
        }
    }
    return tree;
}

std::vector<DepTree> parse(const RawCorpus& text) {
    std::vector<DepTree> trees;
    trees.reserve(text.sentences.size());
    for (const std::string& s : text.sentences) {
        DepTree tree = parse_sentence(s);
        if (!tree.tokens.empty()) trees.push_back(std::move(tree));
    }
    return trees;
}

}  // namespace catlm::toytext
