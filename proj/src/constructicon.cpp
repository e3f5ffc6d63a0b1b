#include "catlm/constructicon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

#include "catlm/error.hpp"
#include "catlm/stats.hpp"

namespace catlm {

namespace {

std::vector<std::string_view> split_spaces(std::string_view s) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    for (;;) {
        size_t sp = s.find(' ', start);
        if (sp == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, sp - start));
        start = sp + 1;
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

uint32_t Constructicon::intern(std::string_view element) {
    auto it = element_ids_.find(element);
    if (it != element_ids_.end()) return it->second;
    uint32_t id = uint32_t(elements_.size());
    elements_.emplace_back(element);
    element_ids_.emplace(elements_.back(), id);
    return id;
}

std::string Constructicon::rendering_string(const ElemSeq& seq) const {
    std::string out;
    for (size_t i = 0; i < seq.arity; ++i) {
        if (i) out += ' ';
        out += elements_[seq.elems[i]];
    }
    return out;
}

ElemSeq Constructicon::seq_of(std::string_view rendering, bool* known) const {
    *known = false;
    ElemSeq seq;
    if (rendering.empty()) return seq;
    auto parts = split_spaces(rendering);
    if (parts.size() > ElemSeq::kMaxArity) return seq;
    for (std::string_view part : parts) {
        auto it = element_ids_.find(part);
        if (it == element_ids_.end()) return seq;
        seq.elems[seq.arity++] = it->second;
    }
    *known = true;
    return seq;
}

bool Constructicon::rendering_less(const ElemSeq& a, const ElemSeq& b) const {
    // compares the space-joined strings without building them
    auto next = [this](const ElemSeq& s, size_t& elem, size_t& chr) -> int {
        while (elem < s.arity) {
            const std::string& e = elements_[s.elems[elem]];
            if (chr < e.size()) return static_cast<unsigned char>(e[chr++]);
            ++elem;
            chr = 0;
            if (elem < s.arity) return ' ';
        }
        return -1;
    };
    size_t ea = 0, ca = 0, eb = 0, cb = 0;
    for (;;) {
        int x = next(a, ea, ca);
        int y = next(b, eb, cb);
        if (x != y) return x < y;
        if (x == -1) return false;
    }
}

Constructicon Constructicon::build(std::span<const DepTree> trees, const BuildParams& params) {
    require(params.max_catena_len >= 1 && params.max_catena_len <= int(ElemSeq::kMaxArity),
            Err::ConfigError, "max_catena_len must be in [1, 8]");
    require(params.min_sent_len >= 1 && params.max_sent_len >= params.min_sent_len,
            Err::ConfigError, "invalid sentence length bounds");

    Constructicon c;
    std::vector<std::array<uint32_t, 3>> token_elems;
    std::vector<Level> levels;
    bool any_sentence = false;
    for (const DepTree& tree : trees) {
        const int n_tokens = int(tree.tokens.size());
        if (n_tokens < params.min_sent_len || n_tokens > params.max_sent_len) continue;
        any_sentence = true;
        token_elems.resize(size_t(n_tokens));
        for (int i = 0; i < n_tokens; ++i) {
            const TokenNode& t = tree.tokens[size_t(i)];
            token_elems[size_t(i)] = {c.intern(element(t, Level::Lex)),
                                      c.intern(element(t, Level::Pos)),
                                      c.intern(element(t, Level::Rel))};
        }
        for (const NodeSet& nodes : catena_node_sets(tree, params.max_catena_len)) {
            const size_t k = nodes.size();
            ElemSeq seq;
            seq.arity = uint8_t(k);
            if (!params.all_mixes) {
                for (size_t i = 0; i < k; ++i)
                    seq.elems[i] = token_elems[size_t(nodes[i]) - 1][size_t(params.single_level)];
                ++c.entries_[seq].freq;
                continue;
            }
            size_t combos = 1;
            for (size_t i = 0; i < k; ++i) combos *= 3;
            for (size_t m = 0; m < combos; ++m) {
                size_t rest = m;
                for (size_t i = 0; i < k; ++i) {
                    seq.elems[i] = token_elems[size_t(nodes[i]) - 1][rest % 3];
                    rest /= 3;
                }
                ++c.entries_[seq].freq;
            }
        }
    }
    require(any_sentence, Err::EmptyConstructicon,
            "no sentence between " + std::to_string(params.min_sent_len) + " and " +
                std::to_string(params.max_sent_len) + " tokens");
    c.finalize(params.min_freq);
    return c;
}

Constructicon Constructicon::from_counts(
    const std::vector<std::pair<std::string, uint64_t>>& counts) {
    Constructicon c;
    for (const auto& [rendering, freq] : counts) {
        require(!rendering.empty(), Err::ConfigError, "empty rendering");
        require(freq >= 1, Err::ConfigError, "zero count for \"" + rendering + "\"");
        auto parts = split_spaces(rendering);
        require(parts.size() <= ElemSeq::kMaxArity, Err::ConfigError,
                "rendering arity exceeds " + std::to_string(ElemSeq::kMaxArity));
        ElemSeq seq;
        for (std::string_view part : parts) seq.elems[seq.arity++] = c.intern(part);
        c.entries_[seq].freq += freq;
    }
    c.finalize(1);
    return c;
}

void Constructicon::finalize(uint64_t min_freq) {
    if (min_freq > 1)
        std::erase_if(entries_, [&](const auto& kv) { return kv.second.freq < min_freq; });
    require(!entries_.empty(), Err::EmptyConstructicon, "no renderings retained");

    element_counts_.assign(elements_.size(), 0);
    for (const auto& [seq, entry] : entries_)
        if (seq.arity == 1) element_counts_[seq.elems[0]] += entry.freq;

    // The frequency floor can orphan a rendering: distinct node sets may
    // share an abstract rendering, so its count can exceed the singleton
    // count of one of its elements, and the floor may then drop that
    // singleton. Without singleton evidence the marginal (and MI) is
    // undefined, so such renderings are pruned with it.
    if (min_freq > 1) {
        std::erase_if(entries_, [&](const auto& kv) {
            if (kv.first.arity < 2) return false;
            for (size_t i = 0; i < kv.first.arity; ++i)
                if (element_counts_[kv.first.elems[i]] == 0) return true;
            return false;
        });
        require(!entries_.empty(), Err::EmptyConstructicon, "no renderings retained");
    }

    arity_totals_.fill(0);
    for (const auto& [seq, entry] : entries_) arity_totals_[seq.arity] += entry.freq;

    const double singleton_total = double(arity_totals_[1]);
    for (auto& [seq, entry] : entries_) {
        if (seq.arity < 2) {
            entry.mi = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        require(singleton_total > 0.0, Err::InconsistentMarginal,
                "no single-element catenae to estimate marginals from");
        const double p_joint = double(entry.freq) / double(arity_totals_[seq.arity]);
        double log_marginals = 0.0;
        for (size_t i = 0; i < seq.arity; ++i) {
            uint64_t ec = element_counts_[seq.elems[i]];
            require(ec > 0, Err::InconsistentMarginal,
                    "element \"" + elements_[seq.elems[i]] + "\" has no singleton occurrences");
            log_marginals += std::log2(double(ec) / singleton_total);
        }
        entry.mi = double(entry.freq) * (std::log2(p_joint) - log_marginals);
    }
}

bool Constructicon::contains(std::string_view rendering) const {
    bool known = false;
    ElemSeq seq = seq_of(rendering, &known);
    return known && entries_.count(seq) > 0;
}

uint64_t Constructicon::frequency(std::string_view rendering) const {
    bool known = false;
    ElemSeq seq = seq_of(rendering, &known);
    if (!known) return 0;
    auto it = entries_.find(seq);
    return it == entries_.end() ? 0 : it->second.freq;
}

double Constructicon::mi(std::string_view rendering) const {
    bool known = false;
    ElemSeq seq = seq_of(rendering, &known);
    if (known) {
        auto it = entries_.find(seq);
        if (it != entries_.end()) {
            require(seq.arity >= 2, Err::ConfigError, "mi undefined for single-element catenae");
            return it->second.mi;
        }
    }
    raise(Err::UnknownCatena, "rendering not in inventory: \"" + std::string(rendering) + "\"");
}

uint64_t Constructicon::arity_total(size_t arity) const {
    return arity <= ElemSeq::kMaxArity ? arity_totals_[arity] : 0;
}

double Constructicon::score_of(const Entry& e, RankBy by) const {
    return by == RankBy::Mi ? e.mi : double(e.freq);
}

std::vector<std::string> Constructicon::top_k(size_t k, RankBy by) const {
    std::vector<const std::pair<const ElemSeq, Entry>*> items;
    items.reserve(entries_.size());
    for (const auto& kv : entries_) {
        if (by == RankBy::Mi && kv.first.arity < 2) continue;
        items.push_back(&kv);
    }
    auto less = [&](const auto* a, const auto* b) {
        double sa = score_of(a->second, by), sb = score_of(b->second, by);
        if (sa != sb) return sa > sb;
        return rendering_less(a->first, b->first);
    };
    const size_t take = std::min(k, items.size());
    std::partial_sort(items.begin(), items.begin() + long(take), items.end(), less);
    std::vector<std::string> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) out.push_back(rendering_string(items[i]->first));
    return out;
}

Constructicon::ComparisonReport Constructicon::compare(const Constructicon& a,
                                                       const Constructicon& b, size_t k,
                                                       RankBy by) {
    require(k >= 1, Err::ConfigError, "compare: k must be >= 1");
    std::vector<std::string> top_a = a.top_k(k, by);
    std::vector<std::string> top_b = b.top_k(k, by);

    std::vector<std::string> union_set;
    union_set.reserve(top_a.size() + top_b.size());
    union_set.insert(union_set.end(), top_a.begin(), top_a.end());
    union_set.insert(union_set.end(), top_b.begin(), top_b.end());
    std::sort(union_set.begin(), union_set.end());
    union_set.erase(std::unique(union_set.begin(), union_set.end()), union_set.end());
    require(union_set.size() >= 2, Err::TooFewItems,
            "comparison set has fewer than 2 renderings");

    auto score_in = [&](const Constructicon& c, const std::string& r) -> double {
        bool known = false;
        ElemSeq seq = c.seq_of(r, &known);
        if (!known) return 0.0;
        auto it = c.entries_.find(seq);
        if (it == c.entries_.end()) return 0.0;
        if (by == RankBy::Mi) return it->first.arity >= 2 ? it->second.mi : 0.0;
        return double(it->second.freq);
    };
    std::vector<double> xs, ys;
    xs.reserve(union_set.size());
    ys.reserve(union_set.size());
    for (const std::string& r : union_set) {
        xs.push_back(score_in(a, r));
        ys.push_back(score_in(b, r));
    }

    ComparisonReport report;
    report.k = k;
    report.spearman_rho = stats::spearman(xs, ys);
    std::sort(top_a.begin(), top_a.end());
    std::sort(top_b.begin(), top_b.end());
    std::vector<std::string> inter;
    std::set_intersection(top_a.begin(), top_a.end(), top_b.begin(), top_b.end(),
                          std::back_inserter(inter));
    report.overlap_size = inter.size();
    report.jaccard = union_set.empty() ? 0.0 : double(inter.size()) / double(union_set.size());
    return report;
}

void Constructicon::dump_tsv(std::ostream& out) const {
    std::vector<const std::pair<const ElemSeq, Entry>*> multi, single;
    for (const auto& kv : entries_) (kv.first.arity >= 2 ? multi : single).push_back(&kv);
    std::sort(multi.begin(), multi.end(), [&](const auto* a, const auto* b) {
        if (a->second.mi != b->second.mi) return a->second.mi > b->second.mi;
        return rendering_less(a->first, b->first);
    });
    std::sort(single.begin(), single.end(), [&](const auto* a, const auto* b) {
        if (a->second.freq != b->second.freq) return a->second.freq > b->second.freq;
        return rendering_less(a->first, b->first);
    });
    for (const auto* kv : multi)
        out << rendering_string(kv->first) << '\t' << int(kv->first.arity) << '\t'
            << kv->second.freq << '\t' << format_double(kv->second.mi) << '\n';
    for (const auto* kv : single)
        out << rendering_string(kv->first) << '\t' << 1 << '\t' << kv->second.freq << '\t' << "nan"
            << '\n';
}

Constructicon Constructicon::load_tsv(std::istream& in) {
    std::vector<std::pair<std::string, uint64_t>> counts;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        size_t t3 = t2 == std::string::npos ? std::string::npos : line.find('\t', t2 + 1);
        require(t3 != std::string::npos, Err::MalformedLine,
                "constructicon TSV line " + std::to_string(line_no) + ": expected 4 columns");
        std::string rendering = line.substr(0, t1);
        uint64_t freq = std::strtoull(line.substr(t2 + 1, t3 - t2 - 1).c_str(), nullptr, 10);
        counts.emplace_back(std::move(rendering), freq);
    }
    return from_counts(counts);
}

void Constructicon::for_each(const std::function<void(const std::string&, size_t, uint64_t,
                                                      double)>& fn) const {
    for (const auto& [seq, entry] : entries_)
        fn(rendering_string(seq), seq.arity, entry.freq, entry.mi);
}

}  // namespace catlm
