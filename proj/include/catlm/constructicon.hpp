#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catlm/catenae.hpp"
#include "catlm/treebank.hpp"

namespace catlm {

// Interned rendering: element ids in sentence order. Keeps counting off the
// string allocator; element ids point into the constructicon's interner.
struct ElemSeq {
    static constexpr size_t kMaxArity = 8;
    std::array<uint32_t, kMaxArity> elems{};
    uint8_t arity = 0;

    bool operator==(const ElemSeq& o) const {
        if (arity != o.arity) return false;
        for (size_t i = 0; i < arity; ++i)
            if (elems[i] != o.elems[i]) return false;
        return true;
    }
};

struct ElemSeqHash {
    size_t operator()(const ElemSeq& s) const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (size_t i = 0; i < s.arity; ++i) {
            h ^= s.elems[i];
            h *= 0x100000001b3ULL;
        }
        h ^= s.arity;
        h *= 0x100000001b3ULL;
        return size_t(h);
    }
};

// Frequency- and mutual-information-indexed inventory of catena renderings
// for one text. Multivariate MI per rendering of arity n >= 2:
//   MI = f * log2( p_joint / prod_i p(x_i) )
// with p_joint = f / (total count at that arity) and the marginals
// estimated from the single-node catena inventory.
class Constructicon {
public:
    struct BuildParams {
        int min_sent_len = 1;
        int max_sent_len = 25;
        int max_catena_len = 5;
        uint64_t min_freq = 2;  // renderings below this are dropped after counting
        bool all_mixes = true;
        Level single_level = Level::Lex;
    };

    enum class RankBy { Mi, Frequency };

    struct ComparisonReport {
        double spearman_rho = 0.0;
        double jaccard = 0.0;
        size_t k = 0;
        size_t overlap_size = 0;
    };

    static Constructicon build(std::span<const DepTree> trees, const BuildParams& params);
    static Constructicon build(std::span<const DepTree> trees) {
        return build(trees, BuildParams());
    }

    // Rebuilds the inventory from explicit rendering counts (tests, TSV
    // load). Totals and MI are recomputed from the counts.
    static Constructicon from_counts(const std::vector<std::pair<std::string, uint64_t>>& counts);

    size_t size() const { return entries_.size(); }
    bool contains(std::string_view rendering) const;
    uint64_t frequency(std::string_view rendering) const;  // 0 if absent

    // Throws UnknownCatena for absent renderings, ConfigError for arity 1.
    double mi(std::string_view rendering) const;

    uint64_t arity_total(size_t arity) const;

    // Renderings ordered by score descending, ties broken lexicographically.
    // RankBy::Mi ranks only renderings of arity >= 2 (MI is undefined for
    // single elements); RankBy::Frequency ranks everything.
    std::vector<std::string> top_k(size_t k, RankBy by = RankBy::Mi) const;

    // Spearman rho over the union of both top-k lists (score 0 when a
    // rendering is missing from one side) plus Jaccard of the two sets.
    static ComparisonReport compare(const Constructicon& a, const Constructicon& b,
                                    size_t k = 10000, RankBy by = RankBy::Mi);

    // TSV: rendering \t arity \t frequency \t mi. Arity >= 2 first, MI
    // descending; single elements follow, frequency descending.
    void dump_tsv(std::ostream& out) const;
    static Constructicon load_tsv(std::istream& in);

    void for_each(const std::function<void(const std::string& rendering, size_t arity,
                                           uint64_t freq, double mi)>& fn) const;

private:
    struct Entry {
        uint64_t freq = 0;
        double mi = 0.0;  // NaN for arity 1
    };

    struct StringHash {
        using is_transparent = void;
        size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    uint32_t intern(std::string_view element);
    std::string rendering_string(const ElemSeq& seq) const;
    ElemSeq seq_of(std::string_view rendering, bool* known) const;
    void finalize(uint64_t min_freq);  // applies the frequency floor, totals, MI
    // lexicographic comparison of rendering strings without materializing them
    bool rendering_less(const ElemSeq& a, const ElemSeq& b) const;
    double score_of(const Entry& e, RankBy by) const;

    std::vector<std::string> elements_;
    std::unordered_map<std::string, uint32_t, StringHash, std::equal_to<>> element_ids_;
    std::unordered_map<ElemSeq, Entry, ElemSeqHash> entries_;
    std::array<uint64_t, ElemSeq::kMaxArity + 1> arity_totals_{};
    std::vector<uint64_t> element_counts_;  // arity-1 frequency per element id
};

}  // namespace catlm
