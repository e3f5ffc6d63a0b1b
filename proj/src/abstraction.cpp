#include "catlm/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <json.hpp>

#include "catlm/catenae.hpp"
#include "catlm/error.hpp"
#include "catlm/stats.hpp"

namespace catlm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int slot_level(std::string_view element) {
    if (element.starts_with('@')) return 2;
    if (element.starts_with('_')) return 1;
    return 0;
}

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

std::string format_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// valid (concrete mix, abstract mix) digit pairs for arity k, base-3 digits
std::vector<std::pair<uint16_t, uint16_t>> instance_mix_pairs(int k) {
    size_t combos = 1;
    for (int i = 0; i < k; ++i) combos *= 3;
    std::vector<std::pair<uint16_t, uint16_t>> pairs;
    for (size_t m1 = 0; m1 < combos; ++m1) {
        for (size_t m2 = 0; m2 < combos; ++m2) {
            size_t r1 = m1, r2 = m2;
            bool ok = true, strict = false;
            for (int i = 0; i < k; ++i) {
                int d1 = int(r1 % 3), d2 = int(r2 % 3);
                r1 /= 3;
                r2 /= 3;
                if (d2 < d1) {
                    ok = false;
                    break;
                }
                if (d2 > d1) strict = true;
            }
            if (ok && strict) pairs.emplace_back(uint16_t(m1), uint16_t(m2));
        }
    }
    return pairs;
}

std::optional<double> try_cosine(const EmbeddingSpace& space, const std::string& a,
                                 const std::string& b) {
    if (!space.has(a) || !space.has(b)) return std::nullopt;
    Eigen::RowVectorXd va = space.vectors.row(long(space.row_of(a)));
    Eigen::RowVectorXd vb = space.vectors.row(long(space.row_of(b)));
    double na = va.norm(), nb = vb.norm();
    if (na <= 0.0 || nb <= 0.0) return std::nullopt;
    return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

}  // namespace

bool is_instance_of(std::string_view cat1, std::string_view cat2) {
    auto s1 = split_spaces(cat1), s2 = split_spaces(cat2);
    if (s1.size() != s2.size()) return false;
    bool strict = false;
    for (size_t i = 0; i < s1.size(); ++i) {
        int l1 = slot_level(s1[i]), l2 = slot_level(s2[i]);
        if (l2 < l1) return false;
        if (l2 > l1) strict = true;
    }
    return strict;
}

std::vector<MinimalPair> extract_minimal_pairs(std::span<const DepTree> trees,
                                               const Constructicon& constructicon,
                                               const PairParams& params) {
    require(params.min_arity >= 1 && params.max_arity >= params.min_arity, Err::ConfigError,
            "invalid arity bounds");
    require(params.max_arity <= 6, Err::ConfigError,
            "pair extraction beyond arity 6 is intractable");

    std::vector<std::vector<std::pair<uint16_t, uint16_t>>> mix_pairs(size_t(params.max_arity) + 1);
    for (int k = params.min_arity; k <= params.max_arity; ++k)
        mix_pairs[size_t(k)] = instance_mix_pairs(k);

    std::map<std::pair<std::string, std::string>, uint64_t> witness;
    std::vector<std::string> renderings;
    std::vector<uint8_t> qualified;
    std::vector<Level> levels;
    std::set<std::pair<std::string, std::string>> sentence_pairs;

    for (const DepTree& tree : trees) {
        const int n_tokens = int(tree.tokens.size());
        if (n_tokens < params.min_sent_len || n_tokens > params.max_sent_len) continue;
        sentence_pairs.clear();
        for (const NodeSet& nodes : catena_node_sets(tree, params.max_arity)) {
            const int k = int(nodes.size());
            if (k < params.min_arity || k > params.max_arity) continue;
            size_t combos = 1;
            for (int i = 0; i < k; ++i) combos *= 3;
            renderings.assign(combos, {});
            qualified.assign(combos, 0);
            levels.assign(size_t(k), Level::Lex);
            for (size_t mix = 0; mix < combos; ++mix) {
                size_t rest = mix;
                for (int i = 0; i < k; ++i) {
                    levels[size_t(i)] = Level(rest % 3);
                    rest /= 3;
                }
                renderings[mix] = render(tree, nodes, levels);
                qualified[mix] = constructicon.frequency(renderings[mix]) >= params.min_freq;
            }
            for (auto [m1, m2] : mix_pairs[size_t(k)]) {
                if (!qualified[m1] || !qualified[m2]) continue;
                if (renderings[m1] == renderings[m2]) continue;  // distinct slots, same strings
                sentence_pairs.emplace(renderings[m1], renderings[m2]);
            }
        }
        for (const auto& pair : sentence_pairs) ++witness[pair];
    }

    std::vector<MinimalPair> out;
    out.reserve(witness.size());
    for (const auto& [pair, count] : witness) out.push_back({pair.first, pair.second, count});
    return out;  // std::map iteration gives (cat1, cat2) lexicographic order
}

std::vector<ShiftRecord> compute_shifts(std::span<const MinimalPair> pairs,
                                        const EmbeddingSpace& input_space,
                                        const EmbeddingSpace& best_space,
                                        std::span<const EmbeddingSpace> stage_spaces,
                                        std::ostream* log) {
    require(stage_spaces.size() >= 2, Err::ShapeError, "need at least 2 stage spaces");
    std::vector<ShiftRecord> records;
    for (const MinimalPair& pair : pairs) {
        auto skip = [&](const char* why) {
            if (log) *log << "[skip] " << pair.cat1 << " & " << pair.cat2 << ": " << why << "\n";
        };
        auto cos_input = try_cosine(input_space, pair.cat1, pair.cat2);
        if (!cos_input) {
            skip("absent from the input space");
            continue;
        }
        ShiftRecord rec;
        rec.pair = pair;
        rec.cos_input = *cos_input;
        rec.cos_at_stage.reserve(stage_spaces.size());
        for (const EmbeddingSpace& space : stage_spaces) {
            auto c = try_cosine(space, pair.cat1, pair.cat2);
            rec.cos_at_stage.push_back(c ? *c : kNaN);
            if (c) rec.cos_by_stage.push_back(*c);
        }
        if (std::isnan(rec.cos_at_stage.front())) {
            skip("absent from the first stage space");
            continue;
        }
        if (std::isnan(rec.cos_at_stage.back())) {
            skip("absent from the last stage space");
            continue;
        }
        auto cos_best = try_cosine(best_space, pair.cat1, pair.cat2);
        rec.cos_best = cos_best ? *cos_best : kNaN;
        rec.shift = rec.cos_by_stage.front() - rec.cos_by_stage.back();
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ShiftGroup> group_averages(std::span<const ShiftRecord> records, GroupBy by) {
    require(!records.empty(), Err::ShapeError, "no shift records to group");
    struct Acc {
        double shift = 0.0, cos = 0.0;
        size_t n = 0;
    };
    std::map<std::string, Acc> acc;
    for (const ShiftRecord& rec : records) {
        const std::string& key = (by == GroupBy::Cat1) ? rec.pair.cat1 : rec.pair.cat2;
        Acc& a = acc[key];
        a.shift += rec.shift;
        a.cos += rec.cos_input;
        ++a.n;
    }
    std::vector<ShiftGroup> groups;
    groups.reserve(acc.size());
    for (const auto& [key, a] : acc)
        groups.push_back({key, a.shift / double(a.n), a.cos / double(a.n), a.n});
    std::sort(groups.begin(), groups.end(), [](const ShiftGroup& a, const ShiftGroup& b) {
        if (a.mean_shift != b.mean_shift) return a.mean_shift > b.mean_shift;
        return a.key < b.key;
    });
    return groups;
}

HypothesisReport bin_and_test(std::span<const ShiftGroup> groups, double low, double high) {
    require(low < high, Err::ConfigError, "bin boundaries out of order");
    HypothesisReport report;
    static const char* kBinNames[3] = {"low", "intermediate", "high"};
    for (const ShiftGroup& g : groups) {
        int bin = g.mean_shift < low ? 0 : (g.mean_shift > high ? 2 : 1);
        report.bin_cosines[size_t(bin)].push_back(g.mean_cos_input);
    }
    for (int b = 0; b < 3; ++b) {
        report.bin_sizes[size_t(b)] = report.bin_cosines[size_t(b)].size();
        require(!report.bin_cosines[size_t(b)].empty(), Err::DegenerateBinning,
                std::string("empty bin: ") + kBinNames[b]);
    }
    std::vector<std::vector<double>> bins(report.bin_cosines.begin(), report.bin_cosines.end());
    auto kw = stats::kruskal_wallis(bins);
    report.h = kw.h;
    report.p = kw.p;
    auto posthoc = stats::dunn_posthoc(bins);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            report.posthoc_p[size_t(i)][size_t(j)] = posthoc[size_t(i)][size_t(j)];
            report.posthoc_p_bonferroni[size_t(i)][size_t(j)] =
                i == j ? 1.0 : std::min(1.0, posthoc[size_t(i)][size_t(j)] * 3.0);
        }
    return report;
}

std::string HypothesisReport::to_json_string() const {
    nlohmann::ordered_json j;
    j["kruskal_wallis"] = {{"h", h}, {"p", p}};
    static const char* kBinNames[3] = {"low", "intermediate", "high"};
    j["bins"] = nlohmann::ordered_json::object();
    for (int b = 0; b < 3; ++b)
        j["bins"][kBinNames[b]] = {{"n", bin_sizes[size_t(b)]},
                                   {"cosines", bin_cosines[size_t(b)]}};
    auto matrix = [&](const std::array<std::array<double, 3>, 3>& m) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int i = 0; i < 3; ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int j2 = 0; j2 < 3; ++j2) row.push_back(m[size_t(i)][size_t(j2)]);
            rows.push_back(row);
        }
        return rows;
    };
    j["dunn_p"] = matrix(posthoc_p);
    j["dunn_p_bonferroni"] = matrix(posthoc_p_bonferroni);
    return j.dump(2);
}

void write_shifts_tsv(std::ostream& out, std::span<const ShiftRecord> records) {
    size_t stages = records.empty() ? 0 : records.front().cos_at_stage.size();
    out << "cat1\tcat2\twitnesses\tcos_input\tcos_best";
    for (size_t s = 1; s <= stages; ++s) out << "\tcos_stage_" << s;
    out << "\tshift\n";
    for (const ShiftRecord& rec : records) {
        out << rec.pair.cat1 << '\t' << rec.pair.cat2 << '\t' << rec.pair.witness_count << '\t'
            << format_cell(rec.cos_input) << '\t' << format_cell(rec.cos_best);
        for (double c : rec.cos_at_stage) out << '\t' << format_cell(c);
        out << '\t' << format_cell(rec.shift) << '\n';
    }
}

std::vector<ShiftRecord> read_shifts_tsv(std::istream& in) {
    auto split_tabs = [](const std::string& line) {
        std::vector<std::string> cols;
        size_t start = 0;
        for (;;) {
            size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                return cols;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
    };
    std::string header;
    require(bool(std::getline(in, header)), Err::IoError, "empty shift table");
    auto head_cols = split_tabs(header);
    require(head_cols.size() >= 6 && head_cols[0] == "cat1" && head_cols.back() == "shift",
            Err::MalformedLine, "unrecognized shift table header");
    const size_t stages = head_cols.size() - 6;

    std::vector<ShiftRecord> records;
    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        require(cols.size() == head_cols.size(), Err::MalformedLine,
                "shift table line " + std::to_string(line_no) + ": column count mismatch");
        ShiftRecord rec;
        rec.pair.cat1 = cols[0];
        rec.pair.cat2 = cols[1];
        rec.pair.witness_count = std::strtoull(cols[2].c_str(), nullptr, 10);
        rec.cos_input = std::strtod(cols[3].c_str(), nullptr);
        rec.cos_best = std::strtod(cols[4].c_str(), nullptr);
        for (size_t s = 0; s < stages; ++s) {
            double c = std::strtod(cols[5 + s].c_str(), nullptr);
            rec.cos_at_stage.push_back(c);
            if (!std::isnan(c)) rec.cos_by_stage.push_back(c);
        }
        rec.shift = std::strtod(cols.back().c_str(), nullptr);
        records.push_back(std::move(rec));
    }
    return records;
}

void write_groups_tsv(std::ostream& out, std::span<const ShiftGroup> groups) {
    out << "key\tmean_shift\tmean_cos_input\tn\n";
    for (const ShiftGroup& g : groups)
        out << g.key << '\t' << format_cell(g.mean_shift) << '\t' << format_cell(g.mean_cos_input)
            << '\t' << g.n << '\n';
}

}  // namespace catlm
