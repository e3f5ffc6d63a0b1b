#include "catlm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "catlm/error.hpp"

namespace catlm::stats {

namespace {

// Regularized lower incomplete gamma P(s, x) by power series.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double a = s;
    for (int n = 0; n < 1000; ++n) {
        a += 1.0;
        term *= x / a;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Regularized upper incomplete gamma Q(s, x) by modified Lentz continued
// fraction; valid for x >= s + 1.
double gamma_q_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -double(i) * (double(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double gamma_q(double s, double x) {
    if (x <= 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_cf(s, x);
}

struct RankInfo {
    std::vector<double> ranks;
    double tie_sum = 0.0;  // sum of t^3 - t over tie groups
};

RankInfo ranks_with_ties(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    RankInfo info;
    info.ranks.resize(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = 0.5 * (double(i + 1) + double(j + 1));
        for (size_t k = i; k <= j; ++k) info.ranks[order[k]] = avg;
        double t = double(j - i + 1);
        info.tie_sum += t * t * t - t;
        i = j + 1;
    }
    return info;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    return ranks_with_ties(values).ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size(), Err::ShapeError,
            "spearman: length mismatch (" + std::to_string(xs.size()) + " vs " +
                std::to_string(ys.size()) + ")");
    require(xs.size() >= 2, Err::ShapeError, "spearman: need at least 2 observations");
    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);
    const double n = double(rx.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    require(sxx > 0.0 && syy > 0.0, Err::UndefinedCorrelation,
            "spearman: constant input on one side");
    double rho = sxy / std::sqrt(sxx * syy);
    return std::clamp(rho, -1.0, 1.0);
}

namespace {

// Pools the groups, returning per-observation average ranks plus tie_sum.
struct PooledRanks {
    std::vector<std::vector<double>> group_ranks;
    double tie_sum = 0.0;
    size_t total = 0;
};

PooledRanks pooled_ranks(const std::vector<std::vector<double>>& groups) {
    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    RankInfo info = ranks_with_ties(pooled);
    PooledRanks out;
    out.tie_sum = info.tie_sum;
    out.total = pooled.size();
    size_t at = 0;
    for (const auto& g : groups) {
        out.group_ranks.emplace_back(info.ranks.begin() + at, info.ranks.begin() + at + g.size());
        at += g.size();
    }
    return out;
}

void check_groups(const std::vector<std::vector<double>>& groups) {
    require(groups.size() >= 2, Err::ShapeError, "need at least 2 groups");
    size_t total = 0;
    for (const auto& g : groups) {
        require(!g.empty(), Err::ShapeError, "empty group");
        total += g.size();
    }
    require(total >= 3, Err::ShapeError, "need at least 3 observations in total");
}

}  // namespace

KwResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    check_groups(groups);
    PooledRanks pr = pooled_ranks(groups);
    const double n = double(pr.total);
    double h = 0.0;
    for (const auto& ranks : pr.group_ranks) {
        double sum = std::accumulate(ranks.begin(), ranks.end(), 0.0);
        h += sum * sum / double(ranks.size());
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    double correction = 1.0 - pr.tie_sum / (n * n * n - n);
    if (correction <= 0.0) {
        // every pooled observation identical: no evidence of any effect
        return {0.0, 1.0};
    }
    h /= correction;
    if (h < 0.0) h = 0.0;
    double p = chisq_sf(h, int(groups.size()) - 1);
    return {h, p};
}

std::vector<std::vector<double>> dunn_posthoc(const std::vector<std::vector<double>>& groups) {
    check_groups(groups);
    PooledRanks pr = pooled_ranks(groups);
    const double n = double(pr.total);
    const size_t k = groups.size();
    std::vector<double> mean_rank(k);
    for (size_t i = 0; i < k; ++i) {
        double sum = std::accumulate(pr.group_ranks[i].begin(), pr.group_ranks[i].end(), 0.0);
        mean_rank[i] = sum / double(pr.group_ranks[i].size());
    }
    double variance_base = n * (n + 1.0) / 12.0 - pr.tie_sum / (12.0 * (n - 1.0));
    std::vector<std::vector<double>> p(k, std::vector<double>(k, 1.0));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j) {
            double se2 = variance_base * (1.0 / double(groups[i].size()) + 1.0 / double(groups[j].size()));
            double pij;
            if (se2 <= 0.0) {
                pij = 1.0;  // fully tied data
            } else {
                double z = (mean_rank[i] - mean_rank[j]) / std::sqrt(se2);
                pij = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
            }
            p[i][j] = pij;
            p[j][i] = pij;
        }
    }
    return p;
}

double chisq_sf(double x, int df) {
    require(df >= 1, Err::ShapeError, "chisq_sf: df must be >= 1");
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return gamma_q(double(df) / 2.0, x / 2.0);
}

double chisq_sf_series(double x, int df) {
    require(df >= 1, Err::ShapeError, "chisq_sf: df must be >= 1");
    if (x <= 0.0) return 1.0;
    return 1.0 - gamma_p_series(double(df) / 2.0, x / 2.0);
}

double chisq_sf_continued_fraction(double x, int df) {
    require(df >= 1, Err::ShapeError, "chisq_sf: df must be >= 1");
    require(x / 2.0 >= double(df) / 2.0 + 1.0, Err::ShapeError,
            "continued fraction route needs x > df + 2");
    return gamma_q_cf(double(df) / 2.0, x / 2.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace catlm::stats
