#pragma once

#include <span>
#include <vector>

namespace catlm::stats {

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation: Pearson correlation of average ranks.
// Throws ShapeError on length mismatch or n < 2, UndefinedCorrelation if
// either side is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct KwResult {
    double h;  // tie-corrected statistic
    double p;  // chi-squared survival, k-1 degrees of freedom
};

// Kruskal-Wallis one-way analysis of variance on ranks.
KwResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Dunn's posthoc pairwise z-tests with tie-corrected variance. Returns the
// symmetric matrix of two-sided p-values; self-comparisons are 1.
std::vector<std::vector<double>> dunn_posthoc(const std::vector<std::vector<double>>& groups);

// Survival function of the chi-squared distribution (regularized upper
// incomplete gamma). Series expansion below s+1, continued fraction above.
double chisq_sf(double x, int df);

// The two evaluation routes behind chisq_sf, exposed so they can be checked
// against each other. The series route computes 1 - P and loses relative
// precision once the tail drops below ~1e-10; the continued fraction is
// only valid for x > df + 2.
double chisq_sf_series(double x, int df);
double chisq_sf_continued_fraction(double x, int df);

// Upper tail of the standard normal, 0.5*erfc(z/sqrt(2)).
double normal_sf(double z);

}  // namespace catlm::stats
