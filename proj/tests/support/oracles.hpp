#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <cstdint>
#include <vector>

#include "catlm/rng.hpp"
#include "catlm/treebank.hpp"

namespace catlm::testsupport {

// Monte-Carlo permutation p-value for the Kruskal-Wallis statistic:
// reassigns pooled observations to the given group sizes and counts
// permuted H >= observed H. Uses its own rank/H computation.
double kw_permutation_p(const std::vector<std::vector<double>>& groups, int permutations,
                        uint64_t seed);

// Upper-tail probability of the standard normal via adaptive Simpson
// quadrature of the density (no erf/erfc involved).
double normal_sf_quadrature(double z);

// Chi-squared survival function via quadrature of the density.
double chisq_sf_quadrature(double x, int df);

// Random valid dependency tree over n tokens: token i+1 attaches to a
// uniformly random earlier token or the root slot of token 1.
DepTree random_tree(int n, Rng& rng);

}  // namespace catlm::testsupport
