#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "catlm/constructicon.hpp"
#include "catlm/treebank.hpp"

namespace catlm {

// Sparse sentence-level co-occurrence counts between catena renderings.
struct CoocMatrix {
    struct Cell {
        uint32_t row = 0, col = 0;
        double value = 0.0;
    };

    std::vector<std::string> targets;   // row labels
    std::vector<std::string> contexts;  // column labels
    std::vector<Cell> cells;            // sorted by (row, col), nonzero

    size_t rows() const { return targets.size(); }
    size_t cols() const { return contexts.size(); }
    Eigen::MatrixXd dense() const;
};

struct CoocParams {
    int min_sent_len = 1;
    int max_sent_len = 25;
    int min_arity = 2;  // catenae of 2 or 3 elements act as targets/contexts
    int max_arity = 3;
};

// cell(t, c) = number of sentences whose extracted catenae include both t
// and c (t != c as renderings); a sentence contributes at most 1 per pair.
CoocMatrix cooccurrences(std::span<const DepTree> trees, const std::vector<std::string>& targets,
                         const std::vector<std::string>& contexts, const CoocParams& params = {});

// max(0, log2(p(t,c) / (p(t) p(c)))) from matrix marginals; cells clamped
// to zero are dropped. Throws DegenerateMatrix when the total count is 0.
CoocMatrix ppmi(const CoocMatrix& m);

struct SvdOptions {
    int oversample = 10;
    int power_iterations = 8;
    uint64_t seed = 0x5eedULL;       // fixed by default: bitwise-deterministic pipeline
    double sigma_exponent = 1.0;     // row vectors are U * Sigma^exponent
};

struct TruncatedSvd {
    Eigen::MatrixXd u;  // rows x d, columns sign-canonicalized
    Eigen::VectorXd s;  // descending
    Eigen::MatrixXd v;  // cols x d
};

// Randomized subspace iteration. When the requested rank plus oversampling
// covers min(rows, cols) the projection is exact; otherwise the usual
// randomized low-rank approximation. Sign convention: the entry of largest
// magnitude in each left singular vector is positive.
TruncatedSvd truncated_svd(const CoocMatrix& m, int d, const SvdOptions& options = {});
TruncatedSvd truncated_svd(const Eigen::MatrixXd& dense, int d, const SvdOptions& options = {});

// Reduced vectors for the matrix's targets, d capped at min(rows, cols, d).
struct EmbeddingSpace {
    std::vector<std::string> targets;
    Eigen::MatrixXd vectors;  // |targets| x d

    int dim() const { return int(vectors.cols()); }
    bool has(std::string_view rendering) const;
    // row index; throws UnknownTarget
    size_t row_of(std::string_view rendering) const;

    void save(const std::filesystem::path& path) const;
    static EmbeddingSpace load(const std::filesystem::path& path);
    void export_tsv(std::ostream& out) const;

    void rebuild_index();

private:
    std::unordered_map<std::string, size_t> index_;
};

EmbeddingSpace svd_reduce(const CoocMatrix& weighted, int d = 300, const SvdOptions& options = {});

// Top-n renderings of the given arity range by MI (ties lexicographic),
// the default target/context inventories of the semantic spaces.
std::vector<std::string> select_targets(const Constructicon& constructicon, size_t n,
                                        int min_arity = 2, int max_arity = 3);

// Cosine of two target rows; throws UnknownTarget / ZeroVector.
double cosine(const EmbeddingSpace& space, std::string_view a, std::string_view b);

}  // namespace catlm
