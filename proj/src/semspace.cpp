#include "catlm/semspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "catlm/catenae.hpp"
#include "catlm/error.hpp"
#include "catlm/rng.hpp"

namespace catlm {

Eigen::MatrixXd CoocMatrix::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(long(rows()), long(cols()));
    for (const Cell& c : cells) m(c.row, c.col) = c.value;
    return m;
}

CoocMatrix cooccurrences(std::span<const DepTree> trees, const std::vector<std::string>& targets,
                         const std::vector<std::string>& contexts, const CoocParams& params) {
    require(!targets.empty() && !contexts.empty(), Err::ConfigError,
            "target and context sets must be nonempty");
    CoocMatrix m;
    m.targets = targets;
    m.contexts = contexts;

    std::unordered_map<std::string, uint32_t> target_ids, context_ids;
    for (uint32_t i = 0; i < targets.size(); ++i) target_ids.emplace(targets[i], i);
    for (uint32_t i = 0; i < contexts.size(); ++i) context_ids.emplace(contexts[i], i);

    std::unordered_map<uint64_t, double> counts;
    std::vector<uint32_t> sent_targets, sent_contexts;
    std::unordered_set<std::string> seen;
    for (const DepTree& tree : trees) {
        const int n_tokens = int(tree.tokens.size());
        if (n_tokens < params.min_sent_len || n_tokens > params.max_sent_len) continue;
        sent_targets.clear();
        sent_contexts.clear();
        seen.clear();
        std::vector<Level> levels;
        for (const NodeSet& nodes : catena_node_sets(tree, params.max_arity)) {
            const int k = int(nodes.size());
            if (k < params.min_arity || k > params.max_arity) continue;
            size_t combos = 1;
            for (int i = 0; i < k; ++i) combos *= 3;
            levels.assign(size_t(k), Level::Lex);
            for (size_t mix = 0; mix < combos; ++mix) {
                size_t rest = mix;
                for (int i = 0; i < k; ++i) {
                    levels[size_t(i)] = Level(rest % 3);
                    rest /= 3;
                }
                std::string r = render(tree, nodes, levels);
                if (!seen.insert(r).second) continue;  // binarized per sentence
                if (auto it = target_ids.find(r); it != target_ids.end())
                    sent_targets.push_back(it->second);
                if (auto it = context_ids.find(r); it != context_ids.end())
                    sent_contexts.push_back(it->second);
            }
        }
        for (uint32_t t : sent_targets)
            for (uint32_t c : sent_contexts) {
                if (m.targets[t] == m.contexts[c]) continue;  // a rendering never co-occurs with itself
                ++counts[(uint64_t(t) << 32) | c];
            }
    }

    m.cells.reserve(counts.size());
    for (const auto& [key, value] : counts)
        m.cells.push_back({uint32_t(key >> 32), uint32_t(key & 0xFFFFFFFFu), value});
    std::sort(m.cells.begin(), m.cells.end(), [](const CoocMatrix::Cell& a, const CoocMatrix::Cell& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return m;
}

CoocMatrix ppmi(const CoocMatrix& m) {
    std::vector<double> row_totals(m.rows(), 0.0), col_totals(m.cols(), 0.0);
    double total = 0.0;
    for (const CoocMatrix::Cell& c : m.cells) {
        row_totals[c.row] += c.value;
        col_totals[c.col] += c.value;
        total += c.value;
    }
    require(total > 0.0, Err::DegenerateMatrix, "all co-occurrence counts are zero");

    CoocMatrix out;
    out.targets = m.targets;
    out.contexts = m.contexts;
    out.cells.reserve(m.cells.size());
    for (const CoocMatrix::Cell& c : m.cells) {
        if (c.value <= 0.0) continue;
        double value = std::log2(c.value * total / (row_totals[c.row] * col_totals[c.col]));
        if (value > 0.0) out.cells.push_back({c.row, c.col, value});
    }
    return out;
}

namespace {

// Symmetric eigendecomposition by cyclic Jacobi rotations; eigenvalues
// returned descending with matching columns in v. Small matrices only
// (the projected Gram matrix of the subspace iteration).
void jacobi_eigh(Eigen::MatrixXd a, Eigen::VectorXd& eigenvalues, Eigen::MatrixXd& v) {
    const long n = a.rows();
    v = Eigen::MatrixXd::Identity(n, n);
    if (n == 0) {
        eigenvalues = Eigen::VectorXd();
        return;
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (long p = 0; p < n; ++p)
            for (long q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale * double(n)) break;
        for (long p = 0; p < n; ++p) {
            for (long q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) <= 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                Eigen::VectorXd ap = a.col(p), aq = a.col(q);
                a.col(p) = c * ap - s * aq;
                a.col(q) = s * ap + c * aq;
                Eigen::RowVectorXd rp = a.row(p), rq = a.row(q);
                a.row(p) = c * rp - s * rq;
                a.row(q) = s * rp + c * rq;
                Eigen::VectorXd vp = v.col(p), vq = v.col(q);
                v.col(p) = c * vp - s * vq;
                v.col(q) = s * vp + c * vq;
            }
        }
    }
    // sort descending
    std::vector<long> order(static_cast<size_t>(n), 0);
    for (long i = 0; i < n; ++i) order[size_t(i)] = i;
    std::sort(order.begin(), order.end(), [&](long x, long y) { return a(x, x) > a(y, y); });
    eigenvalues.resize(n);
    Eigen::MatrixXd sorted(n, n);
    for (long i = 0; i < n; ++i) {
        eigenvalues(i) = a(order[size_t(i)], order[size_t(i)]);
        sorted.col(i) = v.col(order[size_t(i)]);
    }
    v = std::move(sorted);
}

struct SparseOp {
    const CoocMatrix* m;

    // A * x for dense blocks
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(long(m->rows()), x.cols());
        for (const CoocMatrix::Cell& c : m->cells) y.row(c.row) += c.value * x.row(c.col);
        return y;
    }
    // A^T * x
    Eigen::MatrixXd apply_t(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(long(m->cols()), x.cols());
        for (const CoocMatrix::Cell& c : m->cells) y.row(c.col) += c.value * x.row(c.row);
        return y;
    }
};

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
    return q;
}

TruncatedSvd truncated_svd_impl(const SparseOp& op, long rows, long cols, int d,
                                const SvdOptions& options) {
    require(d >= 1, Err::InvalidDimension, "requested dimension must be >= 1");
    require(rows >= 1 && cols >= 1, Err::DegenerateMatrix, "empty matrix");
    const long max_rank = std::min(rows, cols);
    const long d_eff = std::min<long>(d, max_rank);
    const long l = std::min<long>(d_eff + std::max(0, options.oversample), max_rank);

    // deterministic Gaussian test matrix
    Rng rng(options.seed);
    Eigen::MatrixXd omega(cols, l);
    for (long j = 0; j < l; ++j)
        for (long i = 0; i < cols; ++i) omega(i, j) = rng.next_normal();

    Eigen::MatrixXd q = orthonormalize(op.apply(omega));
    for (int it = 0; it < options.power_iterations; ++it) {
        Eigen::MatrixXd z = orthonormalize(op.apply_t(q));
        q = orthonormalize(op.apply(z));
    }

    // B = Q^T A, factorized through its small Gram matrix
    Eigen::MatrixXd bt = op.apply_t(q);  // cols x l, equals B^T
    Eigen::MatrixXd gram = bt.transpose() * bt;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd w;
    jacobi_eigh(gram, lambda, w);

    TruncatedSvd result;
    result.s.resize(d_eff);
    result.u.resize(rows, d_eff);
    result.v.resize(cols, d_eff);
    for (long i = 0; i < d_eff; ++i) {
        double sigma = std::sqrt(std::max(0.0, lambda(i)));
        result.s(i) = sigma;
        result.u.col(i) = q * w.col(i);
        if (sigma > 0.0)
            result.v.col(i) = bt * w.col(i) / sigma;
        else
            result.v.col(i).setZero();
    }
    // canonical sign: largest-magnitude entry of each left singular vector positive
    for (long j = 0; j < d_eff; ++j) {
        long arg = 0;
        double best = -1.0;
        for (long i = 0; i < rows; ++i) {
            double mag = std::fabs(result.u(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (result.u(arg, j) < 0.0) {
            result.u.col(j) = -result.u.col(j);
            result.v.col(j) = -result.v.col(j);
        }
    }
    return result;
}

}  // namespace

TruncatedSvd truncated_svd(const CoocMatrix& m, int d, const SvdOptions& options) {
    require(!m.cells.empty(), Err::DegenerateMatrix, "matrix has no nonzero cells");
    SparseOp op{&m};
    return truncated_svd_impl(op, long(m.rows()), long(m.cols()), d, options);
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& dense, int d, const SvdOptions& options) {
    CoocMatrix m;
    m.targets.resize(size_t(dense.rows()));
    m.contexts.resize(size_t(dense.cols()));
    for (long i = 0; i < dense.rows(); ++i)
        for (long j = 0; j < dense.cols(); ++j)
            if (dense(i, j) != 0.0) m.cells.push_back({uint32_t(i), uint32_t(j), dense(i, j)});
    require(!m.cells.empty(), Err::DegenerateMatrix, "matrix has no nonzero cells");
    SparseOp op{&m};
    return truncated_svd_impl(op, dense.rows(), dense.cols(), d, options);
}

bool EmbeddingSpace::has(std::string_view rendering) const {
    return index_.find(std::string(rendering)) != index_.end();
}

size_t EmbeddingSpace::row_of(std::string_view rendering) const {
    auto it = index_.find(std::string(rendering));
    require(it != index_.end(), Err::UnknownTarget,
            "rendering not in space: \"" + std::string(rendering) + "\"");
    return it->second;
}

void EmbeddingSpace::rebuild_index() {
    index_.clear();
    for (size_t i = 0; i < targets.size(); ++i) index_.emplace(targets[i], i);
}

EmbeddingSpace svd_reduce(const CoocMatrix& weighted, int d, const SvdOptions& options) {
    TruncatedSvd svd = truncated_svd(weighted, d, options);
    EmbeddingSpace space;
    space.targets = weighted.targets;
    const long d_eff = svd.s.size();
    space.vectors.resize(long(weighted.rows()), d_eff);
    for (long j = 0; j < d_eff; ++j) {
        double w = options.sigma_exponent == 0.0 ? 1.0 : std::pow(svd.s(j), options.sigma_exponent);
        space.vectors.col(j) = svd.u.col(j) * w;
    }
    space.rebuild_index();
    return space;
}

std::vector<std::string> select_targets(const Constructicon& constructicon, size_t n,
                                        int min_arity, int max_arity) {
    struct Item {
        std::string rendering;
        double mi;
    };
    std::vector<Item> items;
    constructicon.for_each([&](const std::string& rendering, size_t arity, uint64_t, double mi) {
        if (int(arity) < min_arity || int(arity) > max_arity) return;
        items.push_back({rendering, mi});
    });
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.mi != b.mi) return a.mi > b.mi;
        return a.rendering < b.rendering;
    });
    if (items.size() > n) items.resize(n);
    std::vector<std::string> out;
    out.reserve(items.size());
    for (Item& item : items) out.push_back(std::move(item.rendering));
    return out;
}

double cosine(const EmbeddingSpace& space, std::string_view a, std::string_view b) {
    Eigen::RowVectorXd va = space.vectors.row(long(space.row_of(a)));
    Eigen::RowVectorXd vb = space.vectors.row(long(space.row_of(b)));
    double na = va.norm(), nb = vb.norm();
    require(na > 0.0, Err::ZeroVector, "zero vector for \"" + std::string(a) + "\"");
    require(nb > 0.0, Err::ZeroVector, "zero vector for \"" + std::string(b) + "\"");
    return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

namespace {
constexpr char kSpaceMagic[4] = {'C', 'S', 'P', 'C'};
}

void EmbeddingSpace::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    out.write(kSpaceMagic, 4);
    uint32_t version = 1, d = uint32_t(vectors.cols());
    uint64_t n = targets.size();
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (const std::string& t : targets) {
        uint32_t len = uint32_t(t.size());
        out.write(reinterpret_cast<const char*>(&len), 4);
        out.write(t.data(), len);
    }
    for (long i = 0; i < vectors.rows(); ++i)
        for (long j = 0; j < vectors.cols(); ++j) {
            double v = vectors(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!out) raise(Err::IoError, "write failed for " + path.string());
}

EmbeddingSpace EmbeddingSpace::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    require(in.good() && std::memcmp(magic, kSpaceMagic, 4) == 0, Err::IoError,
            path.string() + " is not an embedding space file");
    uint32_t version = 0, d = 0;
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&n), 8);
    require(version == 1, Err::IoError, "unsupported space format version");
    EmbeddingSpace space;
    space.targets.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
        uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 4);
        space.targets[i].resize(len);
        in.read(space.targets[i].data(), len);
    }
    space.vectors.resize(long(n), long(d));
    for (long i = 0; i < space.vectors.rows(); ++i)
        for (long j = 0; j < space.vectors.cols(); ++j) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            space.vectors(i, j) = v;
        }
    require(in.good(), Err::IoError, "truncated space file " + path.string());
    space.rebuild_index();
    return space;
}

void EmbeddingSpace::export_tsv(std::ostream& out) const {
    for (size_t i = 0; i < targets.size(); ++i) {
        out << targets[i];
        for (long j = 0; j < vectors.cols(); ++j) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", vectors(long(i), j));
            out << '\t' << buf;
        }
        out << '\n';
    }
}

}  // namespace catlm
