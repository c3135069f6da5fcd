#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <unordered_map>
#include <vector>

#include "pwv/features.hpp"

namespace pwv {

struct MatrixProvenance {
    std::string summary;
    FeatureKind feature_kind = FeatureKind::word_form;
    ContextKind context_kind = ContextKind::neighbourhood;
    std::vector<int> taus;    // offsets merged into this matrix
    bool singleton = true;    // raw singleton-context count matrix
};

// m x n feature-by-word matrix. Accumulation goes through a hash-keyed
// triplet map; finalize() converts to compressed-column form and caches the
// marginals. Values are reals because window combination introduces
// fractional weights.
class SparseCountMatrix {
public:
    SparseCountMatrix(std::size_t m, std::size_t n);

    void add(std::uint32_t i, std::uint32_t j, double value);
    void finalize(MatrixProvenance prov);
    bool finalized() const { return finalized_; }

    static SparseCountMatrix from_dense(const Eigen::MatrixXd& dense,
                                        MatrixProvenance prov = {});

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::size_t nnz() const { return mat_.nonZeros(); }
    const Eigen::SparseMatrix<double>& matrix() const;
    const Eigen::VectorXd& row_marginals() const;
    const Eigen::VectorXd& col_marginals() const;
    double total() const;  // sum of all entries
    const MatrixProvenance& provenance() const { return prov_; }

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix()); }

    // Spill format: "m n nnz" header followed by "i j value" lines.
    void save(const std::string& path) const;
    static SparseCountMatrix load(const std::string& path);

private:
    std::size_t m_, n_;
    bool finalized_ = false;
    std::unordered_map<std::uint64_t, double> accum_;
    Eigen::SparseMatrix<double> mat_;  // compressed column
    Eigen::VectorXd row_marginals_, col_marginals_;
    double total_ = 0.0;
    MatrixProvenance prov_;
};

// M(i,j) = number of tokens of word j whose context under space.context()
// fires feature i. Tokens with unresolvable contexts contribute nothing.
SparseCountMatrix count_matrix(const Corpus& corpus, const FeatureSpace& space);

// Same, restricted to a sentence range [sent_begin, sent_end). Shards merge
// by addition.
SparseCountMatrix count_matrix_range(const Corpus& corpus, const FeatureSpace& space,
                                     std::size_t sent_begin, std::size_t sent_end);

// Weighted sparse sum over matrices sharing dimensions, feature kind and
// context type with pairwise-distinct offsets.
SparseCountMatrix combine_window(const std::vector<const SparseCountMatrix*>& mats,
                                 const std::vector<double>& alphas);

// Row-wise stacking; blocks keep input order.
SparseCountMatrix combine_union(const std::vector<const SparseCountMatrix*>& mats);

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> marginals(const SparseCountMatrix& mat) {
    return {mat.row_marginals(), mat.col_marginals()};
}

}  // namespace pwv
