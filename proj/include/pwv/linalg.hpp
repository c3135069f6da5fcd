#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>

namespace pwv {

// Parameters of the randomized sketch.
struct SketchParams {
    int k = 2;            // target rank
    int K = -1;           // sketch width; -1 means k + 10, clamped to min(m, n)
    int q = 2;            // power iterations
    std::uint64_t seed = 0;
    // Run the power iterations on the raw matrix and apply a single terminal
    // centring update, mirroring the published iteration verbatim. The
    // default iterates on the implicit centred operator instead; at q = 0 the
    // two coincide.
    bool faithful_power = false;

    int effective_K(std::size_t m, std::size_t n) const;
};

struct SvdFactors {
    Eigen::MatrixXd U;  // m x k, orthonormal columns
    Eigen::VectorXd S;  // k, descending, non-negative
    Eigen::MatrixXd V;  // n x k, orthonormal columns
};

// The centred matrix X - E*1^T as an implicit operator; products never
// materialize the dense difference.
class CenteredOperator {
public:
    CenteredOperator(const Eigen::SparseMatrix<double>& X, Eigen::VectorXd E);

    std::size_t rows() const { return X_->rows(); }
    std::size_t cols() const { return X_->cols(); }
    const Eigen::VectorXd& centring() const { return E_; }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& W) const;    // (X - E1^T) W
    Eigen::MatrixXd apply_t(const Eigen::MatrixXd& U) const;  // (X - E1^T)^T U

private:
    const Eigen::SparseMatrix<double>* X_;
    Eigen::VectorXd E_;
};

// Thin-QR rank-one update: given QR = A with Q m x K orthonormal and R K x K
// upper-triangular, rewrites (Q, R) so that Q R = A + u v^T. Projects u into
// span(Q) plus one appended direction and restores triangularity with plane
// rotations.
void qr_rank_one_update(Eigen::MatrixXd& Q, Eigen::MatrixXd& R,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Orthonormal m x K basis whose span approximates the range of X - E*1^T.
Eigen::MatrixXd centered_range_finder(const Eigen::SparseMatrix<double>& X,
                                      const Eigen::VectorXd& E, const SketchParams& params);

// Rank-k SVD of X - E*1^T without forming the dense centred matrix.
SvdFactors centered_svd(const Eigen::SparseMatrix<double>& X, const Eigen::VectorXd& E,
                        const SketchParams& params);

// Full thin SVD of a small dense matrix via one-sided Jacobi rotations.
// Exposed for reuse; centered_svd calls it on the projected K x n matrix.
SvdFactors jacobi_svd(const Eigen::MatrixXd& A);

// Dense spill format: "rows cols" header + row-major values.
void save_dense(const std::string& path, const Eigen::MatrixXd& mat);
Eigen::MatrixXd load_dense(const std::string& path);

}  // namespace pwv
