#include "pwv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "pwv/common.hpp"

namespace pwv {

namespace {

struct Rotation {
    double c, s;
};

// Rotation zeroing b against a: [c s; -s c] * (a, b)^T = (r, 0)^T with r >= 0.
Rotation make_givens(double a, double b) {
    const double r = std::hypot(a, b);
    if (r == 0.0) return {1.0, 0.0};
    return {a / r, b / r};
}

// Rows i and j of M <- G * M.
void rotate_rows(Eigen::MatrixXd& M, Eigen::Index i, Eigen::Index j, const Rotation& g) {
    for (Eigen::Index col = 0; col < M.cols(); ++col) {
        const double a = M(i, col), b = M(j, col);
        M(i, col) = g.c * a + g.s * b;
        M(j, col) = -g.s * a + g.c * b;
    }
}

// Columns i and j of M <- M * G^T.
void rotate_cols(Eigen::MatrixXd& M, Eigen::Index i, Eigen::Index j, const Rotation& g) {
    for (Eigen::Index row = 0; row < M.rows(); ++row) {
        const double a = M(row, i), b = M(row, j);
        M(row, i) = g.c * a + g.s * b;
        M(row, j) = -g.s * a + g.c * b;
    }
}

void thin_qr(const Eigen::MatrixXd& A, Eigen::MatrixXd& Q, Eigen::MatrixXd* R = nullptr) {
    const Eigen::Index K = A.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), K);
    if (R) {
        *R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
    }
}

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd G(rows, cols);
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        for (Eigen::Index j = 0; j < G.cols(); ++j) G(i, j) = normal(rng);
    }
    return G;
}

// Deterministic orthonormal completion for a zero singular direction: the
// standard basis vector with the largest component outside the span of the
// columns filled so far, re-orthogonalized for numerical hygiene.
Eigen::VectorXd complete_column(const Eigen::MatrixXd& U, Eigen::Index filled) {
    const Eigen::Index n = U.rows();
    auto residual = [&](Eigen::Index cand) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, cand);
        for (Eigen::Index j = 0; j < filled; ++j) v -= U.col(j).dot(v) * U.col(j);
        return v;
    };
    Eigen::Index best = 0;
    double best_norm = -1.0;
    for (Eigen::Index cand = 0; cand < n; ++cand) {
        const double norm = residual(cand).norm();
        if (norm > best_norm) {
            best_norm = norm;
            best = cand;
        }
    }
    if (best_norm <= 0.0) throw DataError("cannot complete orthonormal basis");
    Eigen::VectorXd v = residual(best);
    for (Eigen::Index j = 0; j < filled; ++j) v -= U.col(j).dot(v) * U.col(j);
    return v / v.norm();
}

}  // namespace

int SketchParams::effective_K(std::size_t m, std::size_t n) const {
    const int cap = static_cast<int>(std::min(m, n));
    int kk = K > 0 ? K : k + 10;
    return std::min(kk, cap);
}

CenteredOperator::CenteredOperator(const Eigen::SparseMatrix<double>& X, Eigen::VectorXd E)
    : X_(&X), E_(std::move(E)) {
    if (E_.size() != X.rows()) throw UsageError("centring vector length must equal row count");
}

Eigen::MatrixXd CenteredOperator::apply(const Eigen::MatrixXd& W) const {
    if (W.rows() != X_->cols()) throw UsageError("apply: shape mismatch");
    Eigen::MatrixXd out(X_->rows(), W.cols());
    const auto& X = *X_;
    const auto& E = E_;
    parallel_for(0, static_cast<std::size_t>(W.cols()), [&](std::size_t j) {
        const Eigen::Index jj = static_cast<Eigen::Index>(j);
        out.col(jj) = X * W.col(jj) - E * W.col(jj).sum();
    });
    return out;
}

Eigen::MatrixXd CenteredOperator::apply_t(const Eigen::MatrixXd& U) const {
    if (U.rows() != X_->rows()) throw UsageError("apply_t: shape mismatch");
    Eigen::MatrixXd out(X_->cols(), U.cols());
    const auto& X = *X_;
    const auto& E = E_;
    parallel_for(0, static_cast<std::size_t>(U.cols()), [&](std::size_t j) {
        const Eigen::Index jj = static_cast<Eigen::Index>(j);
        out.col(jj) = X.transpose() * U.col(jj);
        out.col(jj).array() -= E.dot(U.col(jj));
    });
    return out;
}

void qr_rank_one_update(Eigen::MatrixXd& Q, Eigen::MatrixXd& R,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::Index m = Q.rows();
    const Eigen::Index K = Q.cols();
    if (R.rows() != K || R.cols() != K) throw UsageError("qr_rank_one_update: R must be K x K");
    if (u.size() != m || v.size() != K) throw UsageError("qr_rank_one_update: shape mismatch");
    const double orth_err = (Q.transpose() * Q - Eigen::MatrixXd::Identity(K, K))
                                .cwiseAbs()
                                .maxCoeff();
    if (orth_err > 1e-8) {
        throw UsageError("qr_rank_one_update: Q is not orthonormal");
    }

    Eigen::VectorXd w = Q.transpose() * u;
    Eigen::VectorXd residual = u - Q * w;
    const double rho = residual.norm();
    const double scale = std::max(1.0, u.norm());

    if (rho > 1e-13 * scale) {
        // u leaves span(Q): append its normalized residual direction.
        Eigen::MatrixXd Qa(m, K + 1);
        Qa.leftCols(K) = Q;
        Qa.col(K) = residual / rho;
        Eigen::MatrixXd Ra = Eigen::MatrixXd::Zero(K + 1, K);
        Ra.topRows(K) = R;
        Eigen::VectorXd wa(K + 1);
        wa.head(K) = w;
        wa[K] = rho;

        // Zero wa from the bottom; Ra becomes upper Hessenberg.
        for (Eigen::Index i = K; i >= 1; --i) {
            const Rotation g = make_givens(wa[i - 1], wa[i]);
            const double a = wa[i - 1], b = wa[i];
            wa[i - 1] = g.c * a + g.s * b;
            wa[i] = 0.0;
            rotate_rows(Ra, i - 1, i, g);
            rotate_cols(Qa, i - 1, i, g);
        }
        Ra.row(0) += wa[0] * v.transpose();
        // Restore triangularity.
        for (Eigen::Index i = 0; i < K; ++i) {
            const Rotation g = make_givens(Ra(i, i), Ra(i + 1, i));
            rotate_rows(Ra, i, i + 1, g);
            rotate_cols(Qa, i, i + 1, g);
            Ra(i + 1, i) = 0.0;
        }
        Q = Qa.leftCols(K);
        R = Ra.topRows(K);
    } else {
        // u stays in span(Q); update within the existing factorization.
        for (Eigen::Index i = K - 1; i >= 1; --i) {
            const Rotation g = make_givens(w[i - 1], w[i]);
            const double a = w[i - 1], b = w[i];
            w[i - 1] = g.c * a + g.s * b;
            w[i] = 0.0;
            rotate_rows(R, i - 1, i, g);
            rotate_cols(Q, i - 1, i, g);
        }
        R.row(0) += w[0] * v.transpose();
        for (Eigen::Index i = 0; i + 1 < K; ++i) {
            const Rotation g = make_givens(R(i, i), R(i + 1, i));
            rotate_rows(R, i, i + 1, g);
            rotate_cols(Q, i, i + 1, g);
            R(i + 1, i) = 0.0;
        }
    }
}

Eigen::MatrixXd centered_range_finder(const Eigen::SparseMatrix<double>& X,
                                      const Eigen::VectorXd& E, const SketchParams& params) {
    const std::size_t m = X.rows(), n = X.cols();
    const int K = params.effective_K(m, n);
    if (params.K > 0 && params.K > static_cast<int>(std::min(m, n))) {
        throw UsageError("sketch width K exceeds min(m, n)");
    }
    if (params.q < 0) throw UsageError("power iteration count must be >= 0");
    if (E.size() != static_cast<Eigen::Index>(m)) {
        throw UsageError("centring vector length must equal row count");
    }

    const Eigen::MatrixXd Omega = gaussian_matrix(n, K, params.seed);
    const Eigen::VectorXd omega_colsums = Omega.colwise().sum();

    Eigen::MatrixXd Q, R;

    if (params.faithful_power) {
        // Iterate on the raw matrix, then one terminal centring update.
        Eigen::MatrixXd Y = X * Omega;
        thin_qr(Y, Q, &R);
        for (int j = 0; j < params.q; ++j) {
            Y = X * (Eigen::MatrixXd(X.transpose() * Q));
            thin_qr(Y, Q, &R);
        }
        qr_rank_one_update(Q, R, -E, omega_colsums);
        return Q;
    }

    // Sketch the raw matrix, fold the centring in as a rank-one update
    // (X*Omega - E*(1^T*Omega) equals (X - E*1^T)*Omega), then iterate on
    // the implicit centred operator.
    Eigen::MatrixXd Y = X * Omega;
    thin_qr(Y, Q, &R);
    qr_rank_one_update(Q, R, -E, omega_colsums);

    const CenteredOperator op(X, E);
    for (int j = 0; j < params.q; ++j) {
        Y = op.apply(op.apply_t(Q));
        thin_qr(Y, Q);
    }
    return Q;
}

SvdFactors jacobi_svd(const Eigen::MatrixXd& A) {
    // One-sided Jacobi orthogonalizes the columns of W; run on whichever
    // orientation has fewer columns.
    const bool transposed = A.rows() > A.cols();
    Eigen::MatrixXd W = transposed ? A : Eigen::MatrixXd(A.transpose());
    const Eigen::Index r = W.cols();  // small side
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(r, r);

    constexpr int kMaxSweeps = 60;
    constexpr double kTol = 1e-15;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool converged = true;
        for (Eigen::Index p = 0; p + 1 < r; ++p) {
            for (Eigen::Index q = p + 1; q < r; ++q) {
                const double app = W.col(p).squaredNorm();
                const double aqq = W.col(q).squaredNorm();
                const double apq = W.col(p).dot(W.col(q));
                if (std::abs(apq) <= kTol * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < W.rows(); ++i) {
                    const double a = W(i, p), b = W(i, q);
                    W(i, p) = c * a - s * b;
                    W(i, q) = s * a + c * b;
                }
                for (Eigen::Index i = 0; i < r; ++i) {
                    const double a = J(i, p), b = J(i, q);
                    J(i, p) = c * a - s * b;
                    J(i, q) = s * a + c * b;
                }
            }
        }
        if (converged) break;
    }

    Eigen::VectorXd s(r);
    for (Eigen::Index j = 0; j < r; ++j) s[j] = W.col(j).norm();
    std::vector<Eigen::Index> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s[a] > s[b]; });

    Eigen::MatrixXd Wn(W.rows(), r), Jn(r, r);
    Eigen::VectorXd sn(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        Wn.col(j) = W.col(order[j]);
        Jn.col(j) = J.col(order[j]);
        sn[j] = s[order[j]];
    }

    const double smax = sn.size() ? sn[0] : 0.0;
    const double zero_tol = smax * static_cast<double>(std::max(W.rows(), r)) *
                            std::numeric_limits<double>::epsilon();
    Eigen::MatrixXd Uw(W.rows(), r);
    for (Eigen::Index j = 0; j < r; ++j) {
        if (sn[j] > zero_tol && sn[j] > 0.0) {
            Uw.col(j) = Wn.col(j) / sn[j];
        } else {
            sn[j] = 0.0;
            Uw.col(j) = complete_column(Uw, j);
        }
    }

    // W = Uw * diag(s) * Jn^T, and W is A^T when not transposed.
    SvdFactors out;
    out.S = sn;
    if (transposed) {
        out.U = Uw;
        out.V = Jn;
    } else {
        out.U = Jn;
        out.V = Uw;
    }
    return out;
}

SvdFactors centered_svd(const Eigen::SparseMatrix<double>& X, const Eigen::VectorXd& E,
                        const SketchParams& params) {
    const std::size_t m = X.rows(), n = X.cols();
    const int K = params.effective_K(m, n);
    if (params.k < 1) throw UsageError("target rank k must be >= 1");
    if (params.k > K) throw UsageError("target rank k must not exceed sketch width K");

    const Eigen::MatrixXd Q = centered_range_finder(X, E, params);

    // Project: Y = Q^T X - (Q^T E) 1^T, as a column subtraction loop.
    Eigen::MatrixXd Y = Q.transpose() * X;
    const Eigen::VectorXd w = Q.transpose() * E;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) Y.col(j) -= w;

    SvdFactors small = jacobi_svd(Y);  // Y = U1 S V^T with U1 K x K

    const int k = std::min<int>(params.k, K);
    SvdFactors out;
    out.U = Q * small.U.leftCols(k);
    out.S = small.S.head(k);
    out.V = small.V.leftCols(k);

    // Sign convention: largest-magnitude entry of each left vector positive.
    for (int j = 0; j < k; ++j) {
        Eigen::Index at = 0;
        out.U.col(j).cwiseAbs().maxCoeff(&at);
        if (out.U(at, j) < 0.0) {
            out.U.col(j) = -out.U.col(j);
            out.V.col(j) = -out.V.col(j);
        }
    }
    return out;
}

void save_dense(const std::string& path, const Eigen::MatrixXd& mat) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << mat.rows() << ' ' << mat.cols() << '\n';
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(mat(i, j));
        }
        out << '\n';
    }
}

Eigen::MatrixXd load_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw DataError(path + ": bad dense header");
    Eigen::MatrixXd mat(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(in >> mat(i, j))) throw DataError(path + ": truncated dense spill");
        }
    }
    return mat;
}

}  // namespace pwv
