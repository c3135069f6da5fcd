#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "pwv/gpca.hpp"
#include "test_util.hpp"

using namespace pwv;
using namespace pwvtest;

namespace {

Eigen::MatrixXd random_dense(std::mt19937_64& rng, int m, int n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd M(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) M(i, j) = normal(rng);
    }
    return M;
}

GpcaParams identity_params(int k, int K, std::uint64_t seed = 0) {
    GpcaParams p;
    p.lambda = LambdaKind::classic(k);
    p.sketch.K = K;
    p.sketch.q = 2;
    p.sketch.seed = seed;
    return p;
}

// Dense covariance-eigendecomposition oracle: top-k principal-component
// scores of the column sample, carrying the sqrt(n-1) singular-value
// coefficient so the scale matches the classic eigenvalue weighting.
Eigen::MatrixXd pca_score_oracle(const Eigen::MatrixXd& data, int k) {
    const Eigen::Index n = data.cols();
    const Eigen::VectorXd mean = data.rowwise().mean();
    const Eigen::MatrixXd centred = data.colwise() - mean;
    const Eigen::MatrixXd cov = centred * centred.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::MatrixXd scores(k, n);
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd axis = es.eigenvectors().col(es.eigenvectors().cols() - 1 - j);
        scores.row(j) = std::sqrt(static_cast<double>(n - 1)) * (axis.transpose() * centred);
    }
    return scores;
}

// Largest per-dimension deviation after resolving each dimension's sign.
double score_mismatch(const Eigen::MatrixXd& emitted_nk, const Eigen::MatrixXd& oracle_kn) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < emitted_nk.cols(); ++j) {
        const Eigen::VectorXd got = emitted_nk.col(j);
        const Eigen::VectorXd want = oracle_kn.row(j).transpose();
        const double sign = got.dot(want) >= 0.0 ? 1.0 : -1.0;
        worst = std::max(worst, (got - sign * want).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

TEST_SUITE_BEGIN("gpca");

TEST_CASE("build_metric: iff takes reciprocal row marginals with the zero rule") {
    Eigen::MatrixXd D(3, 3);
    D << 0, 1, 1, 1, 0, 0, 0, 0, 0;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(D);
    const Eigen::VectorXd phi = build_metric(M, MetricKind::iff);
    CHECK(phi == Eigen::Vector3d(0.5, 1.0, 0.0));
    CHECK(build_metric(M, MetricKind::identity) == Eigen::Vector3d::Ones());
}

TEST_CASE("build_metric: isf inverts the row standard deviation") {
    Eigen::MatrixXd D(2, 3);
    D << 2, 2, 2,   // constant row: zero variance
         1, 2, 3;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(D);
    const Eigen::VectorXd phi = build_metric(M, MetricKind::isf);
    CHECK(phi[0] == 0.0);
    CHECK(phi[1] == doctest::Approx(1.0));  // sample stddev of (1,2,3) is 1
}

TEST_CASE("build_weight mirrors the rules over column marginals") {
    Eigen::MatrixXd D(3, 3);
    D << 0, 1, 1, 1, 0, 0, 0, 0, 0;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(D);
    CHECK(build_weight(M, WeightKind::iwf) == Eigen::Vector3d(1.0, 1.0, 1.0));
    CHECK(build_weight(M, WeightKind::identity) == Eigen::Vector3d::Ones());

    Eigen::MatrixXd Z(2, 2);
    Z << 2, 0, 2, 0;
    const SparseCountMatrix Mz = SparseCountMatrix::from_dense(Z);
    CHECK(build_weight(Mz, WeightKind::iwf) == Eigen::Vector2d(0.25, 0.0));
}

TEST_CASE("diagonal weighting reproduces the conditional-probability reductions") {
    Eigen::MatrixXd D(2, 3);
    D << 2, 1, 0, 0, 1, 3;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(D);
    const Eigen::VectorXd phi = build_metric(M, MetricKind::iff);
    const Eigen::VectorXd omega = build_weight(M, WeightKind::iwf);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (D(i, j) == 0.0) continue;
            // (iff, identity): M(i,j) / n(c_i)
            CHECK(phi[i] * D(i, j) == doctest::Approx(D(i, j) / M.row_marginals()[i]));
            // (identity, iwf): M(i,j) / n(v_j)
            CHECK(D(i, j) * omega[j] == doctest::Approx(D(i, j) / M.col_marginals()[j]));
        }
    }
}

TEST_CASE("pmi_matrix computes clamped pointwise mutual information") {
    SUBCASE("independence gives an all-zero matrix") {
        const SparseCountMatrix M = SparseCountMatrix::from_dense(Eigen::MatrixXd::Ones(2, 2));
        const SparseCountMatrix P = pmi_matrix(M);
        CHECK(P.nnz() == 0);
    }
    SUBCASE("diagonal association gives log 2 on the diagonal") {
        Eigen::MatrixXd D(2, 2);
        D << 2, 0, 0, 2;
        const SparseCountMatrix P = pmi_matrix(SparseCountMatrix::from_dense(D));
        CHECK(P.matrix().coeff(0, 0) == doctest::Approx(std::log(2.0)));
        CHECK(P.matrix().coeff(1, 1) == doctest::Approx(std::log(2.0)));
        CHECK(P.matrix().coeff(0, 1) == 0.0);
    }
    SUBCASE("negative associations clamp to zero") {
        Eigen::MatrixXd D(2, 2);
        D << 1, 10, 10, 1;  // off-diagonal dominates; diagonal cells go negative
        const SparseCountMatrix P = pmi_matrix(SparseCountMatrix::from_dense(D));
        CHECK(P.matrix().coeff(0, 0) == 0.0);
        CHECK(P.matrix().coeff(0, 1) > 0.0);
    }
    SUBCASE("brute force over a toy corpus") {
        auto rc = make_raw_corpus("a b a c b\nb d e a\n");
        const FeatureSpace space =
            FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
        const SparseCountMatrix M = count_matrix(rc.corpus, space);
        const SparseCountMatrix P = pmi_matrix(M);
        const Eigen::MatrixXd dense = M.dense();
        const double T = dense.sum();
        for (Eigen::Index i = 0; i < dense.rows(); ++i) {
            for (Eigen::Index j = 0; j < dense.cols(); ++j) {
                double expected = 0.0;
                if (dense(i, j) > 0.0) {
                    expected = std::max(
                        0.0, std::log(T * dense(i, j) /
                                      (dense.row(i).sum() * dense.col(j).sum())));
                }
                CHECK(P.dense()(i, j) == expected);
            }
        }
    }
}

TEST_CASE("gpca on [[1,-1],[-1,1]] matches the covariance oracle") {
    Eigen::MatrixXd X(2, 2);
    X << 1, -1, -1, 1;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    const GpcaResult r = gpca(M, identity_params(1, 2));
    REQUIRE(r.emitted_k == 1);
    // Principal scores (sqrt(2), -sqrt(2)) up to sign.
    const double s = r.embeddings.vectors(0, 0) >= 0 ? 1.0 : -1.0;
    CHECK(r.embeddings.vectors(0, 0) == doctest::Approx(s * std::sqrt(2.0)));
    CHECK(r.embeddings.vectors(1, 0) == doctest::Approx(-s * std::sqrt(2.0)));
}

TEST_CASE("classic eigenvalue weighting scales scores by sqrt(n-1) * sigma") {
    std::mt19937_64 rng(314);
    const Eigen::MatrixXd X = random_dense(rng, 6, 9);
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    const GpcaResult r = gpca(M, identity_params(3, 6));
    const double root_n1 = std::sqrt(8.0);
    for (int j = 0; j < r.emitted_k; ++j) {
        const Eigen::VectorXd expected = root_n1 * r.factors.S[j] * r.factors.V.col(j);
        CHECK((r.embeddings.vectors.col(j) - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("normalized eigenvalue weighting emits alpha * sqrt(n-1) * V_k") {
    std::mt19937_64 rng(315);
    const Eigen::MatrixXd X = random_dense(rng, 6, 5);
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    GpcaParams p = identity_params(2, 5);
    p.lambda = LambdaKind::normalized(2, 0.1);
    const GpcaResult r = gpca(M, p);
    // Sigma_1 = alpha * sqrt(n-1) * I regardless of the spectrum (n = 5).
    const double scale = 0.1 * std::sqrt(4.0);
    for (int j = 0; j < r.emitted_k; ++j) {
        const Eigen::VectorXd expected = scale * r.factors.V.col(j);
        CHECK((r.embeddings.vectors.col(j) - expected).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(r.embeddings.vectors.col(j).norm() == doctest::Approx(scale));
    }
}

TEST_CASE("classic-PCA equivalence on random dense matrices") {
    std::mt19937_64 rng(316);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd X = random_dense(rng, 20, 40);
        const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
        const GpcaResult r = gpca(M, identity_params(5, 20, trial));
        const Eigen::MatrixXd oracle = pca_score_oracle(X, 5);
        CHECK(score_mismatch(r.embeddings.vectors, oracle) <= 1e-8);
    }
}

TEST_CASE("isf metric reproduces correlation-matrix PCA") {
    std::mt19937_64 rng(317);
    const Eigen::MatrixXd X = random_dense(rng, 12, 30);
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    GpcaParams p = identity_params(4, 12);
    p.metric = MetricKind::isf;
    const GpcaResult r = gpca(M, p);

    // Oracle: standardize rows by their sample stddev, then covariance PCA
    // (the covariance of standardized rows is the correlation matrix).
    Eigen::MatrixXd standardized = X;
    for (int i = 0; i < X.rows(); ++i) {
        const double mean = X.row(i).mean();
        const double sd = std::sqrt((X.row(i).array() - mean).square().sum() /
                                    static_cast<double>(X.cols() - 1));
        standardized.row(i) = X.row(i) / sd;
    }
    const Eigen::MatrixXd oracle = pca_score_oracle(standardized, 4);
    CHECK(score_mismatch(r.embeddings.vectors, oracle) <= 1e-8);
}

TEST_CASE("normalized weighting whitens the emitted scores") {
    std::mt19937_64 rng(318);
    const Eigen::MatrixXd X = random_dense(rng, 10, 25);
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    for (double alpha : {0.1, 1.0}) {
        GpcaParams p = identity_params(4, 10);
        p.lambda = LambdaKind::normalized(4, alpha);
        const GpcaResult r = gpca(M, p);
        const Eigen::MatrixXd y_cols = r.embeddings.vectors.transpose();  // k x n
        const Eigen::MatrixXd gram = y_cols * y_cols.transpose() / 24.0;
        const Eigen::MatrixXd target =
            alpha * alpha * Eigen::MatrixXd::Identity(r.emitted_k, r.emitted_k);
        CHECK((gram - target).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("gpca is byte-deterministic under a fixed seed") {
    std::mt19937_64 rng(319);
    const Eigen::MatrixXd X = random_dense(rng, 8, 12).cwiseAbs();
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    GpcaParams p = identity_params(3, 8, 42);
    p.transform.spec = TransformSpec::hellinger();
    const GpcaResult a = gpca(M, p);
    const GpcaResult b = gpca(M, p);
    CHECK(a.embeddings.vectors == b.embeddings.vectors);
}

TEST_CASE("k beyond the positive spectrum is reduced with a warning flag") {
    // Two distinct columns repeated: the centred matrix has rank 1.
    Eigen::MatrixXd X(3, 4);
    X.col(0) = Eigen::Vector3d(1, 0, 2);
    X.col(1) = Eigen::Vector3d(0, 1, 0);
    X.col(2) = X.col(0);
    X.col(3) = X.col(1);
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    const GpcaResult r = gpca(M, identity_params(3, 3));
    CHECK(r.emitted_k == 1);
    CHECK(r.k_reduced);
    CHECK(r.embeddings.vectors.cols() == 1);
}

TEST_CASE("tuned transform runs inside gpca deterministically") {
    std::mt19937_64 rng(320);
    const Eigen::MatrixXd X = random_dense(rng, 6, 30).cwiseAbs() * 3.0;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(X);
    GpcaParams p = identity_params(2, 6, 9);
    p.transform.mode = TransformChoice::Mode::tune_single;
    p.anneal.iterations = 20;
    p.anneal.sample_words = 30;
    p.anneal.seed = 9;
    const GpcaResult a = gpca(M, p);
    const GpcaResult b = gpca(M, p);
    CHECK(a.used_transform.power == b.used_transform.power);
    CHECK(a.embeddings.vectors == b.embeddings.vectors);
    CHECK(a.used_transform.kind == TransformSpec::Kind::power_single);
}

TEST_CASE("principal_word_vectors composes the oracled stages") {
    auto rc = make_raw_corpus("a b a c\n");
    FeatureSpecEntry entry;
    entry.tau = -1;
    const GpcaParams p = identity_params(2, 2, 3);
    const GpcaResult pipeline = principal_word_vectors(rc.corpus, {entry}, p);

    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    const SparseCountMatrix M = count_matrix(rc.corpus, space);
    std::vector<std::string> tokens;
    for (std::uint32_t w = 0; w < rc.vocab->size(); ++w) tokens.push_back(rc.vocab->token_of(w));
    const GpcaResult direct = gpca(M, p, &tokens);

    CHECK(pipeline.embeddings.vectors == direct.embeddings.vectors);
    CHECK(pipeline.embeddings.tokens == direct.embeddings.tokens);
}

TEST_CASE("POS feature spaces cap the available dimensions") {
    std::string text;
    text += conllu_row(1, "a", "DET", 2) + "\n" + conllu_row(2, "b", "NOUN", 0) + "\n\n";
    text += conllu_row(1, "c", "VERB", 2) + "\n" + conllu_row(2, "d", "NOUN", 0) + "\n\n";
    auto cc = make_conllu_corpus(text);
    FeatureSpecEntry entry;
    entry.kind = FeatureKind::pos;
    entry.tau = -1;
    GpcaParams p = identity_params(15, 15, 1);
    p.sketch.K = -1;  // let the sketch clamp itself to the tiny space
    const GpcaResult r = principal_word_vectors(cc.corpus, {entry}, p);
    CHECK(r.emitted_k <= static_cast<int>(cc.corpus.pos_names().size()) + 1);
    CHECK(r.k_reduced);
}

TEST_CASE("empty feature spaces abort before factorization") {
    auto rc = make_raw_corpus("a\nb\nc\n");  // one-token sentences: no neighbours
    FeatureSpecEntry entry;
    entry.tau = -1;
    CHECK_THROWS_AS(principal_word_vectors(rc.corpus, {entry}, identity_params(2, 2)),
                    DataError);
}

TEST_CASE("embeddings files round-trip") {
    std::mt19937_64 rng(321);
    Embeddings emb;
    emb.tokens = {"<unknown>", "alpha", "beta"};
    emb.vectors = random_dense(rng, 3, 2);
    TempDir dir;
    emb.save(dir.file("vec.txt"));
    const Embeddings back = Embeddings::load(dir.file("vec.txt"));
    CHECK(back.tokens == emb.tokens);
    CHECK(back.vectors == emb.vectors);
}

TEST_SUITE_END();
