#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pwv/coocmat.hpp"
#include "pwv/gpca.hpp"

namespace pwv {

// Concatenated window vectors with class labels (POS or NER tags).
struct LabeledWindowSet {
    Eigen::MatrixXd rows;            // one window vector per row
    std::vector<int> labels;         // class id per row
    std::vector<std::string> class_names;
    Eigen::VectorXd priors() const;  // class frequencies, summing to 1
};

struct EigenReport {
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::VectorXd tv_percent;   // cumulative percentage of total variance
    Eigen::VectorXd lev;          // log eigenvalues (floored)
    Eigen::VectorXd lgv_percent;  // cumulative percentage of log generalized variance
};

// Sum of the log eigenvalues of the sample covariance of the vectors.
// Eigenvalues below 1e-12 are floored; the floor count lands in
// floored_count when given.
double log_generalized_variance(const Eigen::MatrixXd& vectors, int* floored_count = nullptr);

// Fisher discriminant ratio: sum of the positive eigenvalues of
// Sigma_B a = lambda Sigma_W a, both scatter matrices weighted by class
// priors, Sigma_W ridge-regularized.
double fdr(const LabeledWindowSet& set);

// Per token, the concatenation of the 2*half_window+1 word vectors centred
// on it; out-of-sentence positions contribute zero blocks. Labels come from
// the corpus POS layer.
LabeledWindowSet windowed_representation(const Corpus& corpus, const Embeddings& emb,
                                         int half_window = 3);

EigenReport eigen_report(const Eigen::VectorXd& eigenvalues);

struct SimilarityFileResult {
    std::string file;
    double spearman = 0.0;
    std::size_t pairs_total = 0;
    std::size_t pairs_scored = 0;
    std::size_t oov_pairs = 0;
};

struct SimilarityResult {
    std::vector<SimilarityFileResult> files;
    double average = 0.0;
};

// Cosine similarity vs. gold scores, Spearman rank correlation with average
// ties; out-of-vocabulary pairs are skipped and counted.
SimilarityResult word_similarity(const Embeddings& emb,
                                 const std::vector<std::string>& benchmark_files);

// Spearman rank correlation with average-rank tie handling.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct DistributionReport {
    Eigen::VectorXd mean;      // empirical mixture mean (row sums / n)
    Eigen::VectorXd cov_diag;  // per-feature empirical variance
    double sparsity = 0.0;     // zeros / total
    double diag_mean_abs = 0.0;
    double offdiag_mean_abs = 0.0;  // over a capped feature subset for large m
    bool diag_dominates = false;

    std::string to_text() const;
};

DistributionReport distribution_diagnostics(const SparseCountMatrix& M);

}  // namespace pwv
