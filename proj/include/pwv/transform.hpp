#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "pwv/coocmat.hpp"

namespace pwv {

// Element-wise transformation of a (weighted) count matrix. All kinds are
// monotonically increasing and map 0 to 0, so the sparsity pattern survives.
struct TransformSpec {
    enum class Kind { identity, log1p, hellinger, power_single, power_vector };
    Kind kind = Kind::identity;
    double power = 1.0;       // power_single
    Eigen::VectorXd powers;   // power_vector, one exponent per row

    static TransformSpec identity();
    static TransformSpec log1p_();
    static TransformSpec hellinger();
    static TransformSpec power_single(double p);
    static TransformSpec power_vector(Eigen::VectorXd p);

    double apply(Eigen::Index row, double x) const;
    const char* name() const;
};

struct AnnealParams {
    int iterations = 200;
    double t0 = 1.0;            // initial temperature
    double cooling = 0.98;      // geometric factor per step
    double proposal_stddev = 0.05;
    int sample_words = 5000;    // word subsample for the entropy estimate
    int block_length = 2;       // partition block length l
    int max_blocks = 50;        // cap on evaluated blocks
    double bandwidth_scale = 1.0;  // multiplier on the Silverman bandwidth
    std::uint64_t seed = 0;
};

// In-place element-wise map over the stored values; zeros stay zeros.
void apply_transform(Eigen::SparseMatrix<double>& M, const TransformSpec& spec);
Eigen::MatrixXd apply_transform(const Eigen::MatrixXd& M, const TransformSpec& spec);

// Mean, over a seeded partition of the dimensions into blocks of length
// block_length, of the Gaussian-KDE resubstitution entropy of the sample
// restricted to each block. sample is d x N with one column per point.
double estimate_entropy(const Eigen::MatrixXd& sample, const AnnealParams& params);

// The seeded word subsample of M used by the tuner, as a dense m x N matrix.
Eigen::MatrixXd entropy_sample(const SparseCountMatrix& M, const AnnealParams& params);

// Entropy objective of a candidate transform on M's tuning subsample.
// tune_power maximizes exactly this quantity.
double tuning_objective(const SparseCountMatrix& M, const TransformSpec& spec,
                        const AnnealParams& params);

struct TuneResult {
    TransformSpec spec;
    double entropy = 0.0;           // objective at the returned spec
    double identity_entropy = 0.0;  // objective at the p = 1 starting point
};

// Simulated annealing over the power exponent(s), Metropolis acceptance on
// entropy gain, geometric cooling, best-seen bookkeeping. Degenerate
// matrices return p = 1.
TuneResult tune_power(const SparseCountMatrix& M, bool vector_mode, const AnnealParams& params);

}  // namespace pwv
