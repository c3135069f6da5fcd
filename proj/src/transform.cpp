#include "pwv/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pwv/common.hpp"

namespace pwv {

namespace {

constexpr double kMinPower = 0.01;
constexpr double kBandwidthFloor = 1e-9;
constexpr std::uint64_t kSampleSalt = 0x6d656e74726f7079ULL;
constexpr std::uint64_t kPartitionSalt = 0x7061727469746f6eULL;
constexpr std::uint64_t kAnnealSalt = 0x616e6e65616c2121ULL;

void check_nonnegative(double x, const TransformSpec& spec) {
    if (x < 0.0 && spec.kind != TransformSpec::Kind::identity) {
        throw DataError(std::string("negative entry under ") + spec.name() + " transform");
    }
}

// Dimension blocks of a seeded random partition of {0, ..., d-1}, chopped
// into pieces of block_length, evaluation capped at max_blocks.
std::vector<std::vector<int>> make_partition(std::size_t d, const AnnealParams& params) {
    if (params.block_length < 1) throw UsageError("block length must be >= 1");
    std::vector<int> dims(d);
    std::iota(dims.begin(), dims.end(), 0);
    std::mt19937_64 rng(params.seed ^ kPartitionSalt);
    std::shuffle(dims.begin(), dims.end(), rng);
    std::vector<std::vector<int>> blocks;
    for (std::size_t at = 0; at < d; at += params.block_length) {
        const std::size_t end = std::min(d, at + params.block_length);
        blocks.emplace_back(dims.begin() + at, dims.begin() + end);
        if (params.max_blocks > 0 && blocks.size() == static_cast<std::size_t>(params.max_blocks)) {
            break;
        }
    }
    return blocks;
}

// Resubstitution entropy of N points under a product-Gaussian KDE with
// per-dimension Silverman bandwidths (floored so degenerate dimensions keep
// a finite value).
double block_entropy(const Eigen::MatrixXd& pts, double bandwidth_scale) {
    const Eigen::Index l = pts.rows();
    const Eigen::Index N = pts.cols();
    Eigen::VectorXd h(l);
    double log_h_term = 0.0;
    const double silverman_exp = 1.0 / (static_cast<double>(l) + 4.0);
    const double silverman_base = std::pow(4.0 / (static_cast<double>(l) + 2.0), silverman_exp) *
                                  std::pow(static_cast<double>(N), -silverman_exp);
    for (Eigen::Index d = 0; d < l; ++d) {
        const double mean = pts.row(d).mean();
        const double var = (pts.row(d).array() - mean).square().sum() /
                           static_cast<double>(N - 1);
        const double sigma = std::sqrt(std::max(var, 0.0));
        h[d] = std::max(bandwidth_scale * sigma * silverman_base, kBandwidthFloor);
        log_h_term += std::log(h[d] * std::sqrt(2.0 * M_PI));
    }

    Eigen::MatrixXd z = pts;
    for (Eigen::Index d = 0; d < l; ++d) z.row(d) /= h[d];

    std::vector<double> log_density(N);
    parallel_for(0, static_cast<std::size_t>(N), [&](std::size_t i) {
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        // logsumexp over the kernel exponents for numerical stability
        double max_e = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd e(N);
        for (Eigen::Index j = 0; j < N; ++j) {
            e[j] = -0.5 * (z.col(ii) - z.col(j)).squaredNorm();
            max_e = std::max(max_e, e[j]);
        }
        double acc = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) acc += std::exp(e[j] - max_e);
        log_density[i] = max_e + std::log(acc) - std::log(static_cast<double>(N)) - log_h_term;
    });

    double H = 0.0;
    for (double ld : log_density) H -= ld;
    return H / static_cast<double>(N);
}

double mean_block_entropy(const Eigen::MatrixXd& sample,
                          const std::vector<std::vector<int>>& blocks,
                          const AnnealParams& params) {
    double acc = 0.0;
    for (const auto& block : blocks) {
        Eigen::MatrixXd pts(block.size(), sample.cols());
        for (std::size_t d = 0; d < block.size(); ++d) pts.row(d) = sample.row(block[d]);
        acc += block_entropy(pts, params.bandwidth_scale);
    }
    return acc / static_cast<double>(blocks.size());
}

std::vector<int> sample_column_indices(std::size_t n, const AnnealParams& params) {
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    std::mt19937_64 rng(params.seed ^ kSampleSalt);
    std::shuffle(cols.begin(), cols.end(), rng);
    const std::size_t take = std::min<std::size_t>(n, std::max(params.sample_words, 0));
    cols.resize(take);
    return cols;
}

}  // namespace

TransformSpec TransformSpec::identity() { return {}; }

TransformSpec TransformSpec::log1p_() {
    TransformSpec s;
    s.kind = Kind::log1p;
    return s;
}

TransformSpec TransformSpec::hellinger() {
    TransformSpec s;
    s.kind = Kind::hellinger;
    return s;
}

TransformSpec TransformSpec::power_single(double p) {
    if (p <= 0.0 || p > 1.0) throw UsageError("power exponent must lie in (0, 1]");
    TransformSpec s;
    s.kind = Kind::power_single;
    s.power = p;
    return s;
}

TransformSpec TransformSpec::power_vector(Eigen::VectorXd p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0 || p[i] > 1.0) throw UsageError("power exponents must lie in (0, 1]");
    }
    TransformSpec s;
    s.kind = Kind::power_vector;
    s.powers = std::move(p);
    return s;
}

double TransformSpec::apply(Eigen::Index row, double x) const {
    switch (kind) {
        case Kind::identity: return x;
        case Kind::log1p: check_nonnegative(x, *this); return std::log1p(x);
        case Kind::hellinger: check_nonnegative(x, *this); return std::sqrt(x);
        case Kind::power_single: check_nonnegative(x, *this); return std::pow(x, power);
        case Kind::power_vector:
            check_nonnegative(x, *this);
            if (row >= powers.size()) throw UsageError("power vector shorter than row count");
            return std::pow(x, powers[row]);
    }
    return x;
}

const char* TransformSpec::name() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::log1p: return "log";
        case Kind::hellinger: return "hellinger";
        case Kind::power_single: return "power";
        case Kind::power_vector: return "power_vector";
    }
    return "?";
}

void apply_transform(Eigen::SparseMatrix<double>& M, const TransformSpec& spec) {
    if (spec.kind == TransformSpec::Kind::identity) return;
    for (int k = 0; k < M.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it) {
            it.valueRef() = spec.apply(it.row(), it.value());
        }
    }
}

Eigen::MatrixXd apply_transform(const Eigen::MatrixXd& M, const TransformSpec& spec) {
    Eigen::MatrixXd out(M.rows(), M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) out(i, j) = spec.apply(i, M(i, j));
    }
    return out;
}

double estimate_entropy(const Eigen::MatrixXd& sample, const AnnealParams& params) {
    if (sample.cols() < 2) throw DataError("entropy estimate needs at least 2 sample points");
    if (sample.rows() < 1) throw UsageError("entropy estimate needs at least 1 dimension");
    const auto blocks = make_partition(sample.rows(), params);
    return mean_block_entropy(sample, blocks, params);
}

Eigen::MatrixXd entropy_sample(const SparseCountMatrix& M, const AnnealParams& params) {
    const auto cols = sample_column_indices(M.cols(), params);
    Eigen::MatrixXd sample = Eigen::MatrixXd::Zero(M.rows(), cols.size());
    const auto& mat = M.matrix();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat, cols[c]); it; ++it) {
            sample(it.row(), static_cast<Eigen::Index>(c)) = it.value();
        }
    }
    return sample;
}

namespace {

// Shared evaluation state: the gathered subsample restricted to the
// evaluated blocks, with row indices remapped into block order.
struct Evaluator {
    std::vector<std::vector<int>> local_blocks;  // indices into gathered rows
    std::vector<int> gathered_dims;              // original dim per gathered row
    Eigen::MatrixXd raw;                         // gathered_dims x N
    const AnnealParams& params;

    Evaluator(const SparseCountMatrix& M, const AnnealParams& p) : params(p) {
        const auto blocks = make_partition(M.rows(), p);
        std::vector<int> dim_to_row(M.rows(), -1);
        local_blocks.reserve(blocks.size());
        for (const auto& block : blocks) {
            std::vector<int> local;
            local.reserve(block.size());
            for (int dim : block) {
                dim_to_row[dim] = static_cast<int>(gathered_dims.size());
                local.push_back(dim_to_row[dim]);
                gathered_dims.push_back(dim);
            }
            local_blocks.push_back(std::move(local));
        }
        const auto cols = sample_column_indices(M.cols(), p);
        raw = Eigen::MatrixXd::Zero(gathered_dims.size(), cols.size());
        const auto& mat = M.matrix();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, cols[c]); it; ++it) {
                const int row = dim_to_row[it.row()];
                if (row >= 0) raw(row, static_cast<Eigen::Index>(c)) = it.value();
            }
        }
    }

    double objective(const TransformSpec& spec) const {
        Eigen::MatrixXd data(raw.rows(), raw.cols());
        for (Eigen::Index j = 0; j < raw.cols(); ++j) {
            for (Eigen::Index i = 0; i < raw.rows(); ++i) {
                data(i, j) = spec.apply(gathered_dims[i], raw(i, j));
            }
        }
        double acc = 0.0;
        for (const auto& block : local_blocks) {
            Eigen::MatrixXd pts(block.size(), data.cols());
            for (std::size_t d = 0; d < block.size(); ++d) pts.row(d) = data.row(block[d]);
            acc += block_entropy(pts, params.bandwidth_scale);
        }
        return acc / static_cast<double>(local_blocks.size());
    }
};

double clip_power(double p) { return std::min(1.0, std::max(kMinPower, p)); }

}  // namespace

double tuning_objective(const SparseCountMatrix& M, const TransformSpec& spec,
                        const AnnealParams& params) {
    return Evaluator(M, params).objective(spec);
}

TuneResult tune_power(const SparseCountMatrix& M, bool vector_mode, const AnnealParams& params) {
    TuneResult result;
    result.spec = vector_mode && M.rows() > 0
                      ? TransformSpec::power_vector(Eigen::VectorXd::Ones(M.rows()))
                      : TransformSpec::power_single(1.0);
    const std::size_t sample_size =
        std::min<std::size_t>(M.cols(), std::max(params.sample_words, 0));
    if (M.rows() == 0 || M.nnz() == 0 || sample_size < 2) {
        return result;  // degenerate matrix: keep p = 1
    }

    const Evaluator eval(M, params);
    result.identity_entropy = eval.objective(result.spec);
    result.entropy = result.identity_entropy;

    TransformSpec current = result.spec;
    double current_h = result.entropy;

    std::mt19937_64 rng(params.seed ^ kAnnealSalt);
    std::normal_distribution<double> noise(0.0, params.proposal_stddev);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double temperature = params.t0;
    for (int it = 0; it < params.iterations; ++it) {
        TransformSpec proposal = current;
        if (vector_mode) {
            for (int row : eval.gathered_dims) {
                proposal.powers[row] = clip_power(proposal.powers[row] + noise(rng));
            }
        } else {
            proposal.power = clip_power(proposal.power + noise(rng));
        }
        const double h = eval.objective(proposal);
        const double gain = h - current_h;
        if (gain > 0.0 || unif(rng) < std::exp(gain / temperature)) {
            current = std::move(proposal);
            current_h = h;
            if (current_h > result.entropy) {
                result.spec = current;
                result.entropy = current_h;
            }
        }
        temperature *= params.cooling;
    }
    return result;
}

}  // namespace pwv
