#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwv/coocmat.hpp"
#include "pwv/linalg.hpp"
#include "pwv/transform.hpp"

namespace pwv {

enum class MetricKind { identity, iff, isf };
enum class WeightKind { identity, iwf };

const char* to_string(MetricKind k);
const char* to_string(WeightKind k);

struct LambdaKind {
    enum class Kind { classic, normalized } kind = Kind::classic;
    int k = 100;
    double alpha = 1.0;  // normalized only

    static LambdaKind classic(int k);
    static LambdaKind normalized(int k, double alpha);
};

struct TransformChoice {
    enum class Mode { fixed, tune_single, tune_vector } mode = Mode::fixed;
    TransformSpec spec;  // used when mode == fixed
};

struct GpcaParams {
    MetricKind metric = MetricKind::identity;
    WeightKind weight = WeightKind::identity;
    TransformChoice transform;
    LambdaKind lambda;
    SketchParams sketch;
    AnnealParams anneal;
};

// Principal word vectors keyed by vocabulary order, one row per word.
struct Embeddings {
    std::vector<std::string> tokens;
    Eigen::MatrixXd vectors;  // n x k
    std::map<std::string, std::string> manifest;

    int k() const { return static_cast<int>(vectors.cols()); }
    std::optional<Eigen::Index> row_of(const std::string& token) const;

    void save(const std::string& path) const;
    static Embeddings load(const std::string& path);
};

// Diagonal metric over features: identity, inverse feature frequency, or
// inverse standard deviation of the feature rows. Degenerate rows get 0.
Eigen::VectorXd build_metric(const SparseCountMatrix& M, MetricKind kind);

// Diagonal weight over words: identity or inverse word frequency.
Eigen::VectorXd build_weight(const SparseCountMatrix& M, WeightKind kind);

// Positive pointwise mutual information on the support of M.
SparseCountMatrix pmi_matrix(const SparseCountMatrix& M);

struct GpcaResult {
    Embeddings embeddings;
    SvdFactors factors;          // rank min(k, K) factors of the centred matrix
    TransformSpec used_transform;
    int emitted_k = 0;
    bool k_reduced = false;      // fewer positive singular values than requested
};

// Weighting, transformation (tuned first if requested), implicit centring,
// randomized factorization, eigenvalue weighting, score emission.
GpcaResult gpca(const SparseCountMatrix& M, const GpcaParams& params,
                const std::vector<std::string>* column_tokens = nullptr);

// End-to-end pipeline pieces -------------------------------------------------

enum class WindowDirection { backward, forward, symmetric };
enum class SpanCombine { window, union_stack };

// One entry of the feature-spec list: either a singleton offset (tau) or a
// span of offsets combined by weighted addition or row stacking.
struct FeatureSpecEntry {
    FeatureKind kind = FeatureKind::word_form;
    ContextKind context = ContextKind::neighbourhood;
    bool cross_sentence = false;
    std::optional<int> tau;   // singleton
    std::optional<int> span;  // window half-length / ancestry depth
    WindowDirection direction = WindowDirection::backward;
    SpanCombine combine = SpanCombine::window;

    std::vector<ContextFn> contexts() const;
    std::vector<double> window_weights() const;  // alpha_tau = 1/|tau|
};

// Counts per entry, combining within entries per their scheme; multiple
// entries stack (union) in declared order.
SparseCountMatrix build_contextual_matrix(const Corpus& corpus,
                                          const std::vector<FeatureSpecEntry>& entries,
                                          std::vector<FeatureSpace>* spaces_out = nullptr);

GpcaResult principal_word_vectors(const Corpus& corpus,
                                  const std::vector<FeatureSpecEntry>& entries,
                                  const GpcaParams& params);

}  // namespace pwv
