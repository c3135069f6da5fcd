#include "pwv/gpca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pwv/common.hpp"

namespace pwv {

const char* to_string(MetricKind k) {
    switch (k) {
        case MetricKind::identity: return "identity";
        case MetricKind::iff: return "iff";
        case MetricKind::isf: return "isf";
    }
    return "?";
}

const char* to_string(WeightKind k) {
    return k == WeightKind::identity ? "identity" : "iwf";
}

LambdaKind LambdaKind::classic(int k) {
    if (k < 1) throw UsageError("lambda k must be >= 1");
    return {Kind::classic, k, 1.0};
}

LambdaKind LambdaKind::normalized(int k, double alpha) {
    if (k < 1) throw UsageError("lambda k must be >= 1");
    if (alpha <= 0.0) throw UsageError("lambda alpha must be positive");
    return {Kind::normalized, k, alpha};
}

std::optional<Eigen::Index> Embeddings::row_of(const std::string& token) const {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == token) return static_cast<Eigen::Index>(i);
    }
    return std::nullopt;
}

void Embeddings::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << tokens.size() << ' ' << vectors.cols() << '\n';
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out << tokens[i];
        for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
            out << ' ' << format_double(vectors(static_cast<Eigen::Index>(i), j));
        }
        out << '\n';
    }
}

Embeddings Embeddings::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::size_t n = 0;
    int k = 0;
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty embeddings file");
    {
        std::istringstream hs(header);
        if (!(hs >> n >> k) || k < 0) throw DataError(path + ": bad embeddings header");
    }
    Embeddings emb;
    emb.tokens.reserve(n);
    emb.vectors.resize(static_cast<Eigen::Index>(n), k);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= n) throw DataError(path + ": more rows than the header announced");
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        emb.tokens.push_back(token);
        for (int j = 0; j < k; ++j) {
            if (!(ls >> emb.vectors(static_cast<Eigen::Index>(row), j))) {
                throw DataError(path + ": truncated embedding row for '" + token + "'");
            }
        }
        ++row;
    }
    if (row != n) throw DataError(path + ": fewer rows than the header announced");
    return emb;
}

Eigen::VectorXd build_metric(const SparseCountMatrix& M, MetricKind kind) {
    const Eigen::Index m = static_cast<Eigen::Index>(M.rows());
    switch (kind) {
        case MetricKind::identity:
            return Eigen::VectorXd::Ones(m);
        case MetricKind::iff: {
            Eigen::VectorXd phi(m);
            const auto& rm = M.row_marginals();
            for (Eigen::Index i = 0; i < m; ++i) phi[i] = rm[i] > 0.0 ? 1.0 / rm[i] : 0.0;
            return phi;
        }
        case MetricKind::isf: {
            // Row i as an n-point sample; variance with divisor n-1.
            const Eigen::Index n = static_cast<Eigen::Index>(M.cols());
            if (n < 2) return Eigen::VectorXd::Zero(m);
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(m), sumsq = Eigen::VectorXd::Zero(m);
            const auto& mat = M.matrix();
            for (int c = 0; c < mat.outerSize(); ++c) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(mat, c); it; ++it) {
                    sum[it.row()] += it.value();
                    sumsq[it.row()] += it.value() * it.value();
                }
            }
            Eigen::VectorXd phi(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const double var =
                    (sumsq[i] - sum[i] * sum[i] / static_cast<double>(n)) /
                    static_cast<double>(n - 1);
                phi[i] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
            }
            return phi;
        }
    }
    return Eigen::VectorXd::Ones(m);
}

Eigen::VectorXd build_weight(const SparseCountMatrix& M, WeightKind kind) {
    const Eigen::Index n = static_cast<Eigen::Index>(M.cols());
    if (kind == WeightKind::identity) return Eigen::VectorXd::Ones(n);
    Eigen::VectorXd omega(n);
    const auto& cm = M.col_marginals();
    for (Eigen::Index j = 0; j < n; ++j) omega[j] = cm[j] > 0.0 ? 1.0 / cm[j] : 0.0;
    return omega;
}

SparseCountMatrix pmi_matrix(const SparseCountMatrix& M) {
    const double T = M.total();
    const auto& rm = M.row_marginals();
    const auto& cm = M.col_marginals();
    SparseCountMatrix out(M.rows(), M.cols());
    const auto& mat = M.matrix();
    for (int c = 0; c < mat.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat, c); it; ++it) {
            const double pmi = std::log(T * it.value() / (rm[it.row()] * cm[it.col()]));
            if (pmi > 0.0) {
                out.add(static_cast<std::uint32_t>(it.row()),
                        static_cast<std::uint32_t>(it.col()), pmi);
            }
        }
    }
    MatrixProvenance prov = M.provenance();
    prov.summary = "pmi(" + prov.summary + ")";
    prov.singleton = false;
    out.finalize(std::move(prov));
    return out;
}

GpcaResult gpca(const SparseCountMatrix& M, const GpcaParams& params,
                const std::vector<std::string>* column_tokens) {
    const std::size_t m = M.rows(), n = M.cols();
    if (m == 0 || n == 0) throw DataError("gpca: empty matrix");
    if (column_tokens && column_tokens->size() != n) {
        throw UsageError("gpca: one token per matrix column required");
    }

    // (1) Weighting: X <- Phi M Omega as diagonal row/column scaling.
    const Eigen::VectorXd phi = build_metric(M, params.metric);
    const Eigen::VectorXd omega = build_weight(M, params.weight);
    SparseCountMatrix weighted(m, n);
    {
        const auto& mat = M.matrix();
        for (int c = 0; c < mat.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, c); it; ++it) {
                const double v = phi[it.row()] * it.value() * omega[it.col()];
                if (v != 0.0) {
                    weighted.add(static_cast<std::uint32_t>(it.row()),
                                 static_cast<std::uint32_t>(it.col()), v);
                }
            }
        }
        MatrixProvenance prov = M.provenance();
        prov.summary = std::string("weighted(") + to_string(params.metric) + "," +
                       to_string(params.weight) + "; " + prov.summary + ")";
        weighted.finalize(std::move(prov));
    }

    // (2) Transformation, tuned on the weighted matrix when requested.
    GpcaResult result;
    switch (params.transform.mode) {
        case TransformChoice::Mode::fixed:
            result.used_transform = params.transform.spec;
            break;
        case TransformChoice::Mode::tune_single:
            result.used_transform = tune_power(weighted, false, params.anneal).spec;
            break;
        case TransformChoice::Mode::tune_vector:
            result.used_transform = tune_power(weighted, true, params.anneal).spec;
            break;
    }
    Eigen::SparseMatrix<double> X = weighted.matrix();
    apply_transform(X, result.used_transform);

    // (3) Row-wise mean over words, (4) centred factorization.
    const Eigen::VectorXd E = Eigen::VectorXd(X * Eigen::VectorXd::Ones(X.cols())) /
                              static_cast<double>(n);
    SketchParams sketch = params.sketch;
    sketch.k = std::min<int>(params.lambda.k, sketch.effective_K(m, n));
    const SvdFactors factors = centered_svd(X, E, sketch);

    // (5) Eigenvalue weighting and score emission.
    const double smax = factors.S.size() ? factors.S[0] : 0.0;
    const double pos_tol = smax * static_cast<double>(std::max(m, n)) *
                           std::numeric_limits<double>::epsilon();
    int positive = 0;
    for (Eigen::Index i = 0; i < factors.S.size(); ++i) {
        if (factors.S[i] > pos_tol && factors.S[i] > 0.0) ++positive;
    }
    const int k_eff = std::min(params.lambda.k, positive);
    result.k_reduced = k_eff < params.lambda.k;
    result.emitted_k = k_eff;
    result.factors = factors;

    const double root_n1 = std::sqrt(static_cast<double>(n > 1 ? n - 1 : 1));
    Eigen::VectorXd sigma1(k_eff);
    for (int i = 0; i < k_eff; ++i) {
        sigma1[i] = params.lambda.kind == LambdaKind::Kind::classic
                        ? root_n1 * factors.S[i]
                        : params.lambda.alpha * root_n1;
    }

    Embeddings emb;
    emb.vectors = factors.V.leftCols(k_eff) * sigma1.asDiagonal();
    emb.tokens.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        emb.tokens.push_back(column_tokens ? (*column_tokens)[j] : "w" + std::to_string(j));
    }
    emb.manifest["metric"] = to_string(params.metric);
    emb.manifest["weight"] = to_string(params.weight);
    emb.manifest["transform"] = result.used_transform.name();
    if (result.used_transform.kind == TransformSpec::Kind::power_single) {
        emb.manifest["transform.power"] = format_double(result.used_transform.power);
    }
    emb.manifest["lambda"] =
        params.lambda.kind == LambdaKind::Kind::classic ? "classic" : "normalized";
    emb.manifest["lambda.alpha"] = format_double(params.lambda.alpha);
    emb.manifest["k"] = std::to_string(k_eff);
    emb.manifest["sketch.K"] = std::to_string(sketch.effective_K(m, n));
    emb.manifest["sketch.q"] = std::to_string(sketch.q);
    emb.manifest["seed"] = std::to_string(sketch.seed);
    result.embeddings = std::move(emb);
    return result;
}

std::vector<ContextFn> FeatureSpecEntry::contexts() const {
    if (tau && span) throw UsageError("feature entry: tau and span are mutually exclusive");
    if (!tau && !span) throw UsageError("feature entry: either tau or span is required");
    std::vector<ContextFn> out;
    if (context == ContextKind::dependency) {
        if (tau) {
            out.push_back(ContextFn::dependency(*tau));
        } else {
            for (int t = 1; t <= *span; ++t) out.push_back(ContextFn::dependency(t));
        }
        return out;
    }
    if (tau) {
        out.push_back(ContextFn::neighbourhood(*tau, cross_sentence));
        return out;
    }
    if (*span < 1) throw UsageError("feature entry: span must be >= 1");
    // Ascending offsets, so stacked union blocks have a stable order.
    if (direction == WindowDirection::backward || direction == WindowDirection::symmetric) {
        for (int t = -*span; t <= -1; ++t) out.push_back(ContextFn::neighbourhood(t, cross_sentence));
    }
    if (direction == WindowDirection::forward || direction == WindowDirection::symmetric) {
        for (int t = 1; t <= *span; ++t) out.push_back(ContextFn::neighbourhood(t, cross_sentence));
    }
    return out;
}

std::vector<double> FeatureSpecEntry::window_weights() const {
    std::vector<double> alphas;
    for (const auto& ctx : contexts()) alphas.push_back(1.0 / std::abs(ctx.tau));
    return alphas;
}

SparseCountMatrix build_contextual_matrix(const Corpus& corpus,
                                          const std::vector<FeatureSpecEntry>& entries,
                                          std::vector<FeatureSpace>* spaces_out) {
    if (entries.empty()) throw UsageError("at least one feature entry is required");
    std::vector<SparseCountMatrix> entry_mats;
    for (const auto& entry : entries) {
        const auto ctxs = entry.contexts();
        const auto spaces = FeatureSpace::build_shared(corpus, entry.kind, ctxs);
        if (spaces.front().size() == 0) throw DataError("empty feature space");
        if (spaces_out) {
            spaces_out->insert(spaces_out->end(), spaces.begin(), spaces.end());
        }
        std::vector<SparseCountMatrix> mats;
        mats.reserve(spaces.size());
        for (const auto& space : spaces) mats.push_back(count_matrix(corpus, space));
        if (mats.size() == 1) {
            entry_mats.push_back(std::move(mats.front()));
            continue;
        }
        std::vector<const SparseCountMatrix*> ptrs;
        for (const auto& m : mats) ptrs.push_back(&m);
        if (entry.combine == SpanCombine::window) {
            entry_mats.push_back(combine_window(ptrs, entry.window_weights()));
        } else {
            entry_mats.push_back(combine_union(ptrs));
        }
    }
    if (entry_mats.size() == 1) return std::move(entry_mats.front());
    std::vector<const SparseCountMatrix*> ptrs;
    for (const auto& m : entry_mats) ptrs.push_back(&m);
    return combine_union(ptrs);
}

GpcaResult principal_word_vectors(const Corpus& corpus,
                                  const std::vector<FeatureSpecEntry>& entries,
                                  const GpcaParams& params) {
    const SparseCountMatrix M = build_contextual_matrix(corpus, entries);
    std::vector<std::string> tokens;
    tokens.reserve(corpus.vocab().size());
    for (std::uint32_t w = 0; w < corpus.vocab().size(); ++w) {
        tokens.push_back(corpus.vocab().token_of(w));
    }
    GpcaResult result = gpca(M, params, &tokens);
    result.embeddings.manifest["matrix"] = M.provenance().summary;
    return result;
}

}  // namespace pwv
