#include "pwv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pwv/common.hpp"

namespace pwv {

namespace {
constexpr double kEigenFloor = 1e-12;
constexpr double kFdrEigenvalueThreshold = 1e-10;
}  // namespace

Eigen::VectorXd LabeledWindowSet::priors() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(class_names.size()));
    for (int label : labels) p[label] += 1.0;
    return p / static_cast<double>(labels.size());
}

double log_generalized_variance(const Eigen::MatrixXd& vectors, int* floored_count) {
    const Eigen::Index n = vectors.rows();
    if (n <= 1) throw DataError("log generalized variance needs at least 2 vectors");
    const Eigen::RowVectorXd mean = vectors.colwise().mean();
    const Eigen::MatrixXd centred = vectors.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw DataError("covariance eigendecomposition failed");
    int floored = 0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda < kEigenFloor) {
            lambda = kEigenFloor;
            ++floored;
        }
        acc += std::log(lambda);
    }
    if (floored_count) *floored_count = floored;
    return acc;
}

double fdr(const LabeledWindowSet& set) {
    const Eigen::Index dim = set.rows.cols();
    const std::size_t classes = set.class_names.size();
    if (classes < 2) throw DataError("FDR needs at least two classes");
    std::vector<std::vector<Eigen::Index>> members(classes);
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        members[set.labels[i]].push_back(static_cast<Eigen::Index>(i));
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (members[c].size() < 2) {
            throw DataError("FDR needs at least 2 rows per class (class '" +
                            set.class_names[c] + "' has " + std::to_string(members[c].size()) + ")");
        }
    }

    const Eigen::VectorXd p = set.priors();
    const Eigen::RowVectorXd overall_mean = set.rows.colwise().mean();
    Eigen::MatrixXd sigma_w = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd sigma_b = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t c = 0; c < classes; ++c) {
        Eigen::MatrixXd block(members[c].size(), dim);
        for (std::size_t r = 0; r < members[c].size(); ++r) block.row(r) = set.rows.row(members[c][r]);
        const Eigen::RowVectorXd mu = block.colwise().mean();
        const Eigen::MatrixXd centred = block.rowwise() - mu;
        sigma_w += p[c] * (centred.transpose() * centred) /
                   static_cast<double>(members[c].size() - 1);
        const Eigen::RowVectorXd d = mu - overall_mean;
        sigma_b += p[c] * d.transpose() * d;
    }

    // Zero-padded window blocks make Sigma_W rank-deficient; a small ridge
    // keeps the generalized problem well posed.
    const double ridge = 1e-8 * sigma_w.trace() / static_cast<double>(dim);
    sigma_w += ridge * Eigen::MatrixXd::Identity(dim, dim);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma_w);
    if (llt.info() != Eigen::Success) {
        throw DataError("within-class scatter is singular after regularization");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sigma_b, sigma_w);
    if (ges.info() != Eigen::Success) throw DataError("generalized eigensolver failed");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i) {
        if (ges.eigenvalues()[i] > kFdrEigenvalueThreshold) acc += ges.eigenvalues()[i];
    }
    return acc;
}

LabeledWindowSet windowed_representation(const Corpus& corpus, const Embeddings& emb,
                                         int half_window) {
    if (!corpus.has_pos()) throw DataError("windowed representation requires labeled tokens");
    if (half_window < 0) throw UsageError("half window must be >= 0");
    const int k = emb.k();
    const int width = 2 * half_window + 1;

    // Word id -> embedding row, OOV mapping to the <unknown> vector.
    std::vector<Eigen::Index> word_row(corpus.vocab().size());
    {
        std::unordered_map<std::string, Eigen::Index> by_token;
        for (std::size_t i = 0; i < emb.tokens.size(); ++i) {
            by_token.emplace(emb.tokens[i], static_cast<Eigen::Index>(i));
        }
        auto unk = by_token.find(kUnknownToken);
        if (unk == by_token.end()) {
            throw DataError("embeddings lack the " + std::string(kUnknownToken) +
                            " vector needed for out-of-vocabulary tokens");
        }
        for (std::uint32_t w = 0; w < corpus.vocab().size(); ++w) {
            auto it = by_token.find(corpus.vocab().token_of(w));
            word_row[w] = it == by_token.end() ? unk->second : it->second;
        }
    }

    LabeledWindowSet set;
    set.class_names = corpus.pos_names();
    set.rows.resize(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(width) * k);
    set.labels.reserve(corpus.size());
    for (std::size_t t = 0; t < corpus.size(); ++t) {
        const Token& tok = corpus.token(t);
        const auto [lo, hi] = corpus.sentence_span(tok.sentence_id);
        for (int w = -half_window; w <= half_window; ++w) {
            const Eigen::Index block = static_cast<Eigen::Index>(w + half_window) * k;
            const std::int64_t at = static_cast<std::int64_t>(t) + w;
            if (at < static_cast<std::int64_t>(lo) || at >= static_cast<std::int64_t>(hi)) {
                set.rows.block(static_cast<Eigen::Index>(t), block, 1, k).setZero();
            } else {
                set.rows.block(static_cast<Eigen::Index>(t), block, 1, k) =
                    emb.vectors.row(word_row[corpus.token(at).word_id]);
            }
        }
        set.labels.push_back(tok.pos_id);
    }
    return set;
}

EigenReport eigen_report(const Eigen::VectorXd& eigenvalues) {
    const Eigen::Index k = eigenvalues.size();
    if (k == 0) throw DataError("eigen report needs a non-empty spectrum");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (eigenvalues[i] < 0.0) throw UsageError("eigen report needs non-negative values");
    }
    EigenReport rep;
    rep.eigenvalues = eigenvalues;
    std::sort(rep.eigenvalues.data(), rep.eigenvalues.data() + k, std::greater<double>());
    const double total = rep.eigenvalues.sum();
    if (total <= 0.0) throw DataError("eigen report needs a non-zero spectrum");

    rep.tv_percent.resize(k);
    rep.lev.resize(k);
    rep.lgv_percent.resize(k);
    double tv_acc = 0.0, lgv_acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        rep.lev[i] = std::log(std::max(rep.eigenvalues[i], kEigenFloor));
    }
    const double lgv_total = rep.lev.sum();
    for (Eigen::Index i = 0; i < k; ++i) {
        tv_acc += rep.eigenvalues[i];
        lgv_acc += rep.lev[i];
        rep.tv_percent[i] = 100.0 * tv_acc / total;
        rep.lgv_percent[i] = lgv_total != 0.0 ? 100.0 * lgv_acc / lgv_total : 0.0;
    }
    rep.tv_percent[k - 1] = 100.0;  // exact terminal element
    if (lgv_total != 0.0) rep.lgv_percent[k - 1] = 100.0;
    return rep;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DataError("spearman needs two equal-length series with at least 2 entries");
    }
    auto ranks = [](const std::vector<double>& x) {
        const std::size_t n = x.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) throw DataError("spearman undefined for constant ranks");
    return cov / std::sqrt(va * vb);
}

SimilarityResult word_similarity(const Embeddings& emb,
                                 const std::vector<std::string>& benchmark_files) {
    if (benchmark_files.empty()) throw UsageError("no benchmark files given");
    std::unordered_map<std::string, Eigen::Index> by_token;
    for (std::size_t i = 0; i < emb.tokens.size(); ++i) {
        by_token.emplace(emb.tokens[i], static_cast<Eigen::Index>(i));
    }
    auto lookup = [&](const std::string& word) -> std::optional<Eigen::Index> {
        auto it = by_token.find(word);
        if (it != by_token.end()) return it->second;
        std::string lower = word;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        it = by_token.find(lower);
        if (it != by_token.end()) return it->second;
        return std::nullopt;
    };

    SimilarityResult result;
    for (const auto& path : benchmark_files) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open file: " + path);
        SimilarityFileResult file;
        file.file = path;
        std::vector<double> gold, cosine;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto fields = split_whitespace(line);
            if (fields.empty()) continue;
            if (fields.size() != 3) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected 'word1 word2 score'");
            }
            ++file.pairs_total;
            const auto r1 = lookup(std::string(fields[0]));
            const auto r2 = lookup(std::string(fields[1]));
            double score;
            try {
                score = std::stod(std::string(fields[2]));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": bad score");
            }
            if (!r1 || !r2) {
                ++file.oov_pairs;
                continue;
            }
            const Eigen::VectorXd v1 = emb.vectors.row(*r1);
            const Eigen::VectorXd v2 = emb.vectors.row(*r2);
            const double norms = v1.norm() * v2.norm();
            cosine.push_back(norms > 0.0 ? v1.dot(v2) / norms : 0.0);
            gold.push_back(score);
            ++file.pairs_scored;
        }
        if (file.pairs_scored < 2) {
            throw DataError(path + ": fewer than 2 scored pairs");
        }
        file.spearman = spearman(gold, cosine);
        result.files.push_back(std::move(file));
    }
    double acc = 0.0;
    for (const auto& f : result.files) acc += f.spearman;
    result.average = acc / static_cast<double>(result.files.size());
    return result;
}

DistributionReport distribution_diagnostics(const SparseCountMatrix& M) {
    const Eigen::Index m = static_cast<Eigen::Index>(M.rows());
    const Eigen::Index n = static_cast<Eigen::Index>(M.cols());
    DistributionReport rep;
    rep.mean = n > 0 ? Eigen::VectorXd(M.row_marginals() / static_cast<double>(n))
                     : Eigen::VectorXd::Zero(m);

    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(m);
    const auto& mat = M.matrix();
    for (int c = 0; c < mat.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat, c); it; ++it) {
            sumsq[it.row()] += it.value() * it.value();
        }
    }
    rep.cov_diag.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        rep.cov_diag[i] = n > 0 ? sumsq[i] / static_cast<double>(n) - rep.mean[i] * rep.mean[i]
                                : 0.0;
    }
    rep.sparsity = (m * n) > 0
                       ? 1.0 - static_cast<double>(M.nnz()) / static_cast<double>(m * n)
                       : 0.0;

    // Off-diagonal magnitudes over a capped leading block for large m.
    const Eigen::Index cap = std::min<Eigen::Index>(m, 256);
    if (cap >= 1 && n > 0) {
        Eigen::MatrixXd top = Eigen::MatrixXd(mat).topRows(cap);
        const Eigen::VectorXd mu = top.rowwise().mean();
        Eigen::MatrixXd centred = top.colwise() - mu;
        Eigen::MatrixXd cov = centred * centred.transpose() / static_cast<double>(n);
        double diag_acc = 0.0, off_acc = 0.0;
        for (Eigen::Index i = 0; i < cap; ++i) {
            diag_acc += std::abs(cov(i, i));
            for (Eigen::Index j = 0; j < cap; ++j) {
                if (i != j) off_acc += std::abs(cov(i, j));
            }
        }
        rep.diag_mean_abs = diag_acc / static_cast<double>(cap);
        rep.offdiag_mean_abs = cap > 1 ? off_acc / static_cast<double>(cap * (cap - 1)) : 0.0;
        rep.diag_dominates = rep.diag_mean_abs >= rep.offdiag_mean_abs;
    }
    return rep;
}

std::string DistributionReport::to_text() const {
    std::ostringstream out;
    out << "sparsity = " << format_double(sparsity) << '\n';
    out << "diag_mean_abs = " << format_double(diag_mean_abs) << '\n';
    out << "offdiag_mean_abs = " << format_double(offdiag_mean_abs) << '\n';
    out << "diag_dominates = " << (diag_dominates ? "yes" : "no") << '\n';
    out << "mean_norm = " << format_double(mean.norm()) << '\n';
    out << "cov_diag_sum = " << format_double(cov_diag.sum()) << '\n';
    return out.str();
}

}  // namespace pwv
