#include "pwv/coocmat.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "pwv/common.hpp"

namespace pwv {

namespace {
std::uint64_t cell_key(std::uint32_t i, std::uint32_t j) {
    return (static_cast<std::uint64_t>(j) << 32) | i;
}
}  // namespace

SparseCountMatrix::SparseCountMatrix(std::size_t m, std::size_t n) : m_(m), n_(n) {}

void SparseCountMatrix::add(std::uint32_t i, std::uint32_t j, double value) {
    if (finalized_) throw UsageError("cannot add to a finalized matrix");
    if (i >= m_ || j >= n_) throw UsageError("matrix entry out of range");
    accum_[cell_key(i, j)] += value;
}

void SparseCountMatrix::finalize(MatrixProvenance prov) {
    if (finalized_) throw UsageError("matrix already finalized");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(accum_.size());
    for (const auto& [key, v] : accum_) {
        if (v == 0.0) continue;
        triplets.emplace_back(static_cast<int>(key & 0xFFFFFFFFu),
                              static_cast<int>(key >> 32), v);
    }
    accum_.clear();
    mat_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    mat_.setFromTriplets(triplets.begin(), triplets.end());
    mat_.makeCompressed();

    row_marginals_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    col_marginals_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    total_ = 0.0;
    for (int k = 0; k < mat_.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it) {
            row_marginals_[it.row()] += it.value();
            col_marginals_[it.col()] += it.value();
            total_ += it.value();
        }
    }
    prov_ = std::move(prov);
    finalized_ = true;
}

SparseCountMatrix SparseCountMatrix::from_dense(const Eigen::MatrixXd& dense,
                                                MatrixProvenance prov) {
    SparseCountMatrix out(dense.rows(), dense.cols());
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
        for (Eigen::Index i = 0; i < dense.rows(); ++i) {
            if (dense(i, j) != 0.0) {
                out.add(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), dense(i, j));
            }
        }
    }
    if (prov.summary.empty()) prov.summary = "dense";
    prov.singleton = false;
    out.finalize(std::move(prov));
    return out;
}

const Eigen::SparseMatrix<double>& SparseCountMatrix::matrix() const {
    if (!finalized_) throw UsageError("matrix not finalized");
    return mat_;
}

const Eigen::VectorXd& SparseCountMatrix::row_marginals() const {
    if (!finalized_) throw UsageError("matrix not finalized");
    return row_marginals_;
}

const Eigen::VectorXd& SparseCountMatrix::col_marginals() const {
    if (!finalized_) throw UsageError("matrix not finalized");
    return col_marginals_;
}

double SparseCountMatrix::total() const {
    if (!finalized_) throw UsageError("matrix not finalized");
    return total_;
}

void SparseCountMatrix::save(const std::string& path) const {
    if (!finalized_) throw UsageError("matrix not finalized");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << m_ << ' ' << n_ << ' ' << nnz() << '\n';
    for (int k = 0; k < mat_.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
        }
    }
}

SparseCountMatrix SparseCountMatrix::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::size_t m = 0, n = 0, nnz = 0;
    if (!(in >> m >> n >> nnz)) throw DataError(path + ": bad matrix header");
    SparseCountMatrix out(m, n);
    for (std::size_t e = 0; e < nnz; ++e) {
        std::uint32_t i, j;
        double v;
        if (!(in >> i >> j >> v)) throw DataError(path + ": truncated matrix spill");
        out.add(i, j, v);
    }
    MatrixProvenance prov;
    prov.summary = "loaded from " + path;
    prov.singleton = false;
    out.finalize(std::move(prov));
    return out;
}

SparseCountMatrix count_matrix_range(const Corpus& corpus, const FeatureSpace& space,
                                     std::size_t sent_begin, std::size_t sent_end) {
    SparseCountMatrix out(space.size(), corpus.vocab().size());
    const ContextFn& ctx = space.context();
    for (std::size_t sid = sent_begin; sid < sent_end; ++sid) {
        const auto [lo, hi] = corpus.sentence_span(static_cast<std::uint32_t>(sid));
        for (std::size_t t = lo; t < hi; ++t) {
            const ContextRef ref = resolve_context(corpus, t, ctx);
            const auto fid = feature_at(corpus, ref, space);
            if (!fid) continue;
            out.add(*fid, corpus.token(t).word_id, 1.0);
        }
    }
    MatrixProvenance prov;
    prov.feature_kind = space.kind();
    prov.context_kind = ctx.kind;
    prov.taus = {ctx.tau};
    prov.singleton = true;
    prov.summary = std::string("count ") + to_string(space.kind()) + " " +
                   to_string(ctx.kind) + " tau=" + std::to_string(ctx.tau);
    out.finalize(std::move(prov));
    return out;
}

SparseCountMatrix count_matrix(const Corpus& corpus, const FeatureSpace& space) {
    return count_matrix_range(corpus, space, 0, corpus.sentence_count());
}

SparseCountMatrix combine_window(const std::vector<const SparseCountMatrix*>& mats,
                                 const std::vector<double>& alphas) {
    if (mats.empty()) throw UsageError("combine_window needs at least one matrix");
    if (mats.size() != alphas.size()) {
        throw UsageError("combine_window needs one weight per matrix");
    }
    const auto& first = *mats.front();
    std::set<int> taus;
    for (std::size_t idx = 0; idx < mats.size(); ++idx) {
        const auto& m = *mats[idx];
        if (m.rows() != first.rows() || m.cols() != first.cols()) {
            throw UsageError("combine_window: dimension mismatch");
        }
        if (m.provenance().feature_kind != first.provenance().feature_kind ||
            m.provenance().context_kind != first.provenance().context_kind) {
            throw UsageError("combine_window: inputs must share feature kind and context type");
        }
        for (int tau : m.provenance().taus) {
            if (!taus.insert(tau).second) {
                throw UsageError("combine_window: duplicate context offset " + std::to_string(tau));
            }
        }
        if (alphas[idx] <= 0.0) throw UsageError("combine_window: weights must be positive");
    }

    SparseCountMatrix out(first.rows(), first.cols());
    for (std::size_t idx = 0; idx < mats.size(); ++idx) {
        const auto& m = mats[idx]->matrix();
        for (int k = 0; k < m.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
                out.add(static_cast<std::uint32_t>(it.row()),
                        static_cast<std::uint32_t>(it.col()), alphas[idx] * it.value());
            }
        }
    }
    MatrixProvenance prov;
    prov.feature_kind = first.provenance().feature_kind;
    prov.context_kind = first.provenance().context_kind;
    prov.taus.assign(taus.begin(), taus.end());
    prov.singleton = false;
    prov.summary = "window(";
    for (std::size_t idx = 0; idx < mats.size(); ++idx) {
        if (idx) prov.summary += ", ";
        prov.summary += "tau=" + std::to_string(mats[idx]->provenance().taus.front()) +
                        " alpha=" + format_double(alphas[idx]);
    }
    prov.summary += ")";
    out.finalize(std::move(prov));
    return out;
}

SparseCountMatrix combine_union(const std::vector<const SparseCountMatrix*>& mats) {
    if (mats.empty()) throw UsageError("combine_union needs at least one matrix");
    const std::size_t n = mats.front()->cols();
    std::size_t m_total = 0;
    for (const auto* m : mats) {
        if (m->cols() != n) throw UsageError("combine_union: column-count mismatch");
        m_total += m->rows();
    }
    SparseCountMatrix out(m_total, n);
    std::size_t offset = 0;
    MatrixProvenance prov;
    prov.singleton = false;
    prov.summary = "union(";
    for (std::size_t idx = 0; idx < mats.size(); ++idx) {
        const auto& m = mats[idx]->matrix();
        for (int k = 0; k < m.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
                out.add(static_cast<std::uint32_t>(it.row() + offset),
                        static_cast<std::uint32_t>(it.col()), it.value());
            }
        }
        if (idx) prov.summary += ", ";
        prov.summary += mats[idx]->provenance().summary + "@" + std::to_string(offset);
        offset += mats[idx]->rows();
    }
    prov.summary += ")";
    prov.feature_kind = mats.front()->provenance().feature_kind;
    prov.context_kind = mats.front()->provenance().context_kind;
    out.finalize(std::move(prov));
    return out;
}

}  // namespace pwv
