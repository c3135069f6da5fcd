#include <doctest.h>

#include <random>

#include "pwv/coocmat.hpp"
#include "test_util.hpp"

using namespace pwv;
using namespace pwvtest;

namespace {

// Brute-force singleton-context counter over all (t, tau) pairs, independent
// of the feature-space machinery: symbol-keyed counts.
std::map<std::pair<std::string, std::string>, double> hand_counts(const Corpus& corpus,
                                                                  int tau) {
    std::map<std::pair<std::string, std::string>, double> counts;
    for (std::size_t t = 0; t < corpus.size(); ++t) {
        const std::int64_t s = static_cast<std::int64_t>(t) + tau;
        if (s < 0 || s >= static_cast<std::int64_t>(corpus.size())) continue;
        if (corpus.token(t).sentence_id != corpus.token(s).sentence_id) continue;
        const std::string feature = corpus.vocab().token_of(corpus.token(s).form_id);
        const std::string word = corpus.vocab().token_of(corpus.token(t).word_id);
        counts[{feature, word}] += 1.0;
    }
    return counts;
}

void check_counts_match(const SparseCountMatrix& mat, const FeatureSpace& space,
                        const Vocabulary& vocab,
                        const std::map<std::pair<std::string, std::string>, double>& expected) {
    double expected_total = 0.0;
    for (const auto& [key, v] : expected) {
        CHECK(entry(mat, space, vocab, key.first, key.second) == v);
        expected_total += v;
    }
    CHECK(mat.total() == expected_total);  // nothing unaccounted for
}

std::string random_corpus_text(std::mt19937_64& rng, int sentences, int max_len, int vocab) {
    std::uniform_int_distribution<int> len(1, max_len);
    std::uniform_int_distribution<int> word(0, vocab - 1);
    std::string text;
    for (int s = 0; s < sentences; ++s) {
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            if (i) text += ' ';
            text += static_cast<char>('a' + word(rng));
        }
        text += '\n';
    }
    return text;
}

}  // namespace

TEST_SUITE_BEGIN("coocmat");

TEST_CASE("count_matrix matches the hand-count oracle on [a b a c]") {
    auto rc = make_raw_corpus("a b a c\n");

    SUBCASE("tau = -1") {
        const FeatureSpace space =
            FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
        const SparseCountMatrix M = count_matrix(rc.corpus, space);
        check_counts_match(M, space, *rc.vocab,
                           {{{"a", "b"}, 1.0}, {{"a", "c"}, 1.0}, {{"b", "a"}, 1.0}});
        CHECK(entry(M, space, *rc.vocab, "a", "a") == 0.0);
        CHECK(entry(M, space, *rc.vocab, "c", "a") == 0.0);  // zero row
    }
    SUBCASE("tau = +1") {
        const FeatureSpace space =
            FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(1));
        const SparseCountMatrix M = count_matrix(rc.corpus, space);
        check_counts_match(M, space, *rc.vocab,
                           {{{"a", "b"}, 1.0}, {{"b", "a"}, 1.0}, {{"c", "a"}, 1.0}});
    }
    SUBCASE("empty token range yields a zero matrix") {
        const FeatureSpace space =
            FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
        const SparseCountMatrix M = count_matrix_range(rc.corpus, space, 0, 0);
        CHECK(M.rows() == space.size());
        CHECK(M.cols() == rc.vocab->size());
        CHECK(M.nnz() == 0);
    }
}

TEST_CASE("singleton-context total equals tokens with resolvable contexts") {
    auto rc = make_raw_corpus("a b a c\nb\n");
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    const SparseCountMatrix M = count_matrix(rc.corpus, space);
    // Sentence [a b a c]: tokens at 1,2,3 resolve; sentence [b]: none.
    CHECK(M.total() == 3.0);
}

TEST_CASE("combine_window forms the weighted sum") {
    auto rc = make_raw_corpus("a b a c\n");
    const auto spaces = FeatureSpace::build_shared(
        rc.corpus, FeatureKind::word_form,
        {ContextFn::neighbourhood(-1), ContextFn::neighbourhood(-2)});
    const SparseCountMatrix M1 = count_matrix(rc.corpus, spaces[0]);
    const SparseCountMatrix M2 = count_matrix(rc.corpus, spaces[1]);
    check_counts_match(M2, spaces[1], *rc.vocab, {{{"a", "a"}, 1.0}, {{"b", "c"}, 1.0}});

    SUBCASE("hand sum with alphas (1, 1/2)") {
        const SparseCountMatrix W = combine_window({&M1, &M2}, {1.0, 0.5});
        check_counts_match(W, spaces[0], *rc.vocab,
                           {{{"a", "a"}, 0.5},
                            {{"a", "b"}, 1.0},
                            {{"a", "c"}, 1.0},
                            {{"b", "a"}, 1.0},
                            {{"b", "c"}, 0.5}});
    }
    SUBCASE("singleton sum is the identity") {
        const SparseCountMatrix W = combine_window({&M1}, {1.0});
        CHECK(W.dense() == M1.dense());
    }
    SUBCASE("errors: weight count, positivity, duplicate tau") {
        CHECK_THROWS_AS(combine_window({&M1, &M2}, {1.0}), UsageError);
        CHECK_THROWS_AS(combine_window({&M1, &M2}, {1.0, -0.5}), UsageError);
        CHECK_THROWS_AS(combine_window({&M1, &M1}, {1.0, 0.5}), UsageError);
    }
}

TEST_CASE("symmetric window k=1 equals M(-1) + M(+1)") {
    auto rc = make_raw_corpus("a b a c\nc a b\n");
    const auto spaces = FeatureSpace::build_shared(
        rc.corpus, FeatureKind::word_form,
        {ContextFn::neighbourhood(-1), ContextFn::neighbourhood(1)});
    const SparseCountMatrix Mb = count_matrix(rc.corpus, spaces[0]);
    const SparseCountMatrix Mf = count_matrix(rc.corpus, spaces[1]);
    // alpha_{|tau|} = 1/|tau| puts weight 1 on both offsets at k=1.
    const SparseCountMatrix W = combine_window({&Mb, &Mf}, {1.0, 1.0});
    CHECK(Eigen::MatrixXd(W.dense()) == Eigen::MatrixXd(Mb.dense() + Mf.dense()));
}

TEST_CASE("combine_window is linear against a dense oracle") {
    auto rc = make_raw_corpus("a b c a b c\nb c a\nc b\n");
    const auto spaces = FeatureSpace::build_shared(
        rc.corpus, FeatureKind::word_form,
        {ContextFn::neighbourhood(-1), ContextFn::neighbourhood(-2)});
    const SparseCountMatrix A = count_matrix(rc.corpus, spaces[0]);
    const SparseCountMatrix B = count_matrix(rc.corpus, spaces[1]);
    const double alpha = 0.5, beta = 0.25;  // dyadic, so the check is exact
    const SparseCountMatrix W = combine_window({&A, &B}, {alpha, beta});
    CHECK(Eigen::MatrixXd(W.dense()) == Eigen::MatrixXd(alpha * A.dense() + beta * B.dense()));
}

TEST_CASE("combine_union stacks row blocks in order") {
    auto rc = make_raw_corpus("a b a c\n");
    const FeatureSpace s1 =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    const FeatureSpace s2 =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(1));
    const SparseCountMatrix M1 = count_matrix(rc.corpus, s1);
    const SparseCountMatrix M2 = count_matrix(rc.corpus, s2);

    const SparseCountMatrix U = combine_union({&M1, &M2});
    CHECK(U.rows() == M1.rows() + M2.rows());
    CHECK(U.cols() == M1.cols());
    Eigen::MatrixXd expected(U.rows(), U.cols());
    expected << M1.dense(), M2.dense();
    CHECK(Eigen::MatrixXd(U.dense()) == expected);

    SUBCASE("union of one matrix is the same matrix") {
        const SparseCountMatrix single = combine_union({&M1});
        CHECK(single.dense() == M1.dense());
    }
    SUBCASE("column marginals add across blocks") {
        CHECK(U.col_marginals() == Eigen::VectorXd(M1.col_marginals() + M2.col_marginals()));
    }
    SUBCASE("column-count mismatch is rejected") {
        SparseCountMatrix other(2, 2);
        other.add(0, 0, 1.0);
        other.finalize({});
        CHECK_THROWS_AS(combine_union({&M1, &other}), UsageError);
    }
}

TEST_CASE("marginals are exact row and column sums") {
    Eigen::MatrixXd D(3, 3);
    D << 0, 1, 1, 1, 0, 0, 0, 0, 0;
    const SparseCountMatrix M = SparseCountMatrix::from_dense(D);
    CHECK(M.row_marginals() == Eigen::Vector3d(2, 1, 0));
    CHECK(M.col_marginals() == Eigen::Vector3d(1, 1, 1));
    CHECK(M.row_marginals().sum() == M.total());
    CHECK(M.col_marginals().sum() == M.total());

    SUBCASE("zero matrix has zero marginals") {
        SparseCountMatrix Z(2, 3);
        Z.finalize({});
        CHECK(Z.row_marginals().isZero(0.0));
        CHECK(Z.col_marginals().isZero(0.0));
    }
}

TEST_CASE("transpose duality: backward counts equal transposed forward counts") {
    std::mt19937_64 rng = test_rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        auto rc = make_raw_corpus(random_corpus_text(rng, 4, 8, 4));
        for (int tau = 1; tau <= 3; ++tau) {
            const auto spaces = FeatureSpace::build_shared(
                rc.corpus, FeatureKind::word_form,
                {ContextFn::neighbourhood(-tau), ContextFn::neighbourhood(tau)});
            const SparseCountMatrix Mb = count_matrix(rc.corpus, spaces[0]);
            const SparseCountMatrix Mf = count_matrix(rc.corpus, spaces[1]);
            // Entry-wise over the symbol universe: M(-tau)[s, w] = M(+tau)[w, s].
            for (std::uint32_t w1 = 0; w1 < rc.vocab->size(); ++w1) {
                for (std::uint32_t w2 = 0; w2 < rc.vocab->size(); ++w2) {
                    const std::string& s1 = rc.vocab->token_of(w1);
                    const std::string& s2 = rc.vocab->token_of(w2);
                    CHECK(entry(Mb, spaces[0], *rc.vocab, s1, s2) ==
                          entry(Mf, spaces[1], *rc.vocab, s2, s1));
                }
            }
        }
    }
}

TEST_CASE("sharded counting merged by addition equals one-pass counting") {
    std::mt19937_64 rng = test_rng(77);
    auto rc = make_raw_corpus(random_corpus_text(rng, 6, 7, 4));
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    const SparseCountMatrix whole = count_matrix(rc.corpus, space);

    Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(whole.rows(), whole.cols());
    const std::size_t sentences = rc.corpus.sentence_count();
    for (std::size_t s = 0; s < sentences; ++s) {
        merged += count_matrix_range(rc.corpus, space, s, s + 1).dense();
    }
    CHECK(Eigen::MatrixXd(whole.dense()) == merged);
}

TEST_CASE("column marginals never exceed word frequencies") {
    std::mt19937_64 rng = test_rng(4711);
    auto rc = make_raw_corpus(random_corpus_text(rng, 5, 6, 3));
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-2));
    const SparseCountMatrix M = count_matrix(rc.corpus, space);
    for (std::uint32_t w = 0; w < rc.vocab->size(); ++w) {
        CHECK(M.col_marginals()[w] <= static_cast<double>(rc.vocab->count_of(w)));
    }
}

TEST_CASE("ancestral dependency contexts combine like windows") {
    std::string text;
    text += conllu_row(1, "x", "DET", 2) + "\n";   // x -> y
    text += conllu_row(2, "y", "NOUN", 0) + "\n";  // y -> root
    auto cc = make_conllu_corpus(text);
    const auto spaces = FeatureSpace::build_shared(
        cc.corpus, FeatureKind::word_form, {ContextFn::dependency(1), ContextFn::dependency(2)});
    const SparseCountMatrix M1 = count_matrix(cc.corpus, spaces[0]);
    const SparseCountMatrix M2 = count_matrix(cc.corpus, spaces[1]);
    // Parents: x->y, y->root. Grandparents: both cross the root.
    CHECK(entry(M1, spaces[0], *cc.vocab, "y", "x") == 1.0);
    CHECK(entry(M1, spaces[0], *cc.vocab, kRootToken, "y") == 1.0);
    CHECK(entry(M2, spaces[1], *cc.vocab, kRootToken, "x") == 1.0);
    CHECK(entry(M2, spaces[1], *cc.vocab, kRootToken, "y") == 1.0);

    const SparseCountMatrix W = combine_window({&M1, &M2}, {1.0, 0.5});
    CHECK(entry(W, spaces[0], *cc.vocab, "y", "x") == 1.0);
    CHECK(entry(W, spaces[0], *cc.vocab, kRootToken, "y") == 1.5);
    CHECK(entry(W, spaces[0], *cc.vocab, kRootToken, "x") == 0.5);
}

TEST_CASE("spill format round-trips") {
    auto rc = make_raw_corpus("a b a c\n");
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    const SparseCountMatrix M = count_matrix(rc.corpus, space);
    TempDir dir;
    M.save(dir.file("m.spill"));
    const SparseCountMatrix back = SparseCountMatrix::load(dir.file("m.spill"));
    CHECK(back.rows() == M.rows());
    CHECK(back.cols() == M.cols());
    CHECK(back.dense() == M.dense());
}

TEST_SUITE_END();
