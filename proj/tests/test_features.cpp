#include <doctest.h>

#include <set>

#include "pwv/features.hpp"
#include "test_util.hpp"

using namespace pwv;
using namespace pwvtest;

TEST_SUITE_BEGIN("features");

TEST_CASE("resolve_context: neighbourhood offsets respect sentence bounds") {
    auto rc = make_raw_corpus("a b\na\n");
    const ContextFn back = ContextFn::neighbourhood(-1);

    CHECK(resolve_context(rc.corpus, 1, back).is_token());
    CHECK(resolve_context(rc.corpus, 1, back).index == 0);
    CHECK(resolve_context(rc.corpus, 0, back).is_none());   // sentence start
    CHECK(resolve_context(rc.corpus, 2, back).is_none());   // boundary blocks
    const ContextFn cross = ContextFn::neighbourhood(-1, /*cross_sentence=*/true);
    CHECK(resolve_context(rc.corpus, 2, cross).index == 1);  // flag restores corpus-level windows
}

TEST_CASE("resolve_context: dependency chains reach ROOT") {
    std::string text;
    text += conllu_row(1, "a", "DET", 2) + "\n";   // a -> b
    text += conllu_row(2, "b", "NOUN", 0) + "\n";  // b -> root
    auto cc = make_conllu_corpus(text);

    CHECK(resolve_context(cc.corpus, 0, ContextFn::dependency(1)).index == 1);
    CHECK(resolve_context(cc.corpus, 0, ContextFn::dependency(2)).is_root());
    CHECK(resolve_context(cc.corpus, 0, ContextFn::dependency(5)).is_root());
    CHECK(resolve_context(cc.corpus, 1, ContextFn::dependency(1)).is_root());
}

TEST_CASE("resolve_context: dependency context needs head annotation") {
    auto rc = make_raw_corpus("a b\n");
    CHECK_THROWS_AS(resolve_context(rc.corpus, 0, ContextFn::dependency(1)), DataError);
}

TEST_CASE("context constructors validate tau") {
    CHECK_THROWS_AS(ContextFn::neighbourhood(0), UsageError);
    CHECK_THROWS_AS(ContextFn::dependency(0), UsageError);
}

TEST_CASE("build_feature_space enumerates realizable symbols lexicographically") {
    auto rc = make_raw_corpus("a b a\n");
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    REQUIRE(space.size() == 2);
    CHECK(space.symbol(0) == "a");
    CHECK(space.symbol(1) == "b");
    // Word-form symbols are a subset of the vocabulary symbols.
    for (std::uint32_t fid = 0; fid < space.size(); ++fid) {
        CHECK(rc.vocab->id_of(space.symbol(fid)) != Vocabulary::kUnknownId);
    }
}

TEST_CASE("POS spaces are bounded by the tag inventory plus ROOT") {
    std::string text;
    text += conllu_row(1, "a", "DET", 2) + "\n";
    text += conllu_row(2, "b", "NOUN", 0) + "\n";
    text += "\n";
    text += conllu_row(1, "c", "VERB", 0) + "\n";
    auto cc = make_conllu_corpus(text);
    const FeatureSpace space =
        FeatureSpace::build(cc.corpus, FeatureKind::pos, ContextFn::dependency(1));
    CHECK(space.size() <= cc.corpus.pos_names().size() + 1);
    CHECK(space.id_of_symbol(kRootToken).has_value());
}

TEST_CASE("feature_at resolves forms, tags, joints, and ROOT") {
    std::string text;
    text += conllu_row(1, "cat", "NOUN", 2) + "\n";
    text += conllu_row(2, "runs", "VERB", 0) + "\n";
    auto cc = make_conllu_corpus(text);

    SUBCASE("joint features are (form, pos) pairs") {
        const FeatureSpace joint =
            FeatureSpace::build(cc.corpus, FeatureKind::joint, ContextFn::neighbourhood(-1));
        const auto fid = feature_at(cc.corpus, ContextRef::token(0), joint);
        REQUIRE(fid.has_value());
        CHECK(joint.symbol(*fid) == "cat|NOUN");
        // A pair never observed as a context is pruned from the space.
        CHECK_FALSE(joint.id_of_symbol("runs|VERB").has_value());
        CHECK_FALSE(feature_at(cc.corpus, ContextRef::token(1), joint).has_value());
    }
    SUBCASE("ROOT maps to the dedicated symbol") {
        const FeatureSpace pos =
            FeatureSpace::build(cc.corpus, FeatureKind::pos, ContextFn::dependency(1));
        const auto fid = feature_at(cc.corpus, ContextRef::root(), pos);
        REQUIRE(fid.has_value());
        CHECK(pos.symbol(*fid) == kRootToken);
    }
    SUBCASE("NONE context fires nothing") {
        const FeatureSpace wf =
            FeatureSpace::build(cc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
        CHECK_FALSE(feature_at(cc.corpus, ContextRef::none(), wf).has_value());
    }
}

TEST_CASE("joint features require annotation") {
    auto rc = make_raw_corpus("a b\n");
    CHECK_THROWS_AS(
        FeatureSpace::build(rc.corpus, FeatureKind::joint, ContextFn::neighbourhood(-1)),
        DataError);
}

TEST_CASE("at most one feature fires per token under a singleton space") {
    auto rc = make_raw_corpus("a b c a b\nc a\n");
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(1));
    for (std::size_t t = 0; t < rc.corpus.size(); ++t) {
        const ContextRef ref = resolve_context(rc.corpus, t, space.context());
        const auto fid = feature_at(rc.corpus, ref, space);
        if (ref.is_none()) {
            CHECK_FALSE(fid.has_value());
        } else {
            CHECK(fid.has_value());  // exactly the one indicator
        }
    }
}

TEST_CASE("identical corpus and spec produce identical id maps") {
    const std::string text = "d c b a\nb a d\n";
    auto rc1 = make_raw_corpus(text);
    auto rc2 = make_raw_corpus(text);
    const FeatureSpace s1 =
        FeatureSpace::build(rc1.corpus, FeatureKind::word_form, ContextFn::neighbourhood(2));
    const FeatureSpace s2 =
        FeatureSpace::build(rc2.corpus, FeatureKind::word_form, ContextFn::neighbourhood(2));
    REQUIRE(s1.size() == s2.size());
    for (std::uint32_t fid = 0; fid < s1.size(); ++fid) CHECK(s1.symbol(fid) == s2.symbol(fid));
}

TEST_CASE("shared enumeration aligns rows across offsets") {
    auto rc = make_raw_corpus("a b a c\n");
    const auto spaces = FeatureSpace::build_shared(
        rc.corpus, FeatureKind::word_form,
        {ContextFn::neighbourhood(-1), ContextFn::neighbourhood(1)});
    REQUIRE(spaces.size() == 2);
    CHECK(spaces[0].size() == spaces[1].size());
    for (std::uint32_t fid = 0; fid < spaces[0].size(); ++fid) {
        CHECK(spaces[0].symbol(fid) == spaces[1].symbol(fid));
    }
    CHECK(spaces[0].context().tau == -1);
    CHECK(spaces[1].context().tau == 1);
}

TEST_CASE("manifest lists feature ids and symbols") {
    auto rc = make_raw_corpus("a b a\n");
    const FeatureSpace space =
        FeatureSpace::build(rc.corpus, FeatureKind::word_form, ContextFn::neighbourhood(-1));
    TempDir dir;
    space.save_manifest(dir.file("features.tsv"));
    CHECK(read_file(dir.file("features.tsv")) == "0\ta\n1\tb\n");
}

TEST_SUITE_END();
