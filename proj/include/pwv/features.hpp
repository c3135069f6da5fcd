#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pwv/corpus.hpp"

namespace pwv {

enum class ContextKind { neighbourhood, dependency };

// A singleton context function: the neighbour at offset tau, or the tau-th
// ancestor in the dependency tree.
struct ContextFn {
    ContextKind kind = ContextKind::neighbourhood;
    int tau = -1;
    bool cross_sentence = false;  // neighbourhood windows may cross sentence boundaries

    static ContextFn neighbourhood(int tau, bool cross_sentence = false);
    static ContextFn dependency(int tau);
};

enum class FeatureKind { word_form, pos, joint };

const char* to_string(FeatureKind k);
const char* to_string(ContextKind k);

// Where a context function lands: another token, the dependency root, or
// nowhere (sentence edge / missing annotation).
struct ContextRef {
    enum class Tag { token, root, none } tag = Tag::none;
    std::size_t index = 0;

    static ContextRef token(std::size_t t) { return {Tag::token, t}; }
    static ContextRef root() { return {Tag::root, 0}; }
    static ContextRef none() { return {Tag::none, 0}; }
    bool is_token() const { return tag == Tag::token; }
    bool is_root() const { return tag == Tag::root; }
    bool is_none() const { return tag == Tag::none; }
};

ContextRef resolve_context(const Corpus& corpus, std::size_t t, const ContextFn& ctx);

// Enumerated set of feature symbols realizable as contexts in a corpus.
// Ids are dense and lexicographic over symbols. Joint spaces keep only
// observed (form, pos) pairs.
class FeatureSpace {
public:
    static FeatureSpace build(const Corpus& corpus, FeatureKind kind, const ContextFn& ctx);

    // One space per context over a shared symbol enumeration (the union of
    // symbols realizable under any of the contexts). Needed so that window
    // and union combinations operate on aligned rows.
    static std::vector<FeatureSpace> build_shared(const Corpus& corpus, FeatureKind kind,
                                                  const std::vector<ContextFn>& ctxs);

    std::size_t size() const { return symbols_.size(); }  // m
    FeatureKind kind() const { return kind_; }
    const ContextFn& context() const { return context_; }
    const std::string& symbol(std::uint32_t fid) const { return symbols_.at(fid); }
    std::optional<std::uint32_t> id_of_symbol(const std::string& symbol) const;

    void save_manifest(const std::string& path) const;

private:
    friend std::optional<std::uint32_t> feature_at(const Corpus&, const ContextRef&,
                                                   const FeatureSpace&);
    FeatureKind kind_ = FeatureKind::word_form;
    ContextFn context_;
    std::vector<std::string> symbols_;  // lexicographic
    std::unordered_map<std::string, std::uint32_t> symbol_ids_;
    // Fast lookups, indexed by corpus-level ids.
    std::vector<std::int32_t> form_fid_;               // word_form: form_id -> fid
    std::vector<std::int32_t> pos_fid_;                // pos: pos_id -> fid
    std::unordered_map<std::uint64_t, std::uint32_t> joint_fid_;  // (form,pos) -> fid
    std::int32_t root_fid_ = -1;
};

// Feature id firing for a resolved context position, or nullopt (context is
// NONE, or the joint pair was pruned).
std::optional<std::uint32_t> feature_at(const Corpus& corpus, const ContextRef& pos,
                                        const FeatureSpace& space);

}  // namespace pwv
