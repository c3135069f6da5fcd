#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "pwv/common.hpp"

namespace pwv {

inline constexpr const char* kUnknownToken = "<unknown>";
inline constexpr const char* kNumberToken = "<number>";
inline constexpr const char* kRootToken = "<root>";

struct NormalizationRules {
    bool lowercase = false;
    bool collapse_digits = true;
    std::uint64_t min_count = 1;
};

// Vocabulary over normalized token types. Ids are dense, specials first
// (<unknown>=0, <number>=1, <root>=2), then types sorted by descending
// frequency with lexicographic tie-break.
class Vocabulary {
public:
    static constexpr std::uint32_t kUnknownId = 0;
    static constexpr std::uint32_t kNumberId = 1;
    static constexpr std::uint32_t kRootId = 2;
    static constexpr std::uint32_t kNumSpecials = 3;

    static Vocabulary from_counts(
        const std::unordered_map<std::string, std::uint64_t>& type_counts,
        const NormalizationRules& rules);

    // Id of a normalized token; unseen types map to <unknown>.
    std::uint32_t id_of(const std::string& token) const;
    const std::string& token_of(std::uint32_t id) const { return tokens_.at(id); }
    std::uint64_t count_of(std::uint32_t id) const { return counts_.at(id); }
    std::size_t size() const { return tokens_.size(); }
    static bool is_special(std::uint32_t id) { return id < kNumSpecials; }

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
};

struct Token {
    static constexpr std::int32_t kNoHead = std::numeric_limits<std::int32_t>::min();
    std::uint32_t word_id = 0;
    std::uint32_t form_id = 0;
    std::int32_t pos_id = -1;          // -1 when the corpus carries no POS layer
    std::int32_t head_offset = kNoHead;  // sentence-relative; 0 marks root
    std::uint32_t sentence_id = 0;
};

// Indexed token stream over a vocabulary, with sentence spans and optional
// POS / dependency-head annotation. Immutable after ingestion.
class Corpus {
public:
    Corpus() = default;

    std::size_t size() const { return tokens_.size(); }
    const Token& token(std::size_t t) const { return tokens_[t]; }
    const std::vector<Token>& tokens() const { return tokens_; }

    std::size_t sentence_count() const { return sentence_begin_.empty() ? 0 : sentence_begin_.size() - 1; }
    // [begin, end) token range of sentence sid.
    std::pair<std::size_t, std::size_t> sentence_span(std::uint32_t sid) const {
        return {sentence_begin_[sid], sentence_begin_[sid + 1]};
    }

    bool has_pos() const { return !pos_names_.empty(); }
    bool has_heads() const { return has_heads_; }
    const std::vector<std::string>& pos_names() const { return pos_names_; }
    std::size_t dropped_head_sentences() const { return dropped_head_sentences_; }

    const Vocabulary& vocab() const { return *vocab_; }

private:
    friend Corpus ingest_raw(const std::string&, const Vocabulary&, const NormalizationRules&);
    friend Corpus ingest_conllu(const std::string&, const Vocabulary&, const NormalizationRules&);
    friend Corpus ingest_conll2003_ner(const std::string&, const Vocabulary&, const NormalizationRules&);

    std::vector<Token> tokens_;
    std::vector<std::size_t> sentence_begin_;  // size = #sentences + 1
    std::vector<std::string> pos_names_;
    bool has_heads_ = false;
    std::size_t dropped_head_sentences_ = 0;
    const Vocabulary* vocab_ = nullptr;
};

// Lowercases if requested and collapses digit-only tokens to <number>.
std::string normalize_token(std::string_view raw, const NormalizationRules& rules);

// Core vocabulary builder over an already-normalized token stream.
Vocabulary build_vocabulary(const std::vector<std::string>& normalized_stream,
                            const NormalizationRules& rules);

// File-level builders (first pass of the two-pass ingestion).
Vocabulary build_vocabulary_raw(const std::string& path, const NormalizationRules& rules);
Vocabulary build_vocabulary_conllu(const std::string& path, const NormalizationRules& rules);

// Raw corpus: whitespace-tokenized UTF-8 text, one sentence per line.
Corpus ingest_raw(const std::string& path, const Vocabulary& vocab,
                  const NormalizationRules& rules);

// CoNLL-U: UPOS and HEAD are kept; multiword ranges and empty nodes skipped.
// Sentences whose head annotation is cyclic or out of range lose the head
// fields but keep their tokens.
Corpus ingest_conllu(const std::string& path, const Vocabulary& vocab,
                     const NormalizationRules& rules);

// CoNLL-2003 style NER data (token ... tag). Entity types land in the POS
// layer with BIO prefixes stripped, so eval code can treat them as classes.
Corpus ingest_conll2003_ner(const std::string& path, const Vocabulary& vocab,
                            const NormalizationRules& rules);

}  // namespace pwv
