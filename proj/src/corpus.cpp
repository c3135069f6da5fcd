#include "pwv/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace pwv {

namespace {

const char* kSpecialTokens[] = {kUnknownToken, kNumberToken, kRootToken};

bool digits_only(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

}  // namespace

std::string normalize_token(std::string_view raw, const NormalizationRules& rules) {
    if (rules.collapse_digits && digits_only(raw)) return kNumberToken;
    std::string out(raw);
    if (rules.lowercase) {
        for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

Vocabulary Vocabulary::from_counts(
    const std::unordered_map<std::string, std::uint64_t>& type_counts,
    const NormalizationRules& rules) {
    if (rules.min_count < 1) throw UsageError("min_count must be >= 1");

    Vocabulary v;
    v.tokens_.assign(std::begin(kSpecialTokens), std::end(kSpecialTokens));
    v.counts_.assign(kNumSpecials, 0);

    std::uint64_t unknown_count = 0;
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(type_counts.size());
    for (const auto& [tok, cnt] : type_counts) {
        if (tok == kNumberToken) {
            v.counts_[kNumberId] += cnt;  // special, exempt from thresholding
        } else if (tok == kUnknownToken) {
            unknown_count += cnt;
        } else if (cnt >= rules.min_count) {
            kept.emplace_back(tok, cnt);
        } else {
            unknown_count += cnt;
        }
    }
    v.counts_[kUnknownId] = unknown_count;

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (auto& [tok, cnt] : kept) {
        v.tokens_.push_back(std::move(tok));
        v.counts_.push_back(cnt);
    }
    for (std::uint32_t id = 0; id < v.tokens_.size(); ++id) v.ids_[v.tokens_[id]] = id;
    return v;
}

std::uint32_t Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnknownId : it->second;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t id = 0; id < tokens_.size(); ++id) {
        out << tokens_[id] << '\t' << counts_[id] << '\n';
    }
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 2) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected token<TAB>count");
        }
        v.tokens_.emplace_back(fields[0]);
        try {
            v.counts_.push_back(std::stoull(std::string(fields[1])));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad count");
        }
    }
    if (v.tokens_.size() < kNumSpecials || v.tokens_[0] != kUnknownToken ||
        v.tokens_[1] != kNumberToken || v.tokens_[2] != kRootToken) {
        throw DataError(path + ": vocabulary file must start with the special tokens");
    }
    for (std::uint32_t id = 0; id < v.tokens_.size(); ++id) v.ids_[v.tokens_[id]] = id;
    return v;
}

Vocabulary build_vocabulary(const std::vector<std::string>& normalized_stream,
                            const NormalizationRules& rules) {
    if (normalized_stream.empty()) throw DataError("empty corpus");
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& tok : normalized_stream) ++counts[tok];
    return Vocabulary::from_counts(counts, rules);
}

namespace {

template <typename TokenFn>
void scan_raw(const std::string& path, TokenFn&& on_token) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!valid_utf8(line)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed UTF-8");
        }
        auto toks = split_whitespace(line);
        bool first = true;
        for (auto t : toks) {
            on_token(t, first);
            first = false;
        }
    }
}

struct ConlluRow {
    std::string form;
    std::string upos;
    int position;  // 1-based within sentence
    int head;      // 0 = root
};

template <typename SentenceFn>
void scan_conllu(const std::string& path, SentenceFn&& on_sentence) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<ConlluRow> sent;
    auto flush = [&] {
        if (!sent.empty()) {
            on_sentence(sent);
            sent.clear();
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 10) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 10 tab-separated columns, got " +
                            std::to_string(fields.size()));
        }
        std::string_view id = fields[0];
        // Skip multiword-token ranges ("3-4") and empty nodes ("5.1").
        if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
            continue;
        }
        ConlluRow row;
        row.form = std::string(fields[1]);
        row.upos = std::string(fields[3]);
        try {
            row.position = std::stoi(std::string(id));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": non-integer token ID");
        }
        try {
            std::size_t used = 0;
            std::string head_str(fields[6]);
            row.head = std::stoi(head_str, &used);
            if (used != head_str.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": non-integer HEAD column");
        }
        sent.push_back(std::move(row));
    }
    flush();
}

// True iff every node reaches root (head 0) within sentence-length steps and
// all heads point inside the sentence.
bool heads_are_tree(const std::vector<ConlluRow>& sent) {
    const int n = static_cast<int>(sent.size());
    for (int i = 0; i < n; ++i) {
        int cur = i + 1;
        int steps = 0;
        while (cur != 0) {
            if (cur < 1 || cur > n) return false;
            cur = sent[cur - 1].head;
            if (++steps > n) return false;  // cycle
        }
    }
    return true;
}

}  // namespace

Vocabulary build_vocabulary_raw(const std::string& path, const NormalizationRules& rules) {
    std::unordered_map<std::string, std::uint64_t> counts;
    scan_raw(path, [&](std::string_view tok, bool) { ++counts[normalize_token(tok, rules)]; });
    if (counts.empty()) throw DataError("empty corpus");
    return Vocabulary::from_counts(counts, rules);
}

Vocabulary build_vocabulary_conllu(const std::string& path, const NormalizationRules& rules) {
    std::unordered_map<std::string, std::uint64_t> counts;
    scan_conllu(path, [&](const std::vector<ConlluRow>& sent) {
        for (const auto& row : sent) ++counts[normalize_token(row.form, rules)];
    });
    if (counts.empty()) throw DataError("empty corpus");
    return Vocabulary::from_counts(counts, rules);
}

Corpus ingest_raw(const std::string& path, const Vocabulary& vocab,
                  const NormalizationRules& rules) {
    Corpus c;
    c.vocab_ = &vocab;
    scan_raw(path, [&](std::string_view tok, bool sentence_start) {
        if (sentence_start) c.sentence_begin_.push_back(c.tokens_.size());
        Token t;
        t.word_id = vocab.id_of(normalize_token(tok, rules));
        t.form_id = t.word_id;  // raw corpus: words are annotated by their forms
        t.sentence_id = static_cast<std::uint32_t>(c.sentence_begin_.size() - 1);
        c.tokens_.push_back(t);
    });
    if (c.tokens_.empty()) throw DataError("empty corpus");
    c.sentence_begin_.push_back(c.tokens_.size());
    return c;
}

Corpus ingest_conllu(const std::string& path, const Vocabulary& vocab,
                     const NormalizationRules& rules) {
    Corpus c;
    c.vocab_ = &vocab;
    c.has_heads_ = true;
    std::unordered_map<std::string, std::int32_t> pos_ids;
    scan_conllu(path, [&](const std::vector<ConlluRow>& sent) {
        c.sentence_begin_.push_back(c.tokens_.size());
        const bool good_heads = heads_are_tree(sent);
        if (!good_heads) ++c.dropped_head_sentences_;
        for (const auto& row : sent) {
            Token t;
            t.word_id = vocab.id_of(normalize_token(row.form, rules));
            t.form_id = t.word_id;
            auto [it, inserted] = pos_ids.try_emplace(row.upos, static_cast<std::int32_t>(c.pos_names_.size()));
            if (inserted) c.pos_names_.push_back(row.upos);
            t.pos_id = it->second;
            if (good_heads) {
                t.head_offset = row.head == 0 ? 0 : row.head - row.position;
            }
            t.sentence_id = static_cast<std::uint32_t>(c.sentence_begin_.size() - 1);
            c.tokens_.push_back(t);
        }
    });
    if (c.tokens_.empty()) throw DataError("empty corpus");
    c.sentence_begin_.push_back(c.tokens_.size());
    return c;
}

Corpus ingest_conll2003_ner(const std::string& path, const Vocabulary& vocab,
                            const NormalizationRules& rules) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    Corpus c;
    c.vocab_ = &vocab;
    std::unordered_map<std::string, std::int32_t> class_ids;
    std::string line;
    bool in_sentence = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0] == "-DOCSTART-") {
            in_sentence = false;
            continue;
        }
        if (fields.size() < 2) throw DataError(path + ": NER rows need a token and a tag");
        if (!in_sentence) {
            c.sentence_begin_.push_back(c.tokens_.size());
            in_sentence = true;
        }
        std::string_view tag = fields.back();
        // Strip the BIO prefix: "B-PER" and "I-PER" both class as "PER".
        if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
            tag = tag.substr(2);
        }
        Token t;
        t.word_id = vocab.id_of(normalize_token(fields[0], rules));
        t.form_id = t.word_id;
        std::string tag_str(tag);
        auto [it, inserted] = class_ids.try_emplace(tag_str, static_cast<std::int32_t>(c.pos_names_.size()));
        if (inserted) c.pos_names_.push_back(tag_str);
        t.pos_id = it->second;
        t.sentence_id = static_cast<std::uint32_t>(c.sentence_begin_.size() - 1);
        c.tokens_.push_back(t);
    }
    if (c.tokens_.empty()) throw DataError("empty corpus");
    c.sentence_begin_.push_back(c.tokens_.size());
    return c;
}

}  // namespace pwv
