#include "pwv/features.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace pwv {

namespace {
constexpr char kJointSep = '|';

std::uint64_t joint_key(std::uint32_t form_id, std::int32_t pos_id) {
    return (static_cast<std::uint64_t>(form_id) << 32) | static_cast<std::uint32_t>(pos_id);
}
}  // namespace

ContextFn ContextFn::neighbourhood(int tau, bool cross_sentence) {
    if (tau == 0) throw UsageError("neighbourhood context requires tau != 0");
    return {ContextKind::neighbourhood, tau, cross_sentence};
}

ContextFn ContextFn::dependency(int tau) {
    if (tau < 1) throw UsageError("dependency context requires tau >= 1");
    return {ContextKind::dependency, tau, false};
}

const char* to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::word_form: return "word_form";
        case FeatureKind::pos: return "pos";
        case FeatureKind::joint: return "joint";
    }
    return "?";
}

const char* to_string(ContextKind k) {
    return k == ContextKind::neighbourhood ? "neighbourhood" : "dependency";
}

ContextRef resolve_context(const Corpus& corpus, std::size_t t, const ContextFn& ctx) {
    if (ctx.kind == ContextKind::neighbourhood) {
        const std::int64_t target = static_cast<std::int64_t>(t) + ctx.tau;
        if (target < 0 || target >= static_cast<std::int64_t>(corpus.size())) {
            return ContextRef::none();
        }
        if (!ctx.cross_sentence &&
            corpus.token(t).sentence_id != corpus.token(target).sentence_id) {
            return ContextRef::none();
        }
        return ContextRef::token(static_cast<std::size_t>(target));
    }
    if (!corpus.has_heads()) {
        throw DataError("dependency context requires annotated corpus");
    }
    std::size_t cur = t;
    for (int step = 0; step < ctx.tau; ++step) {
        const std::int32_t off = corpus.token(cur).head_offset;
        if (off == Token::kNoHead) return ContextRef::none();
        if (off == 0) return ContextRef::root();  // crossed the root
        cur = static_cast<std::size_t>(static_cast<std::int64_t>(cur) + off);
    }
    return ContextRef::token(cur);
}

std::optional<std::uint32_t> feature_at(const Corpus& corpus, const ContextRef& pos,
                                        const FeatureSpace& space) {
    if (pos.is_none()) return std::nullopt;
    if (pos.is_root()) {
        if (space.root_fid_ < 0) return std::nullopt;
        return static_cast<std::uint32_t>(space.root_fid_);
    }
    const Token& tok = corpus.token(pos.index);
    switch (space.kind_) {
        case FeatureKind::word_form: {
            if (tok.form_id >= space.form_fid_.size()) return std::nullopt;
            const std::int32_t fid = space.form_fid_[tok.form_id];
            if (fid < 0) return std::nullopt;
            return static_cast<std::uint32_t>(fid);
        }
        case FeatureKind::pos: {
            if (tok.pos_id < 0 || static_cast<std::size_t>(tok.pos_id) >= space.pos_fid_.size()) {
                return std::nullopt;
            }
            const std::int32_t fid = space.pos_fid_[tok.pos_id];
            if (fid < 0) return std::nullopt;
            return static_cast<std::uint32_t>(fid);
        }
        case FeatureKind::joint: {
            if (tok.pos_id < 0) return std::nullopt;
            auto it = space.joint_fid_.find(joint_key(tok.form_id, tok.pos_id));
            if (it == space.joint_fid_.end()) return std::nullopt;  // pruned pair
            return it->second;
        }
    }
    return std::nullopt;
}

FeatureSpace FeatureSpace::build(const Corpus& corpus, FeatureKind kind, const ContextFn& ctx) {
    return build_shared(corpus, kind, {ctx}).front();
}

std::vector<FeatureSpace> FeatureSpace::build_shared(const Corpus& corpus, FeatureKind kind,
                                                     const std::vector<ContextFn>& ctxs) {
    if (ctxs.empty()) throw UsageError("feature space needs at least one context");
    if ((kind == FeatureKind::pos || kind == FeatureKind::joint) && !corpus.has_pos()) {
        throw DataError(std::string(to_string(kind)) +
                        " features require a part-of-speech annotated corpus");
    }

    // Enumerate the symbols realizable as contexts under any of the given
    // context functions. Joint pruning happens here: only observed pairs
    // ever get a symbol.
    std::set<std::string> symbols;
    std::set<std::uint64_t> joint_keys;
    bool root_seen = false;
    for (const auto& ctx : ctxs) {
        for (std::size_t t = 0; t < corpus.size(); ++t) {
            const ContextRef ref = resolve_context(corpus, t, ctx);
            if (ref.is_none()) continue;
            if (ref.is_root()) {
                root_seen = true;
                continue;
            }
            const Token& tok = corpus.token(ref.index);
            switch (kind) {
                case FeatureKind::word_form:
                    symbols.insert(corpus.vocab().token_of(tok.form_id));
                    break;
                case FeatureKind::pos:
                    symbols.insert(corpus.pos_names()[tok.pos_id]);
                    break;
                case FeatureKind::joint:
                    if (joint_keys.insert(joint_key(tok.form_id, tok.pos_id)).second) {
                        symbols.insert(corpus.vocab().token_of(tok.form_id) + kJointSep +
                                       corpus.pos_names()[tok.pos_id]);
                    }
                    break;
            }
        }
    }
    if (root_seen) symbols.insert(kRootToken);

    FeatureSpace proto;
    proto.kind_ = kind;
    proto.symbols_.assign(symbols.begin(), symbols.end());  // std::set is sorted
    for (std::uint32_t fid = 0; fid < proto.symbols_.size(); ++fid) {
        proto.symbol_ids_[proto.symbols_[fid]] = fid;
    }

    // Reverse lookups from corpus-level ids.
    if (kind == FeatureKind::word_form) {
        proto.form_fid_.assign(corpus.vocab().size(), -1);
        for (std::uint32_t w = 0; w < corpus.vocab().size(); ++w) {
            auto it = proto.symbol_ids_.find(corpus.vocab().token_of(w));
            if (it != proto.symbol_ids_.end()) proto.form_fid_[w] = static_cast<std::int32_t>(it->second);
        }
    } else if (kind == FeatureKind::pos) {
        proto.pos_fid_.assign(corpus.pos_names().size(), -1);
        for (std::size_t p = 0; p < corpus.pos_names().size(); ++p) {
            auto it = proto.symbol_ids_.find(corpus.pos_names()[p]);
            if (it != proto.symbol_ids_.end()) proto.pos_fid_[p] = static_cast<std::int32_t>(it->second);
        }
    } else {
        for (std::uint64_t key : joint_keys) {
            const auto form_id = static_cast<std::uint32_t>(key >> 32);
            const auto pos_id = static_cast<std::int32_t>(key & 0xFFFFFFFFu);
            proto.joint_fid_[key] = proto.symbol_ids_.at(
                corpus.vocab().token_of(form_id) + kJointSep + corpus.pos_names()[pos_id]);
        }
    }
    if (root_seen) {
        proto.root_fid_ = static_cast<std::int32_t>(proto.symbol_ids_.at(kRootToken));
        // The root symbol can collide with the <root> vocabulary entry in
        // word-form spaces; both views name the same symbol, which is intended.
    }

    std::vector<FeatureSpace> out(ctxs.size(), proto);
    for (std::size_t i = 0; i < ctxs.size(); ++i) out[i].context_ = ctxs[i];
    return out;
}

std::optional<std::uint32_t> FeatureSpace::id_of_symbol(const std::string& symbol) const {
    auto it = symbol_ids_.find(symbol);
    if (it == symbol_ids_.end()) return std::nullopt;
    return it->second;
}

void FeatureSpace::save_manifest(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::uint32_t fid = 0; fid < symbols_.size(); ++fid) {
        out << fid << '\t' << symbols_[fid] << '\n';
    }
}

}  // namespace pwv
