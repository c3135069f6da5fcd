// pwv: principal word vectors from sparse contextual matrices.
// Subcommands: vocab, cooc, embed, eval gv|fdr|sim|spectrum.

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fstream>
#include <iostream>

#include "pwv/config.hpp"
#include "pwv/eval.hpp"
#include "pwv/common.hpp"

namespace {

using namespace pwv;

struct CommonFlags {
    std::string config_path;
    std::string output;
    long seed = -1;
    long workers = -1;
    long min_count = -1;
    bool lowercase = false;
    bool no_collapse_digits = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file");
    cmd->add_option("--output", flags.output, "output path (overrides config)");
    cmd->add_option("--seed", flags.seed, "run seed (overrides config)");
    cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
    cmd->add_option("--min-count", flags.min_count, "vocabulary frequency threshold");
    cmd->add_flag("--lowercase", flags.lowercase, "lowercase tokens");
    cmd->add_flag("--no-collapse-digits", flags.no_collapse_digits,
                  "keep digit-only tokens instead of mapping them to <number>");
}

RunConfig effective_config(const CommonFlags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) cfg = RunConfig::parse_file(flags.config_path);
    if (!flags.output.empty()) cfg.set("output", flags.output);
    if (flags.seed >= 0) cfg.set("seed", std::to_string(flags.seed));
    if (flags.workers >= 0) cfg.set("workers", std::to_string(flags.workers));
    if (flags.min_count >= 0) cfg.set("min_count", std::to_string(flags.min_count));
    if (flags.lowercase) cfg.set("lowercase", "on");
    if (flags.no_collapse_digits) cfg.set("collapse_digits", "off");
    if (cfg.has("workers")) set_worker_count(static_cast<unsigned>(cfg.get_int("workers")));
    return cfg;
}

Vocabulary build_or_load_vocab(const RunConfig& cfg) {
    if (cfg.has("vocab")) return Vocabulary::load(cfg.get("vocab"));
    const std::string format = cfg.get_or("format", "raw");
    if (format == "raw") return build_vocabulary_raw(cfg.get("corpus"), cfg.normalization());
    if (format == "conllu") return build_vocabulary_conllu(cfg.get("corpus"), cfg.normalization());
    throw UsageError("format: expected raw|conllu");
}

Corpus load_corpus(const RunConfig& cfg, const Vocabulary& vocab) {
    const std::string format = cfg.get_or("format", "raw");
    if (format == "raw") return ingest_raw(cfg.get("corpus"), vocab, cfg.normalization());
    if (format == "conllu") return ingest_conllu(cfg.get("corpus"), vocab, cfg.normalization());
    throw UsageError("format: expected raw|conllu");
}

int cmd_vocab(const CommonFlags& flags, const std::string& corpus_flag) {
    RunConfig cfg = effective_config(flags);
    if (!corpus_flag.empty()) cfg.set("corpus", corpus_flag);
    const Vocabulary vocab = build_or_load_vocab(cfg);
    vocab.save(cfg.get("output"));
    std::cout << "vocabulary: " << vocab.size() << " entries -> " << cfg.get("output") << "\n";
    return 0;
}

int cmd_cooc(const CommonFlags& flags) {
    RunConfig cfg = effective_config(flags);
    const Vocabulary vocab = build_or_load_vocab(cfg);
    const Corpus corpus = load_corpus(cfg, vocab);
    const auto entries = cfg.feature_entries();

    std::vector<FeatureSpace> spaces;
    SparseCountMatrix M = build_contextual_matrix(corpus, entries, &spaces);
    if (cfg.get_or("matrix", "counts") == "pmi") M = pmi_matrix(M);

    const std::string out = cfg.get("output");
    M.save(out);
    if (!cfg.has("vocab")) vocab.save(out + ".vocab");
    // One manifest per distinct enumeration (spaces of one entry share ids).
    std::size_t manifest_idx = 0;
    std::size_t space_at = 0;
    for (const auto& entry : entries) {
        const std::size_t ctx_count = entry.contexts().size();
        const std::string suffix =
            entries.size() == 1 ? "" : "." + std::to_string(manifest_idx + 1);
        spaces.at(space_at).save_manifest(out + ".features" + suffix);
        space_at += ctx_count;
        ++manifest_idx;
    }
    std::cout << "matrix: " << M.rows() << " x " << M.cols() << ", " << M.nnz()
              << " nonzeros -> " << out << "\n";
    return 0;
}

void write_manifest(const RunConfig& cfg, const GpcaResult& result, const std::string& out) {
    RunConfig replay = cfg;
    // Bake the tuned transform in, so the manifest replays without re-tuning.
    const TransformSpec& t = result.used_transform;
    if (t.kind == TransformSpec::Kind::power_single) {
        replay.set("transform", "power");
        replay.set("transform.power", format_double(t.power));
    } else if (t.kind == TransformSpec::Kind::power_vector) {
        replay.set("transform", "power");
        save_dense(out + ".powers", t.powers);
        replay.set("transform.power_file", out + ".powers");
    }
    std::ofstream mf(out + ".manifest");
    if (!mf) throw DataError("cannot write file: " + out + ".manifest");
    mf << "# pwv run manifest; valid as --config for an exact replay\n";
    if (cfg.has("corpus")) mf << "# digest corpus " << file_digest(cfg.get("corpus")) << "\n";
    if (cfg.has("vocab")) mf << "# digest vocab " << file_digest(cfg.get("vocab")) << "\n";
    mf << "# emitted_k " << result.emitted_k << "\n";
    mf << "# transform_used " << result.used_transform.name() << "\n";
    mf << replay.to_text();
}

int cmd_embed(const CommonFlags& flags) {
    RunConfig cfg = effective_config(flags);
    const std::string out = cfg.get("output");

    GpcaResult result;
    if (cfg.has("matrix_file")) {
        const SparseCountMatrix M = SparseCountMatrix::load(cfg.get("matrix_file"));
        const Vocabulary vocab = Vocabulary::load(cfg.get("vocab"));
        if (vocab.size() != M.cols()) {
            throw DataError("vocabulary size does not match matrix column count");
        }
        std::vector<std::string> tokens;
        for (std::uint32_t w = 0; w < vocab.size(); ++w) tokens.push_back(vocab.token_of(w));
        result = gpca(M, cfg.gpca_params(), &tokens);
    } else {
        const Vocabulary vocab = build_or_load_vocab(cfg);
        const Corpus corpus = load_corpus(cfg, vocab);
        result = principal_word_vectors(corpus, cfg.feature_entries(), cfg.gpca_params());
    }
    if (result.k_reduced) {
        std::cerr << "warning: spectrum supports only " << result.emitted_k
                  << " dimensions; k reduced\n";
    }
    result.embeddings.save(out);
    write_manifest(cfg, result, out);
    if (cfg.has("factors_output")) {
        save_dense(cfg.get("factors_output") + ".U", result.factors.U);
        save_dense(cfg.get("factors_output") + ".S", result.factors.S);
        save_dense(cfg.get("factors_output") + ".V", result.factors.V);
    }
    std::cout << "embeddings: " << result.embeddings.tokens.size() << " x "
              << result.emitted_k << " -> " << out << "\n";
    return 0;
}

Eigen::VectorXd embedding_spectrum(const Embeddings& emb) {
    const Eigen::Index n = emb.vectors.rows();
    if (n <= 1) throw DataError("need at least 2 embedding rows");
    const Eigen::RowVectorXd mean = emb.vectors.colwise().mean();
    const Eigen::MatrixXd centred = emb.vectors.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw DataError("eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::max(ev[i], 0.0);
    return ev;
}

void write_series(const std::string& path, const Eigen::VectorXd& series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        out << (i + 1) << '\t' << format_double(series[i]) << '\n';
    }
}

int cmd_eval_gv(const std::string& emb_path, const std::string& output) {
    const Embeddings emb = Embeddings::load(emb_path);
    int floored = 0;
    const double gv = log_generalized_variance(emb.vectors, &floored);
    if (floored > 0) {
        std::cerr << "warning: " << floored << " eigenvalues floored at 1e-12\n";
    }
    std::cout << "log_gv = " << format_double(gv) << "\n";
    if (!output.empty()) {
        std::ofstream out(output);
        if (!out) throw DataError("cannot write file: " + output);
        out << "log_gv = " << format_double(gv) << "\n";
        out << "floored_eigenvalues = " << floored << "\n";
    }
    return 0;
}

int cmd_eval_spectrum(const std::string& emb_path, const std::string& output) {
    const Embeddings emb = Embeddings::load(emb_path);
    const EigenReport rep = eigen_report(embedding_spectrum(emb));
    const std::string base = output.empty() ? emb_path : output;
    write_series(base + ".tv", rep.tv_percent);
    write_series(base + ".lev", rep.lev);
    write_series(base + ".lgv", rep.lgv_percent);
    std::cout << "spectrum: " << rep.eigenvalues.size() << " eigenvalues, top = "
              << format_double(rep.eigenvalues[0]) << "\n";
    std::cout << "series -> " << base << ".tv " << base << ".lev " << base << ".lgv\n";
    return 0;
}

int cmd_eval_fdr(const std::string& emb_path, const std::string& labels_path,
                 const std::string& label_format, int half_window, const CommonFlags& flags) {
    const Embeddings emb = Embeddings::load(emb_path);
    NormalizationRules rules;
    rules.lowercase = flags.lowercase;
    rules.collapse_digits = !flags.no_collapse_digits;
    Corpus corpus;
    Vocabulary vocab;
    if (label_format == "conllu") {
        vocab = build_vocabulary_conllu(labels_path, rules);
        corpus = ingest_conllu(labels_path, vocab, rules);
    } else if (label_format == "ner") {
        NormalizationRules count_rules = rules;
        count_rules.min_count = 1;
        std::unordered_map<std::string, std::uint64_t> counts;
        // NER files are small; one extra pass builds their vocabulary.
        {
            std::ifstream in(labels_path);
            if (!in) throw DataError("cannot open file: " + labels_path);
            std::string line;
            while (std::getline(in, line)) {
                auto fields = split_whitespace(line);
                if (fields.empty() || fields[0] == "-DOCSTART-") continue;
                ++counts[normalize_token(fields[0], count_rules)];
            }
        }
        if (counts.empty()) throw DataError("empty corpus");
        vocab = Vocabulary::from_counts(counts, count_rules);
        corpus = ingest_conll2003_ner(labels_path, vocab, rules);
    } else {
        throw UsageError("label format: expected conllu|ner");
    }
    const LabeledWindowSet set = windowed_representation(corpus, emb, half_window);
    std::cout << "fdr = " << format_double(fdr(set)) << " (" << set.class_names.size()
              << " classes, " << set.labels.size() << " tokens)\n";
    return 0;
}

int cmd_eval_sim(const std::string& emb_path, const std::vector<std::string>& benchmarks) {
    const Embeddings emb = Embeddings::load(emb_path);
    const SimilarityResult result = word_similarity(emb, benchmarks);
    for (const auto& f : result.files) {
        std::cout << f.file << ": spearman = " << format_double(f.spearman) << " ("
                  << f.pairs_scored << "/" << f.pairs_total << " pairs, " << f.oov_pairs
                  << " OOV)\n";
    }
    std::cout << "average = " << format_double(result.average) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"principal word vectors over sparse contextual matrices"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string corpus_flag;

    auto* vocab_cmd = app.add_subcommand("vocab", "build and write a vocabulary file");
    add_common(vocab_cmd, flags);
    vocab_cmd->add_option("--corpus", corpus_flag, "corpus path (overrides config)");

    auto* cooc_cmd = app.add_subcommand("cooc", "build and spill the contextual matrix");
    add_common(cooc_cmd, flags);

    auto* embed_cmd = app.add_subcommand("embed", "run the embedding pipeline");
    add_common(embed_cmd, flags);

    auto* eval_cmd = app.add_subcommand("eval", "intrinsic evaluation metrics");
    eval_cmd->require_subcommand(1);
    std::string emb_path, labels_path, label_format = "conllu", eval_output;
    std::vector<std::string> benchmarks;
    int half_window = 3;

    auto* gv_cmd = eval_cmd->add_subcommand("gv", "log generalized variance");
    gv_cmd->add_option("--embeddings", emb_path, "embeddings file")->required();
    gv_cmd->add_option("--output", eval_output, "report file");

    auto* spectrum_cmd = eval_cmd->add_subcommand("spectrum", "TV/LEV/LGV series");
    spectrum_cmd->add_option("--embeddings", emb_path, "embeddings file")->required();
    spectrum_cmd->add_option("--output", eval_output, "series file prefix");

    auto* fdr_cmd = eval_cmd->add_subcommand("fdr", "Fisher discriminant ratio");
    fdr_cmd->add_option("--embeddings", emb_path, "embeddings file")->required();
    fdr_cmd->add_option("--labels", labels_path, "labeled corpus")->required();
    fdr_cmd->add_option("--label-format", label_format, "conllu|ner");
    fdr_cmd->add_option("--half-window", half_window, "window half-length (default 3)");
    fdr_cmd->add_flag("--lowercase", flags.lowercase, "lowercase tokens");
    fdr_cmd->add_flag("--no-collapse-digits", flags.no_collapse_digits, "keep digit tokens");

    auto* sim_cmd = eval_cmd->add_subcommand("sim", "word-similarity correlation");
    sim_cmd->add_option("--embeddings", emb_path, "embeddings file")->required();
    sim_cmd->add_option("--benchmark", benchmarks, "benchmark file(s)")->required();

    try {
        app.parse(argc, argv);
        if (vocab_cmd->parsed()) return cmd_vocab(flags, corpus_flag);
        if (cooc_cmd->parsed()) return cmd_cooc(flags);
        if (embed_cmd->parsed()) return cmd_embed(flags);
        if (gv_cmd->parsed()) return cmd_eval_gv(emb_path, eval_output);
        if (spectrum_cmd->parsed()) return cmd_eval_spectrum(emb_path, eval_output);
        if (fdr_cmd->parsed()) return cmd_eval_fdr(emb_path, labels_path, label_format,
                                                   half_window, flags);
        if (sim_cmd->parsed()) return cmd_eval_sim(emb_path, benchmarks);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const pwv::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const pwv::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
