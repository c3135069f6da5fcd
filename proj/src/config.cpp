#include "pwv/config.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "pwv/common.hpp"

namespace pwv {

namespace {

const char* kScalarKeys[] = {
    "corpus", "format", "lowercase", "collapse_digits", "min_count", "vocab",
    "matrix", "matrix_file", "metric", "weight",
    "transform", "transform.power", "transform.power_file",
    "lambda", "lambda.alpha", "k",
    "sketch.K", "sketch.q", "sketch.faithful",
    "seed", "workers", "output", "factors_output",
    "anneal.iterations", "anneal.t0", "anneal.cooling", "anneal.stddev",
    "anneal.sample", "anneal.block_length", "anneal.blocks", "anneal.bandwidth_scale",
};

const char* kFeatureSubkeys[] = {
    "kind", "context", "tau", "span", "direction", "combine", "cross_sentence",
};

bool known_key(const std::string& key) {
    for (const char* k : kScalarKeys) {
        if (key == k) return true;
    }
    static const std::regex feature_re("^feature\\.[0-9]+\\.([a-z_]+)$");
    std::smatch m;
    if (std::regex_match(key, m, feature_re)) {
        for (const char* sub : kFeatureSubkeys) {
            if (m[1] == sub) return true;
        }
    }
    return false;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!known_key(key)) {
            throw UsageError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (cfg.values_.count(key)) {
            throw UsageError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!known_key(key)) throw UsageError("unknown config key '" + key + "'");
    values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("missing config key '" + key + "'");
    return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long RunConfig::get_int(const std::string& key) const {
    try {
        std::size_t used = 0;
        const long v = std::stol(get(key), &used);
        if (used != get(key).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' needs an integer, got '" + get(key) + "'");
    }
}

double RunConfig::get_double(const std::string& key) const {
    try {
        std::size_t used = 0;
        const double v = std::stod(get(key), &used);
        if (used != get(key).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' needs a number, got '" + get(key) + "'");
    }
}

bool RunConfig::get_flag(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw UsageError("config key '" + key + "' needs on/off, got '" + v + "'");
}

NormalizationRules RunConfig::normalization() const {
    NormalizationRules rules;
    if (has("lowercase")) rules.lowercase = get_flag("lowercase");
    if (has("collapse_digits")) rules.collapse_digits = get_flag("collapse_digits");
    if (has("min_count")) {
        const long mc = get_int("min_count");
        if (mc < 1) throw UsageError("min_count must be >= 1");
        rules.min_count = static_cast<std::uint64_t>(mc);
    }
    return rules;
}

std::vector<FeatureSpecEntry> RunConfig::feature_entries() const {
    std::vector<FeatureSpecEntry> entries;
    for (int idx = 1;; ++idx) {
        const std::string prefix = "feature." + std::to_string(idx) + ".";
        if (!has(prefix + "kind") && !has(prefix + "context") && !has(prefix + "tau") &&
            !has(prefix + "span")) {
            break;
        }
        FeatureSpecEntry e;
        const std::string kind = get_or(prefix + "kind", "word_form");
        if (kind == "word_form") e.kind = FeatureKind::word_form;
        else if (kind == "pos") e.kind = FeatureKind::pos;
        else if (kind == "joint") e.kind = FeatureKind::joint;
        else throw UsageError(prefix + "kind: expected word_form|pos|joint");

        const std::string ctx = get_or(prefix + "context", "neighbourhood");
        if (ctx == "neighbourhood") e.context = ContextKind::neighbourhood;
        else if (ctx == "dependency") e.context = ContextKind::dependency;
        else throw UsageError(prefix + "context: expected neighbourhood|dependency");

        if (has(prefix + "cross_sentence")) e.cross_sentence = get_flag(prefix + "cross_sentence");
        if (has(prefix + "tau")) e.tau = static_cast<int>(get_int(prefix + "tau"));
        if (has(prefix + "span")) e.span = static_cast<int>(get_int(prefix + "span"));

        const std::string dir = get_or(prefix + "direction", "backward");
        if (dir == "backward") e.direction = WindowDirection::backward;
        else if (dir == "forward") e.direction = WindowDirection::forward;
        else if (dir == "symmetric") e.direction = WindowDirection::symmetric;
        else throw UsageError(prefix + "direction: expected backward|forward|symmetric");

        const std::string comb = get_or(prefix + "combine", "window");
        if (comb == "window") e.combine = SpanCombine::window;
        else if (comb == "union") e.combine = SpanCombine::union_stack;
        else throw UsageError(prefix + "combine: expected window|union");

        entries.push_back(e);
    }
    if (entries.empty()) throw UsageError("config declares no feature entries (feature.1.*)");
    return entries;
}

GpcaParams RunConfig::gpca_params() const {
    GpcaParams p;
    const std::string metric = get_or("metric", "identity");
    if (metric == "identity") p.metric = MetricKind::identity;
    else if (metric == "iff") p.metric = MetricKind::iff;
    else if (metric == "isf") p.metric = MetricKind::isf;
    else throw UsageError("metric: expected identity|iff|isf");

    const std::string weight = get_or("weight", "identity");
    if (weight == "identity") p.weight = WeightKind::identity;
    else if (weight == "iwf") p.weight = WeightKind::iwf;
    else throw UsageError("weight: expected identity|iwf");

    const std::string transform = get_or("transform", "identity");
    if (transform == "identity") {
        p.transform.spec = TransformSpec::identity();
    } else if (transform == "log") {
        p.transform.spec = TransformSpec::log1p_();
    } else if (transform == "hellinger") {
        p.transform.spec = TransformSpec::hellinger();
    } else if (transform == "power") {
        if (has("transform.power_file")) {
            const Eigen::MatrixXd powers = load_dense(get("transform.power_file"));
            p.transform.spec = TransformSpec::power_vector(powers.col(0));
        } else {
            p.transform.spec = TransformSpec::power_single(get_double("transform.power"));
        }
    } else if (transform == "tune_single") {
        p.transform.mode = TransformChoice::Mode::tune_single;
    } else if (transform == "tune_vector") {
        p.transform.mode = TransformChoice::Mode::tune_vector;
    } else {
        throw UsageError("transform: expected identity|log|hellinger|power|tune_single|tune_vector");
    }

    const int k = has("k") ? static_cast<int>(get_int("k")) : 100;
    const std::string lambda = get_or("lambda", "classic");
    if (lambda == "classic") {
        p.lambda = LambdaKind::classic(k);
    } else if (lambda == "normalized") {
        p.lambda = LambdaKind::normalized(k, has("lambda.alpha") ? get_double("lambda.alpha") : 1.0);
    } else {
        throw UsageError("lambda: expected classic|normalized");
    }

    p.sketch.k = k;
    if (has("sketch.K")) p.sketch.K = static_cast<int>(get_int("sketch.K"));
    if (has("sketch.q")) p.sketch.q = static_cast<int>(get_int("sketch.q"));
    if (has("sketch.faithful")) p.sketch.faithful_power = get_flag("sketch.faithful");
    p.sketch.seed = seed();

    if (has("anneal.iterations")) p.anneal.iterations = static_cast<int>(get_int("anneal.iterations"));
    if (has("anneal.t0")) p.anneal.t0 = get_double("anneal.t0");
    if (has("anneal.cooling")) p.anneal.cooling = get_double("anneal.cooling");
    if (has("anneal.stddev")) p.anneal.proposal_stddev = get_double("anneal.stddev");
    if (has("anneal.sample")) p.anneal.sample_words = static_cast<int>(get_int("anneal.sample"));
    if (has("anneal.block_length")) p.anneal.block_length = static_cast<int>(get_int("anneal.block_length"));
    if (has("anneal.blocks")) p.anneal.max_blocks = static_cast<int>(get_int("anneal.blocks"));
    if (has("anneal.bandwidth_scale")) p.anneal.bandwidth_scale = get_double("anneal.bandwidth_scale");
    if (p.anneal.cooling <= 0.0 || p.anneal.cooling >= 1.0) {
        throw UsageError("anneal.cooling must lie in (0, 1)");
    }
    // All stage randomness fans out from the one run seed.
    p.anneal.seed = seed() ^ 0x9E3779B97F4A7C15ULL;
    return p;
}

std::uint64_t RunConfig::seed() const {
    return has("seed") ? static_cast<std::uint64_t>(get_int("seed")) : 0;
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) {
        out << key << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace pwv
