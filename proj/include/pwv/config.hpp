#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwv/corpus.hpp"
#include "pwv/gpca.hpp"

namespace pwv {

// key = value run configuration. Keys are validated against a fixed schema;
// unknown keys are rejected. Values from flag overrides win over the file.
class RunConfig {
public:
    RunConfig() = default;
    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_text(const std::string& text, const std::string& origin = "<config>");

    void set(const std::string& key, const std::string& value);  // validates the key
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;

    // Typed accessors with validation errors naming the key.
    long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_flag(const std::string& key) const;  // on/off

    // Sections assembled from the keys.
    NormalizationRules normalization() const;
    std::vector<FeatureSpecEntry> feature_entries() const;
    GpcaParams gpca_params() const;
    std::uint64_t seed() const;

    // The config serialized back as a parseable key = value file.
    std::string to_text() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace pwv
