#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pwv {

// Thrown on malformed input data (bad file formats, empty corpora, ...).
// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on invalid configuration or invalid arguments at the tool surface.
// The CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Global worker count for stage-internal parallelism. 0 = hardware default.
void set_worker_count(unsigned n);
unsigned worker_count();

// Runs fn(i) for i in [begin, end). Work is split into contiguous chunks so
// results must not depend on chunk boundaries (each index is independent).
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

// FNV-1a over a file's bytes, as a hex string. Used for manifest digests.
std::string file_digest(const std::string& path);

std::vector<std::string_view> split_fields(std::string_view line, char sep);
std::vector<std::string_view> split_whitespace(std::string_view line);

// True iff s is valid UTF-8.
bool valid_utf8(std::string_view s);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace pwv
