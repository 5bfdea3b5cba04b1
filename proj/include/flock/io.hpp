#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flock/ensemble.hpp"

namespace flock {

// Columnar format: UTF-8, comma-separated, '#'-prefixed metadata lines, then
// one header row of column names. Doubles printed with %.17g so files are
// bit-stable across runs.
void write_columns(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& meta,
                   const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& cols);

struct ColumnarFile {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
};
ColumnarFile read_columns(const std::string& path);

// Little-endian binary snapshot: magic "FMF1", i64 n, i64 dim, then raw
// positions, velocities, weights arrays.
void write_snapshot(const std::string& path, const AgentEnsemble& ens);
AgentEnsemble read_snapshot(const std::string& path);

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_file(const std::string& path);

std::string hex64(std::uint64_t v);

} // namespace flock
