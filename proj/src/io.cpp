#include "flock/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flock/errors.hpp"

namespace flock {

void write_columns(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& meta,
                   const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& cols) {
    if (names.size() != cols.size()) throw ParameterError("write_columns: names/cols mismatch");
    std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (const auto& c : cols)
        if (c.size() != rows) throw ParameterError("write_columns: ragged columns");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ParameterError("write_columns: cannot open " + path);
    for (const auto& [k, v] : meta) std::fprintf(f, "# %s: %s\n", k.c_str(), v.c_str());
    for (std::size_t j = 0; j < names.size(); ++j)
        std::fprintf(f, "%s%s", j ? "," : "", names[j].c_str());
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j)
            std::fprintf(f, "%s%.17g", j ? "," : "", cols[j][i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

ColumnarFile read_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("read_columns: cannot open " + path);
    ColumnarFile out;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto colon = line.find(':');
            std::string k = line.substr(1, colon == std::string::npos ? std::string::npos : colon - 1);
            std::string v = colon == std::string::npos ? "" : line.substr(colon + 1);
            auto trim = [](std::string s) {
                while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
                while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
                return s;
            };
            out.meta.emplace_back(trim(k), trim(v));
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        if (!header_done) {
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty() && tok.back() == '\r') tok.pop_back();
                out.names.push_back(tok);
            }
            out.cols.resize(out.names.size());
            header_done = true;
        } else {
            std::size_t j = 0;
            while (std::getline(ss, tok, ',') && j < out.cols.size())
                out.cols[j++].push_back(std::strtod(tok.c_str(), nullptr));
        }
    }
    return out;
}

void write_snapshot(const std::string& path, const AgentEnsemble& ens) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ParameterError("write_snapshot: cannot open " + path);
    std::fwrite("FMF1", 1, 4, f);
    std::int64_t n = ens.n, d = ens.dim;
    std::fwrite(&n, sizeof n, 1, f);
    std::fwrite(&d, sizeof d, 1, f);
    std::fwrite(ens.positions.data(), sizeof(double), ens.positions.size(), f);
    std::fwrite(ens.velocities.data(), sizeof(double), ens.velocities.size(), f);
    std::fwrite(ens.weights.data(), sizeof(double), ens.weights.size(), f);
    std::fclose(f);
}

AgentEnsemble read_snapshot(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw ParameterError("read_snapshot: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "FMF1", 4) != 0) {
        std::fclose(f);
        throw ParameterError("read_snapshot: bad magic in " + path);
    }
    std::int64_t n = 0, d = 0;
    if (std::fread(&n, sizeof n, 1, f) != 1 || std::fread(&d, sizeof d, 1, f) != 1) {
        std::fclose(f);
        throw ParameterError("read_snapshot: truncated header in " + path);
    }
    AgentEnsemble e = AgentEnsemble::zeros(int(n), int(d));
    bool ok = std::fread(e.positions.data(), sizeof(double), e.positions.size(), f) ==
                  e.positions.size() &&
              std::fread(e.velocities.data(), sizeof(double), e.velocities.size(), f) ==
                  e.velocities.size() &&
              std::fread(e.weights.data(), sizeof(double), e.weights.size(), f) == e.weights.size();
    std::fclose(f);
    if (!ok) throw ParameterError("read_snapshot: truncated data in " + path);
    return e;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("fnv1a_file: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a(buf, std::size_t(got), h);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

} // namespace flock
