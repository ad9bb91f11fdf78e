#pragma once

// Output plumbing for polarorb: fixed-precision CSV, JSON manifests and
// git-style content hashes.

#include <json.hpp>

#include <string>
#include <vector>

namespace polar::io {

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

class Csv {
public:
    explicit Csv(std::vector<std::string> columns);

    void comment(const std::string& text);
    Csv& add(double v);
    Csv& add(const std::string& s);
    Csv& add(const char* s) { return add(std::string(s)); }
    Csv& add(int v);
    /// Closes the current row; the cell count must match the header.
    void end_row();

    std::size_t rows() const { return rows_; }
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::vector<std::string> cells_;
    std::string body_;
    std::size_t rows_ = 0;
};

/// SHA-1 of "blob <size>\0" + content, hex encoded.
std::string git_blob_hash(const std::string& content);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Manifest path for an output file: "<out>.manifest.json".
std::string manifest_path(const std::string& out);

struct Manifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    nlohmann::json integrator = nlohmann::json::object();
    double wall_time_s = 0.0;
    int exit_code = 0;
    std::string diagnostic;
    std::vector<std::pair<std::string, std::string>> outputs;

    nlohmann::json to_json() const;
};

/// Writes `content` to `out`, records its hash and writes the manifest next to it.
void write_with_manifest(const std::string& out, const std::string& content, Manifest& m);

extern const char* const tool_version;

} // namespace polar::io
