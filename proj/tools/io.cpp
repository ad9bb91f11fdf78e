#include "io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polar::io {

const char* const tool_version = "0.1.0";

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Csv::Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Csv::comment(const std::string& text)
{
    comments_.push_back(text);
}

Csv& Csv::add(double v)
{
    cells_.push_back(format_number(v));
    return *this;
}

Csv& Csv::add(const std::string& s)
{
    if (s.find_first_of(",\"\n") != std::string::npos)
        throw std::invalid_argument("Csv: cell needs quoting: " + s);
    cells_.push_back(s);
    return *this;
}

Csv& Csv::add(int v)
{
    cells_.push_back(std::to_string(v));
    return *this;
}

void Csv::end_row()
{
    if (cells_.size() != columns_.size())
        throw std::logic_error("Csv: row has " + std::to_string(cells_.size()) + " cells, header has " +
                               std::to_string(columns_.size()));
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        body_ += cells_[i];
        body_ += i + 1 < cells_.size() ? ',' : '\n';
    }
    cells_.clear();
    ++rows_;
}

std::string Csv::str() const
{
    std::string out;
    for (const auto& c : comments_)
        out += "# " + c + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        out += columns_[i];
        out += i + 1 < columns_.size() ? ',' : '\n';
    }
    return out + body_;
}

std::string git_blob_hash(const std::string& content)
{
    const std::string head = "blob " + std::to_string(content.size()) + '\0';
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx)
        throw std::runtime_error("git_blob_hash: EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok)
        throw std::runtime_error("git_blob_hash: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string manifest_path(const std::string& out)
{
    return out + ".manifest.json";
}

nlohmann::json Manifest::to_json() const
{
    nlohmann::json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["tool_version"] = tool_version;
    j["integrator"] = integrator;
    j["wall_time_s"] = wall_time_s;
    j["exit_code"] = exit_code;
    if (!diagnostic.empty())
        j["diagnostic"] = diagnostic;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [path, hash] : outputs)
        outs.push_back({{"path", path}, {"sha1", hash}});
    j["outputs"] = outs;
    return j;
}

void write_with_manifest(const std::string& out, const std::string& content, Manifest& m)
{
    write_file(out, content);
    m.outputs.emplace_back(out, git_blob_hash(content));
    write_file(manifest_path(out), m.to_json().dump(2) + "\n");
}

} // namespace polar::io
