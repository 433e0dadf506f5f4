#include "runner/output.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "clockinterf/errors.hpp"

namespace clockinterf::runner {

using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), end};
}

std::string sha256_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 initialisation failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xF]);
    }
    return hex;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    const auto dir = manifest_path.parent_path();
    std::vector<std::string> bad;
    for (const auto& entry : manifest.at("outputs")) {
        const auto name = entry.at("file").get<std::string>();
        const auto path = dir / name;
        if (!std::filesystem::exists(path) || sha256_hex(path) != entry.at("sha256").get<std::string>()) {
            bad.push_back(name);
        }
    }
    return bad;
}

namespace detail {

namespace {

std::string cell_text(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    return std::to_string(std::get<std::uint64_t>(cell));
}

json cell_json(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isfinite(*d)) return *d;
        return format_double(*d);
    }
    return std::get<std::uint64_t>(cell);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

OutputFile describe_file(const std::filesystem::path& dir, const std::string& name, const std::string& schema) {
    const auto path = dir / name;
    return {name, schema, sha256_hex(path), std::filesystem::file_size(path)};
}

OutputFile write_table(const std::filesystem::path& dir, const Table& table, OutputFormat format) {
    std::string text;
    std::string name;
    if (format == OutputFormat::csv) {
        name = table.stem + ".csv";
        for (std::size_t c = 0; c < table.columns.size(); ++c) text += (c ? "," : "") + table.columns[c];
        text += '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + cell_text(row[c]);
            text += '\n';
        }
    } else {
        name = table.stem + ".json";
        json rows = json::array();
        for (const auto& row : table.rows) {
            json obj = json::object();
            for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
            rows.push_back(std::move(obj));
        }
        const json doc = {{"schema", table.schema}, {"columns", table.columns}, {"rows", rows}};
        text = doc.dump(1) + "\n";
    }
    write_text(dir / name, text);
    return describe_file(dir, name, table.schema);
}

OutputFile write_json(const std::filesystem::path& dir, const std::string& name, const std::string& schema,
                      const json& doc) {
    write_text(dir / name, doc.dump(2) + "\n");
    return describe_file(dir, name, schema);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

}  // namespace detail
}  // namespace clockinterf::runner
