#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "clockinterf/runner.hpp"

namespace clockinterf::runner::detail {

using Cell = std::variant<double, std::uint64_t>;

struct Table {
    std::string stem;    // file name without extension
    std::string schema;  // e.g. "fringe/v1"
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// Writes `table` as <stem>.csv (RFC 4180, LF line endings) or <stem>.json
/// and returns its manifest entry.
OutputFile write_table(const std::filesystem::path& dir, const Table& table, OutputFormat format);

OutputFile write_json(const std::filesystem::path& dir, const std::string& name, const std::string& schema,
                      const nlohmann::json& doc);

OutputFile describe_file(const std::filesystem::path& dir, const std::string& name, const std::string& schema);

[[nodiscard]] std::string utc_timestamp();

}  // namespace clockinterf::runner::detail
