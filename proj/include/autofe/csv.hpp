#pragma once

#include "autofe/table.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autofe {

/// Forced dtypes per column, as read from a `column=dtype` file.
using SchemaOverride = std::map<std::string, Dtype>;

SchemaOverride parse_schema_override(std::string_view text);
SchemaOverride load_schema_override(const std::filesystem::path& path);

/// One parsed CSV field. Unquoted empty fields are missing; a quoted empty
/// field ("") is a present, empty string.
using CsvRecord = std::vector<std::optional<std::string>>;

/// RFC-4180 record splitter (quoted fields, doubled quotes, CRLF).
std::vector<CsvRecord> parse_csv_records(std::string_view text);

/// Infers column dtypes:
///   Number   every present cell parses as a finite decimal;
///   Boolean  values within {true,false,0,1}, case-insensitive;
///   Category distinct count <= max(20, 5% of rows);
///   Text     otherwise.
/// A Number or Text target is converted to Category.
Table parse_csv(std::string_view text, std::string_view target, const SchemaOverride& overrides = {});
Table load_csv(const std::filesystem::path& path, std::string_view target,
               const SchemaOverride& overrides = {});

std::string to_csv(const Table& table);
void write_csv(const Table& table, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace autofe
