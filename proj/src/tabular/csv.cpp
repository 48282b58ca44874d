#include "autofe/csv.hpp"

#include "autofe/text_format.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace autofe {

namespace {

bool is_bool_token(std::string_view s) {
    std::string l = to_lower(trim(s));
    return l == "true" || l == "false" || l == "0" || l == "1";
}

bool bool_value(std::string_view s) {
    std::string l = to_lower(trim(s));
    return l == "true" || l == "1";
}

bool needs_quotes(std::string_view s) {
    if (s.empty()) return true;
    if (s.front() == ' ' || s.back() == ' ') return true;
    return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Dtype infer_dtype(const std::vector<std::optional<std::string>>& cells) {
    bool all_numbers = true;
    bool all_bools = true;
    std::unordered_set<std::string> distinct;
    for (const auto& cell : cells) {
        if (!cell) continue;
        distinct.insert(*cell);
        if (all_numbers && !parse_decimal(*cell)) all_numbers = false;
        if (all_bools && !is_bool_token(*cell)) all_bools = false;
    }
    if (all_numbers) return Dtype::Number;
    if (all_bools) return Dtype::Boolean;
    const double cap = std::max(20.0, 0.05 * static_cast<double>(cells.size()));
    if (static_cast<double>(distinct.size()) <= cap) return Dtype::Category;
    return Dtype::Text;
}

Column build_column(std::string name, Dtype dtype, std::vector<std::optional<std::string>> cells) {
    switch (dtype) {
        case Dtype::Number: {
            std::vector<std::optional<double>> v(cells.size());
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (!cells[i]) continue;
                auto parsed = parse_decimal(*cells[i]);
                if (!parsed) {
                    throw DataError("column '" + name + "' row " + std::to_string(i + 1) +
                                    ": '" + *cells[i] + "' is not a number");
                }
                v[i] = *parsed;
            }
            return Column::numbers(std::move(name), std::move(v));
        }
        case Dtype::Boolean: {
            std::vector<std::uint8_t> v(cells.size(), 0);
            Column::Mask m(cells.size(), 0);
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (!cells[i]) continue;
                if (!is_bool_token(*cells[i])) {
                    throw DataError("column '" + name + "' row " + std::to_string(i + 1) +
                                    ": '" + *cells[i] + "' is not a boolean");
                }
                v[i] = bool_value(*cells[i]) ? 1 : 0;
                m[i] = 1;
            }
            return Column::booleans(std::move(name), std::move(v), std::move(m));
        }
        case Dtype::Category: return Column::categories(std::move(name), std::move(cells));
        case Dtype::Text: return Column::texts(std::move(name), std::move(cells));
    }
    throw std::logic_error("unreachable dtype");
}

}  // namespace

SchemaOverride parse_schema_override(std::string_view text) {
    SchemaOverride out;
    std::size_t line_no = 0;
    for (auto raw : split_lines(text)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.rfind('=');
        if (eq == std::string_view::npos) {
            throw DataError("schema override line " + std::to_string(line_no) + ": expected column=dtype");
        }
        std::string column(trim(line.substr(0, eq)));
        auto dtype = parse_dtype(trim(line.substr(eq + 1)));
        if (column.empty() || !dtype) {
            throw DataError("schema override line " + std::to_string(line_no) + ": bad entry '" +
                            std::string(line) + "'");
        }
        out[column] = *dtype;
    }
    return out;
}

SchemaOverride load_schema_override(const std::filesystem::path& path) {
    return parse_schema_override(read_text_file(path));
}

std::vector<CsvRecord> parse_csv_records(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<CsvRecord> records;
    CsvRecord record;
    std::string field;
    bool quoted = false;      // field started with a quote
    bool in_quotes = false;   // currently inside the quoted section
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        if (quoted || !field.empty()) {
            record.emplace_back(std::move(field));
        } else {
            record.emplace_back(std::nullopt);
        }
        field.clear();
        quoted = false;
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (quoted && c != ',' && c != '\n' && c != '\r') {
            throw DataError("unparseable CSV: text after closing quote on line " + std::to_string(line));
        }
        switch (c) {
            case '"':
                if (field_started) {
                    throw DataError("unparseable CSV: stray quote on line " + std::to_string(line));
                }
                quoted = true;
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                ++line;
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field += c;
                field_started = true;
                break;
        }
    }
    if (in_quotes) throw DataError("unparseable CSV: unterminated quoted field");
    if (field_started || quoted || !record.empty()) end_record();
    return records;
}

Table parse_csv(std::string_view text, std::string_view target, const SchemaOverride& overrides) {
    auto records = parse_csv_records(text);
    if (records.empty()) throw DataError("unparseable CSV: missing header row");
    const CsvRecord& header = records.front();
    const std::size_t width = header.size();

    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& h : header) {
        std::string name = h ? *h : std::string();
        if (name.empty()) throw DataError("unparseable CSV: empty column name in header");
        if (!seen.insert(name).second) throw DataError("duplicate header name '" + name + "'");
        names.push_back(std::move(name));
    }
    if (!seen.count(std::string(target))) {
        throw DataError("target column '" + std::string(target) + "' not found in CSV header");
    }
    for (const auto& [col, _] : overrides) {
        if (!seen.count(col)) throw DataError("schema override names unknown column '" + col + "'");
    }

    std::vector<std::vector<std::optional<std::string>>> cells(width);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        // Blank lines carry no data unless the table has a single column.
        if (width > 1 && rec.size() == 1 && !rec.front()) continue;
        if (rec.size() != width) {
            throw DataError("unparseable CSV: record " + std::to_string(r) + " has " +
                            std::to_string(rec.size()) + " fields, header has " +
                            std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) cells[c].push_back(rec[c]);
    }

    std::vector<Column> columns;
    columns.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
        Dtype dtype;
        if (auto it = overrides.find(names[c]); it != overrides.end()) {
            dtype = it->second;
        } else {
            dtype = infer_dtype(cells[c]);
            if (names[c] == target && (dtype == Dtype::Number || dtype == Dtype::Text)) {
                dtype = Dtype::Category;
            }
        }
        columns.push_back(build_column(names[c], dtype, std::move(cells[c])));
    }
    return Table(std::move(columns), std::string(target));
}

Table load_csv(const std::filesystem::path& path, std::string_view target, const SchemaOverride& overrides) {
    return parse_csv(read_text_file(path), target, overrides);
}

std::string to_csv(const Table& table) {
    std::string out;
    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ',';
        const auto& n = cols[c].name();
        out += needs_quotes(n) ? quote(n) : n;
    }
    out += '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            if (!cols[c].valid(r)) continue;
            std::string cell = cols[c].render(r);
            out += needs_quotes(cell) ? quote(cell) : cell;
        }
        out += '\n';
    }
    return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
    write_text_file(path, to_csv(table));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace autofe
