#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autofe {

/// Raised for malformed input data: unparseable CSV, schema mismatches,
/// missing target columns and similar.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Dtype { Number, Boolean, Category, Text };

std::string_view dtype_name(Dtype dtype);
std::optional<Dtype> parse_dtype(std::string_view name);

/// One named, typed column with an explicit validity mask. Immutable once
/// built; all "mutation" produces a new Column.
class Column {
public:
    using Mask = std::vector<std::uint8_t>;

    static Column numbers(std::string name, std::vector<double> values, Mask validity);
    static Column numbers(std::string name, std::vector<std::optional<double>> values);
    static Column booleans(std::string name, std::vector<std::uint8_t> values, Mask validity);
    /// Builds a Category column from per-row labels. The dictionary lists
    /// labels in first-appearance order after any labels in `dictionary`.
    static Column categories(std::string name, std::vector<std::string> labels, Mask validity,
                             std::vector<std::string> dictionary = {});
    static Column categories(std::string name, std::vector<std::optional<std::string>> labels);
    static Column texts(std::string name, std::vector<std::string> values, Mask validity);
    static Column texts(std::string name, std::vector<std::optional<std::string>> values);

    const std::string& name() const { return name_; }
    Dtype dtype() const { return dtype_; }
    std::size_t size() const { return validity_.size(); }
    bool valid(std::size_t row) const { return validity_[row] != 0; }
    const Mask& validity() const { return validity_; }
    std::size_t missing_count() const;

    double number(std::size_t row) const { return numbers_[row]; }
    bool boolean(std::size_t row) const { return flags_[row] != 0; }
    std::int32_t code(std::size_t row) const { return codes_[row]; }
    const std::vector<std::string>& dictionary() const { return dictionary_; }
    /// Label of a Category cell or the value of a Text cell.
    const std::string& string_value(std::size_t row) const;

    std::span<const double> number_values() const { return numbers_; }

    /// Canonical text of a valid cell (CSV form). Missing cells render empty.
    std::string render(std::size_t row) const;

    Column renamed(std::string name) const;
    Column take(std::span<const std::size_t> rows) const;

    /// Logical equality: same name, dtype, validity and valid-cell contents.
    /// Category dictionaries are compared by label, not by code.
    friend bool operator==(const Column& a, const Column& b);

private:
    Column(std::string name, Dtype dtype, Mask validity);

    std::string name_;
    Dtype dtype_ = Dtype::Number;
    Mask validity_;
    std::vector<double> numbers_;
    std::vector<std::uint8_t> flags_;
    std::vector<std::int32_t> codes_;
    std::vector<std::string> dictionary_;
    std::vector<std::string> texts_;
};

struct Schema {
    std::vector<std::pair<std::string, Dtype>> columns;
    std::string target;

    std::optional<Dtype> find(std::string_view name) const;
};

/// Ordered set of uniquely named columns sharing one row count, with a
/// designated Category or Boolean prediction target.
class Table {
public:
    Table(std::vector<Column> columns, std::string target);

    std::size_t row_count() const { return row_count_; }
    std::size_t column_count() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    const std::string& target() const { return target_; }
    const Column& target_column() const { return columns_[target_index_]; }

    const Column* find(std::string_view name) const;
    const Column& column(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;

    Table with_column(Column column) const;
    Table without_column(std::string_view name) const;
    Table take(std::span<const std::size_t> rows) const;
    /// Renames columns by position; `names` must have column_count() entries.
    Table renamed(const std::vector<std::string>& names) const;

    Schema schema() const;
    /// FNV-1a over names, dtypes and rendered cells.
    std::uint64_t content_hash() const;

    friend bool operator==(const Table& a, const Table& b);

private:
    std::vector<Column> columns_;
    std::string target_;
    std::size_t target_index_ = 0;
    std::size_t row_count_ = 0;
};

/// Target labels mapped to dense class indices (sorted label order).
struct EncodedTarget {
    std::vector<std::string> classes;
    std::vector<int> labels;
};

EncodedTarget encode_target(const Table& table);
/// Same as above but against a fixed class list; unknown labels throw.
std::vector<int> encode_target(const Table& table, const std::vector<std::string>& classes);

}  // namespace autofe
