#include "autofe/table.hpp"

#include "autofe/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace autofe {

std::string_view dtype_name(Dtype dtype) {
    switch (dtype) {
        case Dtype::Number: return "number";
        case Dtype::Boolean: return "boolean";
        case Dtype::Category: return "category";
        case Dtype::Text: return "text";
    }
    return "unknown";
}

std::optional<Dtype> parse_dtype(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "number") return Dtype::Number;
    if (lower == "boolean") return Dtype::Boolean;
    if (lower == "category") return Dtype::Category;
    if (lower == "text") return Dtype::Text;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Column

Column::Column(std::string name, Dtype dtype, Mask validity)
    : name_(std::move(name)), dtype_(dtype), validity_(std::move(validity)) {}

Column Column::numbers(std::string name, std::vector<double> values, Mask validity) {
    if (values.size() != validity.size()) {
        throw DataError("column '" + name + "': value and validity lengths differ");
    }
    Column c(std::move(name), Dtype::Number, std::move(validity));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!c.validity_[i] || !std::isfinite(values[i])) {
            c.validity_[i] = 0;
            values[i] = 0.0;
        }
    }
    c.numbers_ = std::move(values);
    return c;
}

Column Column::numbers(std::string name, std::vector<std::optional<double>> values) {
    std::vector<double> v(values.size(), 0.0);
    Mask m(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) {
            v[i] = *values[i];
            m[i] = 1;
        }
    }
    return numbers(std::move(name), std::move(v), std::move(m));
}

Column Column::booleans(std::string name, std::vector<std::uint8_t> values, Mask validity) {
    if (values.size() != validity.size()) {
        throw DataError("column '" + name + "': value and validity lengths differ");
    }
    Column c(std::move(name), Dtype::Boolean, std::move(validity));
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = (c.validity_[i] && values[i]) ? 1 : 0;
    }
    c.flags_ = std::move(values);
    return c;
}

Column Column::categories(std::string name, std::vector<std::string> labels, Mask validity,
                          std::vector<std::string> dictionary) {
    if (labels.size() != validity.size()) {
        throw DataError("column '" + name + "': value and validity lengths differ");
    }
    Column c(std::move(name), Dtype::Category, std::move(validity));
    std::unordered_map<std::string, std::int32_t> index;
    for (auto& label : dictionary) {
        if (index.emplace(label, static_cast<std::int32_t>(c.dictionary_.size())).second) {
            c.dictionary_.push_back(label);
        }
    }
    c.codes_.assign(labels.size(), -1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!c.validity_[i]) continue;
        auto [it, inserted] =
            index.emplace(labels[i], static_cast<std::int32_t>(c.dictionary_.size()));
        if (inserted) c.dictionary_.push_back(labels[i]);
        c.codes_[i] = it->second;
    }
    return c;
}

Column Column::categories(std::string name, std::vector<std::optional<std::string>> labels) {
    std::vector<std::string> v(labels.size());
    Mask m(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            v[i] = std::move(*labels[i]);
            m[i] = 1;
        }
    }
    return categories(std::move(name), std::move(v), std::move(m));
}

Column Column::texts(std::string name, std::vector<std::string> values, Mask validity) {
    if (values.size() != validity.size()) {
        throw DataError("column '" + name + "': value and validity lengths differ");
    }
    Column c(std::move(name), Dtype::Text, std::move(validity));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!c.validity_[i]) values[i].clear();
    }
    c.texts_ = std::move(values);
    return c;
}

Column Column::texts(std::string name, std::vector<std::optional<std::string>> values) {
    std::vector<std::string> v(values.size());
    Mask m(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) {
            v[i] = std::move(*values[i]);
            m[i] = 1;
        }
    }
    return texts(std::move(name), std::move(v), std::move(m));
}

std::size_t Column::missing_count() const {
    return static_cast<std::size_t>(std::count(validity_.begin(), validity_.end(), 0));
}

const std::string& Column::string_value(std::size_t row) const {
    static const std::string empty;
    if (dtype_ == Dtype::Category) {
        return codes_[row] >= 0 ? dictionary_[static_cast<std::size_t>(codes_[row])] : empty;
    }
    if (dtype_ == Dtype::Text) return texts_[row];
    throw std::logic_error("string_value on non-string column '" + name_ + "'");
}

std::string Column::render(std::size_t row) const {
    if (!valid(row)) return {};
    switch (dtype_) {
        case Dtype::Number: return format_number_exact(numbers_[row]);
        case Dtype::Boolean: return flags_[row] ? "true" : "false";
        case Dtype::Category:
        case Dtype::Text: return string_value(row);
    }
    return {};
}

Column Column::renamed(std::string name) const {
    Column c = *this;
    c.name_ = std::move(name);
    return c;
}

Column Column::take(std::span<const std::size_t> rows) const {
    Column c(name_, dtype_, Mask(rows.size(), 0));
    for (std::size_t i = 0; i < rows.size(); ++i) c.validity_[i] = validity_.at(rows[i]);
    switch (dtype_) {
        case Dtype::Number:
            c.numbers_.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.numbers_[i] = numbers_[rows[i]];
            break;
        case Dtype::Boolean:
            c.flags_.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.flags_[i] = flags_[rows[i]];
            break;
        case Dtype::Category:
            c.dictionary_ = dictionary_;
            c.codes_.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.codes_[i] = codes_[rows[i]];
            break;
        case Dtype::Text:
            c.texts_.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.texts_[i] = texts_[rows[i]];
            break;
    }
    return c;
}

bool operator==(const Column& a, const Column& b) {
    if (a.name_ != b.name_ || a.dtype_ != b.dtype_ || a.validity_ != b.validity_) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.valid(i)) continue;
        switch (a.dtype_) {
            case Dtype::Number:
                if (a.numbers_[i] != b.numbers_[i]) return false;
                break;
            case Dtype::Boolean:
                if (a.flags_[i] != b.flags_[i]) return false;
                break;
            case Dtype::Category:
            case Dtype::Text:
                if (a.string_value(i) != b.string_value(i)) return false;
                break;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Schema / Table

std::optional<Dtype> Schema::find(std::string_view name) const {
    for (const auto& [n, t] : columns) {
        if (n == name) return t;
    }
    return std::nullopt;
}

Table::Table(std::vector<Column> columns, std::string target)
    : columns_(std::move(columns)), target_(std::move(target)) {
    std::unordered_set<std::string> seen;
    for (const auto& c : columns_) {
        if (!seen.insert(c.name()).second) {
            throw DataError("duplicate column name '" + c.name() + "'");
        }
    }
    row_count_ = columns_.empty() ? 0 : columns_.front().size();
    for (const auto& c : columns_) {
        if (c.size() != row_count_) {
            throw DataError("column '" + c.name() + "' has " + std::to_string(c.size()) +
                            " rows, expected " + std::to_string(row_count_));
        }
    }
    auto idx = index_of(target_);
    if (!idx) throw DataError("target column '" + target_ + "' not found");
    target_index_ = *idx;
    const Column& t = columns_[target_index_];
    if (t.dtype() != Dtype::Category && t.dtype() != Dtype::Boolean) {
        throw DataError("target column '" + target_ + "' must be category or boolean, got " +
                        std::string(dtype_name(t.dtype())));
    }
    if (t.missing_count() != 0) {
        throw DataError("target column '" + target_ + "' has missing values");
    }
}

const Column* Table::find(std::string_view name) const {
    for (const auto& c : columns_) {
        if (c.name() == name) return &c;
    }
    return nullptr;
}

const Column& Table::column(std::string_view name) const {
    if (const Column* c = find(name)) return *c;
    throw DataError("unknown column '" + std::string(name) + "'");
}

std::optional<std::size_t> Table::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name() == name) return i;
    }
    return std::nullopt;
}

Table Table::with_column(Column column) const {
    std::vector<Column> cols = columns_;
    cols.push_back(std::move(column));
    return Table(std::move(cols), target_);
}

Table Table::without_column(std::string_view name) const {
    if (name == target_) throw DataError("cannot drop target column '" + target_ + "'");
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    bool found = false;
    for (const auto& c : columns_) {
        if (c.name() == name) {
            found = true;
            continue;
        }
        cols.push_back(c);
    }
    if (!found) throw DataError("unknown column '" + std::string(name) + "'");
    return Table(std::move(cols), target_);
}

Table Table::take(std::span<const std::size_t> rows) const {
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) cols.push_back(c.take(rows));
    return Table(std::move(cols), target_);
}

Table Table::renamed(const std::vector<std::string>& names) const {
    if (names.size() != columns_.size()) {
        throw DataError("rename needs one name per column");
    }
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (std::size_t i = 0; i < columns_.size(); ++i) cols.push_back(columns_[i].renamed(names[i]));
    return Table(std::move(cols), names[target_index_]);
}

Schema Table::schema() const {
    Schema s;
    s.target = target_;
    for (const auto& c : columns_) s.columns.emplace_back(c.name(), c.dtype());
    return s;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(std::string_view s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    }
    void sep(unsigned char tag) {
        h ^= tag;
        h *= 0x100000001b3ULL;
    }
};

}  // namespace

std::uint64_t Table::content_hash() const {
    Fnv1a f;
    f.bytes(target_);
    for (const auto& c : columns_) {
        f.sep(0x1e);
        f.bytes(c.name());
        f.sep(static_cast<unsigned char>(c.dtype()));
        for (std::size_t r = 0; r < row_count_; ++r) {
            f.sep(c.valid(r) ? 0x1f : 0x00);
            f.bytes(c.render(r));
        }
    }
    return f.h;
}

bool operator==(const Table& a, const Table& b) {
    return a.target_ == b.target_ && a.row_count_ == b.row_count_ && a.columns_ == b.columns_;
}

EncodedTarget encode_target(const Table& table) {
    const Column& t = table.target_column();
    std::set<std::string> labels;
    for (std::size_t r = 0; r < table.row_count(); ++r) labels.insert(t.render(r));
    EncodedTarget out;
    out.classes.assign(labels.begin(), labels.end());
    out.labels = encode_target(table, out.classes);
    return out;
}

std::vector<int> encode_target(const Table& table, const std::vector<std::string>& classes) {
    const Column& t = table.target_column();
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index.emplace(classes[i], static_cast<int>(i));
    std::vector<int> y(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        auto it = index.find(t.render(r));
        if (it == index.end()) {
            throw DataError("target label '" + t.render(r) + "' is not a known class");
        }
        y[r] = it->second;
    }
    return y;
}

}  // namespace autofe
