#include "autofe/models/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace autofe::models {

namespace {

std::size_t label_slot(const std::vector<std::string>& labels, const std::string& v) {
    auto it = std::lower_bound(labels.begin(), labels.end(), v);
    if (it != labels.end() && *it == v) return static_cast<std::size_t>(it - labels.begin());
    return labels.size();
}

}  // namespace

Preprocessor Preprocessor::fit(const Table& train, Encoding encoding) {
    if (train.row_count() == 0) throw std::invalid_argument("cannot fit a preprocessor on zero rows");
    Preprocessor p;
    p.fitted_rows_ = train.row_count();
    std::size_t offset = 0;
    for (const Column& col : train.columns()) {
        if (col.name() == train.target()) continue;
        ColumnRecipe r;
        r.name = col.name();
        r.dtype = col.dtype();
        r.offset = offset;
        switch (col.dtype()) {
            case Dtype::Number:
            case Dtype::Boolean: {
                double sum = 0.0;
                std::size_t n = 0;
                for (std::size_t i = 0; i < col.size(); ++i) {
                    if (!col.valid(i)) continue;
                    sum += col.dtype() == Dtype::Number ? col.number(i) : (col.boolean(i) ? 1.0 : 0.0);
                    ++n;
                }
                r.fill = n ? sum / static_cast<double>(n) : 0.0;
                break;
            }
            case Dtype::Category:
            case Dtype::Text: {
                std::set<std::string> seen;
                for (std::size_t i = 0; i < col.size(); ++i) {
                    if (col.valid(i)) seen.insert(col.string_value(i));
                }
                r.labels.assign(seen.begin(), seen.end());
                r.one_hot = col.dtype() == Dtype::Category && encoding == Encoding::OneHot;
                if (r.one_hot) r.width = r.labels.size() + 1;
                break;
            }
        }
        offset += r.width;
        p.recipes_.push_back(std::move(r));
    }
    p.width_ = offset;

    Matrix raw = p.encode(train);
    const auto n = static_cast<double>(raw.rows());
    p.means_.assign(p.width_, 0.0);
    p.scales_.assign(p.width_, 1.0);
    for (std::size_t c = 0; c < p.width_; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < raw.rows(); ++i) mean += raw(i, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < raw.rows(); ++i) var += (raw(i, c) - mean) * (raw(i, c) - mean);
        const double sd = std::sqrt(var / n);
        p.means_[c] = mean;
        p.scales_[c] = sd > 1e-12 ? sd : 1.0;
    }
    return p;
}

Matrix Preprocessor::encode(const Table& table) const {
    Matrix out(table.row_count(), width_);
    for (const auto& r : recipes_) {
        const Column* col = table.find(r.name);
        if (!col) throw DataError("preprocessor: column '" + r.name + "' is missing");
        if (col->dtype() != r.dtype) {
            throw DataError("preprocessor: column '" + r.name + "' changed type to " +
                            std::string(dtype_name(col->dtype())));
        }
        for (std::size_t i = 0; i < col->size(); ++i) {
            switch (r.dtype) {
                case Dtype::Number: out(i, r.offset) = col->valid(i) ? col->number(i) : r.fill; break;
                case Dtype::Boolean: out(i, r.offset) = col->valid(i) ? (col->boolean(i) ? 1.0 : 0.0) : r.fill; break;
                case Dtype::Category:
                case Dtype::Text: {
                    const std::size_t slot = col->valid(i) ? label_slot(r.labels, col->string_value(i)) : r.labels.size();
                    if (r.one_hot) {
                        out(i, r.offset + slot) = 1.0;
                    } else {
                        out(i, r.offset) = static_cast<double>(slot);
                    }
                    break;
                }
            }
        }
    }
    return out;
}

Matrix Preprocessor::transform(const Table& table) const {
    Matrix out = encode(table);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t c = 0; c < width_; ++c) out(i, c) = (out(i, c) - means_[c]) / scales_[c];
    }
    return out;
}

}  // namespace autofe::models
