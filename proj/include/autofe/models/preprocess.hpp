#pragma once

#include "autofe/models/matrix.hpp"
#include "autofe/table.hpp"

#include <string>
#include <vector>

namespace autofe::models {

enum class Encoding { OneHot, Ordinal };

/// Turns a Table's feature columns (everything but the target) into a dense
/// numeric matrix. Fitted on training rows only:
///   Number/Boolean  mean imputation;
///   Category        one-hot over sorted labels plus an "unknown" slot, or
///                   ordinal with unknown = number of labels;
///   Text            always ordinal.
/// Missing categorical cells use the unknown slot. Every output column is
/// then standardized with the training mean and standard deviation.
class Preprocessor {
public:
    struct ColumnRecipe {
        std::string name;
        Dtype dtype = Dtype::Number;
        double fill = 0.0;
        std::vector<std::string> labels;  // sorted
        bool one_hot = false;
        std::size_t offset = 0;
        std::size_t width = 1;
    };

    static Preprocessor fit(const Table& train, Encoding encoding);

    Matrix transform(const Table& table) const;

    std::size_t width() const { return width_; }
    std::size_t fitted_rows() const { return fitted_rows_; }
    const std::vector<ColumnRecipe>& recipes() const { return recipes_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& scales() const { return scales_; }

private:
    Matrix encode(const Table& table) const;

    std::vector<ColumnRecipe> recipes_;
    std::vector<double> means_;
    std::vector<double> scales_;
    std::size_t width_ = 0;
    std::size_t fitted_rows_ = 0;
};

}  // namespace autofe::models
