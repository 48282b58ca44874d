#pragma once

// Feature-construction language: a closed, typed expression language whose
// programs append derived columns to a table or drop existing ones.
//
//   feature "calc_to_urea_ratio" {
//     usefulness: "Concentration relative to urea"
//     expr: col("calc") / col("urea")
//   }
//   drop "urea" reason "captured by the ratio"
//
// There is no I/O, no loops and no user-defined functions; every callable
// name is in builtin_functions().

#include "autofe/dsl/ast.hpp"
#include "autofe/dsl/error.hpp"
#include "autofe/table.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace autofe::dsl {

/// Parses a program. Throws ExecError{ParseError} with line/column.
FeatureScript parse(std::string_view source);

/// Resolves columns, checks calls against the builtin signatures and assigns
/// a Dtype to every expression node. Features defined earlier in the script
/// are visible to later statements; dropped columns are not.
FeatureScript validate(const FeatureScript& script, const Schema& schema);

/// Schema after applying a validated script.
Schema result_schema(const FeatureScript& script, const Schema& schema);

/// Column-at-a-time interpreter. Validates against the table first; the input
/// is never modified and an error leaves no partial result.
Table evaluate(const FeatureScript& script, const Table& table);

/// Row-at-a-time tree walker with the same contract as evaluate(). Kept
/// deliberately naive; it is the oracle the vectorized path is tested against.
Table reference_evaluate(const FeatureScript& script, const Table& table);

/// Canonical text. Comments are not preserved; parse(pretty_print(s)) == s.
std::string pretty_print(const FeatureScript& script);
std::string pretty_print(const Expr& expr);

struct BuiltinInfo {
    std::string_view name;
    std::string_view signature;
    std::string_view summary;
};

/// The complete whitelist of callable functions.
const std::vector<BuiltinInfo>& builtin_functions();
bool is_builtin(std::string_view name);

}  // namespace autofe::dsl
