#pragma once

#include "autofe/dsl/ast.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace autofe::dsl {

enum class ErrorKind { ParseError, UnknownColumn, TypeError, ArityError, RuntimeError, DuplicateFeature };

std::string_view error_kind_name(ErrorKind kind);

/// Failure of any DSL stage. The rendered text is fed back to the language
/// model verbatim, so it must depend only on the input.
class ExecError : public std::runtime_error {
public:
    ExecError(ErrorKind kind, std::string message, std::optional<SourcePos> location = std::nullopt);

    ErrorKind kind() const { return kind_; }
    const std::string& message() const { return message_; }
    const std::optional<SourcePos>& location() const { return location_; }

    /// "<Kind> at line L, column C: <message>" (location part omitted when
    /// unknown). Same text as what().
    std::string describe() const { return what(); }

private:
    ErrorKind kind_;
    std::string message_;
    std::optional<SourcePos> location_;
};

}  // namespace autofe::dsl
