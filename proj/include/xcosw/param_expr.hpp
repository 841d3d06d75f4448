#pragma once

#include "xcosw/transfer_function.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xcosw {

/// What a block parameter is expected to evaluate to.
enum class ParamShape { Scalar, SignVector, Rational };

std::string_view to_string(ParamShape shape) noexcept;

struct Unset {
  bool operator==(const Unset &) const = default;
};

/// Entries are +1 or -1.
using SignVector = std::vector<int>;

using ParsedParam = std::variant<Unset, double, SignVector, TransferFunction>;

/// A parameter as persisted (raw text) together with its evaluated form.
struct ParamValue {
  std::string raw;
  ParsedParam parsed;

  [[nodiscard]] bool is_unset() const { return std::holds_alternative<Unset>(parsed); }
};

/// The placeholder "%s", or blank text.
bool is_unset_text(std::string_view raw) noexcept;

/// Evaluates a parameter expression.
///
/// Grammar: decimal literals, unary +/-, binary + - * /, parentheses and `^`
/// with a non-negative integer literal exponent. In Rational shape the single
/// variable `s` is allowed and the result is folded into num/den coefficient
/// lists (ascending powers, no cancellation). A SignVector is a bracketed list
/// such as "[+1;-1]" whose entries are separated by ';' or ',' and each
/// evaluate to exactly +1 or -1.
///
/// Throws ExprError with code ExprSyntax (bad markup, division by zero) or
/// WrongShape (`s` in a scalar, entries other than +/-1, empty list).
ParamValue parse_param_expr(std::string_view raw, ParamShape shape);

/// Text that parse_param_expr maps back to the same parsed value.
std::string format_param(const ParsedParam &value);

} // namespace xcosw
