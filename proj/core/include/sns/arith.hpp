#pragma once

#include <string>
#include <string_view>

namespace sns {

enum class ArithOp { Add, Sub, Div, Mul };

std::string_view to_string(ArithOp op);
/// "add", "sub", "div" or "mul"; anything else throws InvalidParameter.
ArithOp parse_op(std::string_view name);

/// Target of each arithmetic subnetwork, in mV on the [0, 20] mV range:
///   add = clip(a + b), sub = clip(a - b), div = a / (1 + b), mul = a b / 20
double ideal_op(ArithOp op, double a, double b);

}  // namespace sns
