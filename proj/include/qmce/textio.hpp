// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace qmce {

/// Shortest decimal form that round-trips the exact double (std::to_chars).
/// Used for configs and metrics so serialized output is byte-deterministic.
std::string format_double(double value);

/// Hexfloat form; bit-exact round trip for checkpoints.
std::string format_double_hex(double value);

/// Parses either decimal or hexfloat ("0x..." / "-0x...") tokens.
/// Throws ParseError on trailing garbage or empty input.
double parse_double(std::string_view token);

} // namespace qmce
