// SPDX-License-Identifier: Apache-2.0
#include "qmce/textio.hpp"

#include <charconv>
#include <system_error>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

std::string with_format(double value, std::chars_format fmt) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, fmt);
    if (res.ec != std::errc{}) throw NumericError("double formatting failed");
    return std::string(buf, res.ptr);
}

} // namespace

std::string format_double(double value) {
    return with_format(value, std::chars_format::general);
}

std::string format_double_hex(double value) {
    std::string s = with_format(value, std::chars_format::hex);
    if (!s.empty() && s.front() == '-') return "-0x" + s.substr(1);
    return "0x" + s;
}

double parse_double(std::string_view token) {
    if (token.empty()) throw ParseError("empty number");
    double value = 0.0;
    bool negative = false;
    std::string_view body = token;
    if (body.front() == '-') {
        negative = true;
        body.remove_prefix(1);
    } else if (body.front() == '+') {
        body.remove_prefix(1);
    }
    std::from_chars_result res{};
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
        res = std::from_chars(body.data() + 2, body.data() + body.size(), value,
                              std::chars_format::hex);
    } else {
        res = std::from_chars(body.data(), body.data() + body.size(), value,
                              std::chars_format::general);
    }
    if (res.ec != std::errc{} || res.ptr != body.data() + body.size())
        throw ParseError("bad number '" + std::string(token) + "'");
    return negative ? -value : value;
}

} // namespace qmce
