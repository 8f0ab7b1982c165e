#pragma once

#include <charconv>
#include <string>

namespace klb::detail {

// 17 significant digits: round-trip exact for double, locale independent.
inline std::string format17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace klb::detail
