#pragma once

namespace klb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace klb
