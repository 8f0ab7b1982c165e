#pragma once

#include <string>

#include "klb/inversion.hpp"

namespace klb::cli {

// Static SVG rendering of a bounds table: shaded band between the lower and
// upper bounds versus the swept parameter.  Rows whose solves were not
// OPTIMAL are skipped.
void render_bounds_svg(const inversion::BoundsTable& table, const std::string& path,
                       const std::string& title);

}  // namespace klb::cli
