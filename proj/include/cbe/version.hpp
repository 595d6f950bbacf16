#pragma once

namespace cbe {

inline constexpr const char* version = "0.1.0";

}  // namespace cbe
