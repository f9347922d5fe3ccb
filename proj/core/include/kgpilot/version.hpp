#pragma once

namespace kgpilot {

inline constexpr const char* version = "0.1.0";

}  // namespace kgpilot
