#pragma once

namespace kd {

inline constexpr const char* version = "0.1.0";

} // namespace kd
