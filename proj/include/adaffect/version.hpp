#pragma once

namespace adaffect {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace adaffect
