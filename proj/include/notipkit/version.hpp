#pragma once

namespace notip {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace notip
