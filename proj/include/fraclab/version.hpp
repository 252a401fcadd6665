#pragma once

namespace fraclab {

inline constexpr const char* kVersion = "fraclab 0.1.0";

}  // namespace fraclab
