#pragma once

namespace floqamp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace floqamp
