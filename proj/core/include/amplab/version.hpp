#pragma once

namespace amplab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace amplab
