#pragma once

namespace tcanard {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tcanard
