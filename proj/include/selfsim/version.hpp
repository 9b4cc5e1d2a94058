#pragma once

namespace selfsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace selfsim
