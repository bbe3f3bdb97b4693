#pragma once

namespace umw {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace umw
