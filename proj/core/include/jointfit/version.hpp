#pragma once

namespace jointfit {
inline constexpr const char* kVersion = "0.1.0";
}
