#pragma once

namespace lab {
inline constexpr const char* kVersion = "0.1.0";
}
