#pragma once

namespace mbe {
inline constexpr const char* kVersion = "0.1.0";
}
