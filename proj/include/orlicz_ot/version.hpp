#pragma once

namespace orlicz_ot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace orlicz_ot
