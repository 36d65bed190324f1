#pragma once

namespace cfrechet {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cfrechet
