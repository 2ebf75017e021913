#pragma once

namespace limbdyn {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace limbdyn
