#pragma once

namespace hypl2 {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hypl2
