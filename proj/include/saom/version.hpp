#pragma once

namespace saom {

inline constexpr const char* version = "0.1.0";

}  // namespace saom
