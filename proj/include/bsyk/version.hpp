#pragma once

namespace bsyk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bsyk
