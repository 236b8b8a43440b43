#pragma once

namespace pssim {

inline constexpr const char* kToolName = "pssim";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace pssim
