#pragma once

namespace crowsim {

inline constexpr const char* kProjectName = "crowsim";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace crowsim
