#pragma once

namespace markovsa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace markovsa
