#pragma once

namespace dmqkd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dmqkd
