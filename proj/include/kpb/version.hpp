#pragma once

namespace kpb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kpb
