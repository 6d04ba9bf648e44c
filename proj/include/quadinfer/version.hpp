#pragma once

namespace quadinfer {

inline constexpr const char* kVersion = "0.1.0";

} // namespace quadinfer
