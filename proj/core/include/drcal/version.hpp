#pragma once

namespace drcal {

inline constexpr const char* kVersion = "0.1.0";

/// Wire protocol revision; bumped on any incompatible message change.
inline constexpr int kProtocolVersion = 1;

}  // namespace drcal
