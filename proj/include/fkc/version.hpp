#pragma once

namespace fkc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fkc
