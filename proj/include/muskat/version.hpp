#pragma once

namespace muskat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace muskat
