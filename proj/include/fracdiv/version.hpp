#pragma once

#define FRACDIV_VERSION "0.1.0"

namespace fracdiv {
inline constexpr const char* kVersion = FRACDIV_VERSION;
}
