#pragma once
// Tool version stamped into every machine-readable report.

namespace finsler {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace finsler
