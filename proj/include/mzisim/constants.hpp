#pragma once

#include <numbers>

namespace mzisim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;             // m/s
inline constexpr double kSpeedOfLightUmPerS = kSpeedOfLight * 1e6;  // um/s
inline constexpr double kInvE = 0.36787944117144233;               // e^-1, the coherence threshold

inline constexpr double kDefaultWavelengthNm = 405.0;
inline constexpr double kMeasuredCoherenceLengthUm = 268.0;
inline constexpr double kFactoryCoherenceLengthUm = 150.0;

}  // namespace mzisim
