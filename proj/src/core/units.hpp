#pragma once

#include <cmath>
#include <complex>

// Internal unit system: time in microseconds, angular frequency in rad/us.
// Configuration files quote frequencies in MHz (meaning omega/2pi); the
// conversion to rad/us happens exactly once, at config load.
namespace qbeat {

using cxd = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Bohr magneton over Planck constant, MHz per Gauss. Standard atomic data,
// not a fitted quantity.
inline constexpr double kMuBohrMHzPerGauss = 1.3996;

inline constexpr double mhz_to_radus(double f_mhz) { return kTwoPi * f_mhz; }
inline constexpr double radus_to_mhz(double w) { return w / kTwoPi; }

inline constexpr cxd kImag{0.0, 1.0};

}  // namespace qbeat
