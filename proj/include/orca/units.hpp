#pragma once

#include <numbers>

// Unit conventions used throughout the library:
//   time            ns
//   frequency       GHz (cyclic) unless the name says _mhz
//   angular rate    rad/ns  (1 rad/ns = 1e9 rad/s = 2pi x 159.15 MHz)
//   magnetic field  mT
//   energy levels   MHz (cyclic), relative to each manifold's hyperfine centroid

namespace orca {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// An angular frequency. Stored in rad/ns so that products with times in ns
// are dimensionless.
class AngularFrequency {
public:
    constexpr AngularFrequency() = default;

    static constexpr AngularFrequency from_ghz(double f_ghz) { return AngularFrequency(kTwoPi * f_ghz); }
    static constexpr AngularFrequency from_mhz(double f_mhz) { return from_ghz(1e-3 * f_mhz); }
    static constexpr AngularFrequency from_rad_per_ns(double w) { return AngularFrequency(w); }
    static constexpr AngularFrequency from_rad_per_s(double w) { return AngularFrequency(1e-9 * w); }

    constexpr double rad_per_ns() const { return value_; }
    constexpr double rad_per_s() const { return 1e9 * value_; }
    constexpr double ghz() const { return value_ / kTwoPi; }
    constexpr double mhz() const { return 1e3 * ghz(); }

    constexpr auto operator<=>(const AngularFrequency&) const = default;

private:
    constexpr explicit AngularFrequency(double w) : value_(w) {}
    double value_ = 0.0;
};

} // namespace orca
