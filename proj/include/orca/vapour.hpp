#pragma once

#include "orca/atomic.hpp"
#include "orca/constants.hpp"
#include "orca/units.hpp"

#include <optional>
#include <span>
#include <vector>

namespace orca::vapour {

inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kAtomicMass = 1.66053906660e-27;  // kg
inline constexpr double kCalibrationTemperatureC = 85.0;
inline constexpr double kCalibrationLengthMm = 6.0;
inline constexpr double kCalibrationDepth = 200.0;

enum class Geometry { counter_propagating, co_propagating };

struct VapourParams {
    double temperature_c = 85.0;
    double cell_length_mm = 6.0;
    std::optional<double> optical_depth;  // overrides the vapour-pressure model when set
    // Gaussian FWHM from field inhomogeneity (MHz). Unset: chosen so that the
    // counter-propagating two-photon line width equals 12.6 MHz.
    std::optional<double> field_inhomogeneity_mhz;

    void validate() const;
};

// Thermal (Gaussian) FWHM of a one-photon line.
AngularFrequency doppler_width(double temperature_c, double wavelength_nm, double mass_amu);

// 1-D thermal velocity spread sqrt(kT/m), m/s.
double thermal_velocity(double temperature_c, double mass_amu);

// Line-centre single-pass depth of the unresolved D2 line, from the liquid-Rb
// vapour pressure log10(P/torr) = 7.193 - 4040/T with d proportional to
// n L / sqrt(T), pinned to d(85 C, 6 mm) = 200. Valid for 20..150 C.
double optical_depth(double temperature_c, double cell_length_mm);

double effective_optical_depth(const VapourParams& v);

// 1/e spin-wave coherence time from the wavevector mismatch, in ns.
// Returns nullopt when the mismatch vanishes (unbounded lifetime).
std::optional<double> residual_doppler_lifetime(double temperature_c, double signal_nm, double control_nm,
                                                Geometry g, double mass_amu);

// Two-photon Doppler FWHM, MHz.
double two_photon_doppler_fwhm_mhz(double temperature_c, double signal_nm, double control_nm, Geometry g,
                                   double mass_amu);

double field_inhomogeneity_mhz(const VapourParams& v, const AtomicConstants& c);

// Gaussian with unit peak and the given FWHM.
double unit_gaussian(double x, double fwhm);

// One-photon weight of a line: ground population 1/8 times the raw strength,
// scaled so that the weights of one polarization sum to 1 over all lines.
double one_photon_weight(const atomic::TransitionLine& line, const ManifoldSpec& lower, const ManifoldSpec& upper);

// Signal transmission exp(-sum d w G(Delta - Delta_line)) on the 5S->5P lines.
std::vector<double> one_photon_spectrum(const VapourParams& v, const AtomicConstants& c, double field_mt,
                                        atomic::Polarization pol, std::span<const double> detunings_ghz);

struct TwoPhotonSpectrum {
    std::vector<double> control_detunings_ghz;
    std::vector<double> transmission;
    std::vector<atomic::TwoPhotonLine> lines;
    double line_fwhm_mhz = 0.0;
    double background = 1.0;  // one-photon transmission at the signal detuning
    bool near_one_photon_resonance = false;
};

struct TwoPhotonOptions {
    double signal_detuning_ghz = -12.742;  // centroid-referenced
    Geometry geometry = Geometry::counter_propagating;
    // Peak absorbance of a unit-strength line; zero means control off.
    double control_absorbance = 1.0;
};

TwoPhotonSpectrum two_photon_spectrum(const VapourParams& v, const AtomicConstants& c, double field_mt,
                                      atomic::Polarization signal, atomic::Polarization control,
                                      std::span<const double> control_detunings_ghz, const TwoPhotonOptions& opt);

} // namespace orca::vapour
