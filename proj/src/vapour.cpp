#include "orca/vapour.hpp"

#include "orca/error.hpp"

#include <algorithm>
#include <cmath>

namespace orca::vapour {

namespace {

constexpr double kKelvin = 273.15;

double kelvin(double c) {
    const double t = c + kKelvin;
    if (!(t > 0.0)) throw DomainError("temperature must be above absolute zero");
    return t;
}

double density_over_sqrt_t(double temperature_c) {
    const double t = kelvin(temperature_c);
    const double p_torr = std::pow(10.0, 2.881 + 4.312 - 4040.0 / t);
    const double n = p_torr * 133.322368 / (kBoltzmann * t);
    return n / std::sqrt(t);
}

double wavenumber(double nm) { return kTwoPi / (nm * 1e-9); }

double mismatch(double signal_nm, double control_nm, Geometry g) {
    const double ks = wavenumber(signal_nm);
    const double kc = wavenumber(control_nm);
    return g == Geometry::counter_propagating ? std::abs(ks - kc) : ks + kc;
}

} // namespace

void VapourParams::validate() const {
    kelvin(temperature_c);
    if (!(cell_length_mm > 0.0)) throw DomainError("vapour: cell length must be positive");
    if (optical_depth && *optical_depth < 0.0) throw DomainError("vapour: optical depth must be >= 0");
    if (field_inhomogeneity_mhz && *field_inhomogeneity_mhz < 0.0)
        throw DomainError("vapour: field inhomogeneity must be >= 0");
}

double thermal_velocity(double temperature_c, double mass_amu) {
    const double t = kelvin(temperature_c);
    return std::sqrt(kBoltzmann * t / (mass_amu * kAtomicMass));
}

AngularFrequency doppler_width(double temperature_c, double wavelength_nm, double mass_amu) {
    const double fwhm_rad_s = wavenumber(wavelength_nm) * std::sqrt(8.0 * std::log(2.0)) *
                              thermal_velocity(temperature_c, mass_amu);
    return AngularFrequency::from_rad_per_s(fwhm_rad_s);
}

double optical_depth(double temperature_c, double cell_length_mm) {
    if (!(temperature_c >= 20.0 && temperature_c <= 150.0))
        throw DomainError("optical_depth: temperature outside the 20..150 C model range");
    if (!(cell_length_mm > 0.0)) throw DomainError("optical_depth: cell length must be positive");
    const double ref = density_over_sqrt_t(kCalibrationTemperatureC);
    return kCalibrationDepth * (density_over_sqrt_t(temperature_c) / ref) * (cell_length_mm / kCalibrationLengthMm);
}

double effective_optical_depth(const VapourParams& v) {
    v.validate();
    return v.optical_depth ? *v.optical_depth : optical_depth(v.temperature_c, v.cell_length_mm);
}

std::optional<double> residual_doppler_lifetime(double temperature_c, double signal_nm, double control_nm,
                                                Geometry g, double mass_amu) {
    const double dk = mismatch(signal_nm, control_nm, g);
    if (dk == 0.0) return std::nullopt;
    return 1e9 / (dk * thermal_velocity(temperature_c, mass_amu));
}

double two_photon_doppler_fwhm_mhz(double temperature_c, double signal_nm, double control_nm, Geometry g,
                                   double mass_amu) {
    const double dk = mismatch(signal_nm, control_nm, g);
    return 1e-6 * dk / kTwoPi * std::sqrt(8.0 * std::log(2.0)) * thermal_velocity(temperature_c, mass_amu);
}

double field_inhomogeneity_mhz(const VapourParams& v, const AtomicConstants& c) {
    if (v.field_inhomogeneity_mhz) return *v.field_inhomogeneity_mhz;
    constexpr double target = 12.6;
    const double rd = two_photon_doppler_fwhm_mhz(v.temperature_c, c.signal_wavelength_nm, c.control_wavelength_nm,
                                                  Geometry::counter_propagating, c.mass_amu);
    return std::sqrt(std::max(0.0, target * target - rd * rd));
}

double unit_gaussian(double x, double fwhm) { return std::exp(-4.0 * std::log(2.0) * x * x / (fwhm * fwhm)); }

double one_photon_weight(const atomic::TransitionLine& line, const ManifoldSpec& lower, const ManifoldSpec& upper) {
    const double pop = 1.0 / lower.dimension();
    return pop * line.raw_strength * 3.0 * (2.0 * lower.j + 1.0) / (2.0 * upper.j + 1.0);
}

std::vector<double> one_photon_spectrum(const VapourParams& v, const AtomicConstants& c, double field_mt,
                                        atomic::Polarization pol, std::span<const double> detunings_ghz) {
    const double d = effective_optical_depth(v);
    const double fwhm = doppler_width(v.temperature_c, c.signal_wavelength_nm, c.mass_amu).ghz();
    const auto lines = atomic::transition_lines(c.ground, c.intermediate, field_mt, pol, c.bohr_magneton_mhz_per_mt);
    std::vector<double> out;
    out.reserve(detunings_ghz.size());
    for (double x : detunings_ghz) {
        double od = 0.0;
        for (const auto& ln : lines) od += d * one_photon_weight(ln, c.ground, c.intermediate) * unit_gaussian(x - ln.detuning_ghz, fwhm);
        out.push_back(std::exp(-od));
    }
    return out;
}

TwoPhotonSpectrum two_photon_spectrum(const VapourParams& v, const AtomicConstants& c, double field_mt,
                                      atomic::Polarization signal, atomic::Polarization control,
                                      std::span<const double> control_detunings_ghz, const TwoPhotonOptions& opt) {
    v.validate();
    if (control_detunings_ghz.empty()) throw DomainError("two_photon_spectrum: empty detuning grid");
    if (opt.control_absorbance < 0.0) throw DomainError("two_photon_spectrum: control absorbance must be >= 0");

    TwoPhotonSpectrum out;
    out.control_detunings_ghz.assign(control_detunings_ghz.begin(), control_detunings_ghz.end());

    const double rd = two_photon_doppler_fwhm_mhz(v.temperature_c, c.signal_wavelength_nm, c.control_wavelength_nm,
                                                  opt.geometry, c.mass_amu);
    const double inh = field_inhomogeneity_mhz(v, c);
    const double nat = c.upper_linewidth_mhz;
    out.line_fwhm_mhz = std::sqrt(rd * rd + nat * nat + inh * inh);
    const double fwhm_ghz = 1e-3 * out.line_fwhm_mhz;

    const double gamma = doppler_width(v.temperature_c, c.signal_wavelength_nm, c.mass_amu).ghz();
    const auto one = atomic::transition_lines(c.ground, c.intermediate, field_mt, signal, c.bohr_magneton_mhz_per_mt);
    for (const auto& ln : one)
        if (std::abs(opt.signal_detuning_ghz - ln.detuning_ghz) < gamma) out.near_one_photon_resonance = true;
    const double sig = opt.signal_detuning_ghz;
    out.background = one_photon_spectrum(v, c, field_mt, signal, std::span<const double>(&sig, 1)).front();

    const auto [lo, hi] = std::minmax_element(control_detunings_ghz.begin(), control_detunings_ghz.end());
    const double pad = 5.0 * fwhm_ghz;
    out.lines = atomic::two_photon_lines(c, field_mt, signal, control, {opt.signal_detuning_ghz, *lo - pad, *hi + pad});
    double smax = 0.0;
    for (const auto& ln : out.lines) smax = std::max(smax, ln.strength);

    out.transmission.reserve(control_detunings_ghz.size());
    for (double x : control_detunings_ghz) {
        double od = 0.0;
        if (smax > 0.0)
            for (const auto& ln : out.lines)
                od += opt.control_absorbance * (ln.strength / smax) * unit_gaussian(x - ln.control_detuning_ghz, fwhm_ghz);
        out.transmission.push_back(out.background * std::exp(-od));
    }
    return out;
}

} // namespace orca::vapour
