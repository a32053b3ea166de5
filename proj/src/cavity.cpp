#include "orca/cavity.hpp"

#include "orca/error.hpp"
#include "orca/units.hpp"

#include <algorithm>
#include <cmath>

namespace orca::cavity {

namespace {

std::complex<double> phasor(const CavityParams& p, double detuning_ghz) {
    return std::polar(1.0, kTwoPi * detuning_ghz / p.fsr_ghz);
}

} // namespace

void CavityParams::validate() const {
    if (!(r1 >= 0.0 && r1 <= 1.0)) throw DomainError("cavity: R1 must lie in [0, 1]");
    if (!(r2 >= 0.0 && r2 <= 1.0)) throw DomainError("cavity: R2 must lie in [0, 1]");
    if (!(zeta_rt >= 0.0 && zeta_rt < 1.0)) throw DomainError("cavity: zeta_rt must lie in [0, 1)");
    if (!(fsr_ghz > 0.0)) throw DomainError("cavity: fsr must be positive");
}

double round_trip_amplitude(const CavityParams& p) { return std::sqrt(p.r1 * p.r2 * (1.0 - p.zeta_rt)); }

std::complex<double> reflection_amplitude(const CavityParams& p, double detuning_ghz) {
    const auto e = phasor(p, detuning_ghz);
    const double g = std::sqrt(p.r2 * (1.0 - p.zeta_rt));
    return std::sqrt(p.r1) - (1.0 - p.r1) * g * e / (1.0 - round_trip_amplitude(p) * e);
}

std::complex<double> transmission_amplitude(const CavityParams& p, double detuning_ghz) {
    const auto e = phasor(p, detuning_ghz);
    const double num = std::sqrt((1.0 - p.r1) * (1.0 - p.r2)) * std::pow(1.0 - p.zeta_rt, 0.25);
    return num / (1.0 - round_trip_amplitude(p) * e);
}

CavityResponse reflection_response(const CavityParams& p, std::span<const double> detunings_ghz) {
    p.validate();
    CavityResponse out;
    out.detunings_ghz.assign(detunings_ghz.begin(), detunings_ghz.end());
    out.reflection.reserve(detunings_ghz.size());
    out.transmission.reserve(detunings_ghz.size());
    for (double d : detunings_ghz) {
        out.reflection.push_back(reflection_amplitude(p, d));
        out.transmission.push_back(transmission_amplitude(p, d));
    }
    return out;
}

double finesse(const CavityParams& p) {
    p.validate();
    const double r = round_trip_amplitude(p);
    if (r >= 1.0) throw DomainError("cavity: round-trip amplitude >= 1, finesse undefined");
    return std::numbers::pi * std::sqrt(r) / (1.0 - r);
}

double linewidth_ghz(const CavityParams& p) { return p.fsr_ghz / finesse(p); }

double insertion_loss(const CavityParams& p) {
    p.validate();
    return 1.0 - std::norm(reflection_amplitude(p, 0.0));
}

double insertion_loss_db(const CavityParams& p) {
    const double returned = 1.0 - insertion_loss(p);
    return 10.0 * std::log10(returned);
}

double buildup(const CavityParams& p, double detuning_ghz) {
    return (1.0 - p.r1) / std::norm(1.0 - round_trip_amplitude(p) * phasor(p, detuning_ghz));
}

double cooperativity(double optical_depth, double f) {
    if (optical_depth < 0.0) throw DomainError("cooperativity: optical depth must be >= 0");
    if (!(f > 0.0)) throw DomainError("cooperativity: finesse must be > 0");
    return 2.0 * optical_depth * f;
}

double temperature_shift_ghz(double delta_t_c, const CavityParams& p) { return p.tuning_coeff_ghz_per_c * delta_t_c; }

DualResonanceMap dual_resonance_map(const CavityParams& p, std::span<const double> signal_grid_ghz,
                                    std::span<const double> control_grid_ghz, double temperature_offset_c) {
    p.validate();
    if (signal_grid_ghz.empty() || control_grid_ghz.empty()) throw DomainError("dual_resonance_map: empty grid");
    const double shift = temperature_shift_ghz(temperature_offset_c, p);
    const double os = p.mode_offset_signal_ghz + shift;
    const double oc = p.mode_offset_control_ghz + shift;

    DualResonanceMap m;
    m.signal_grid_ghz.assign(signal_grid_ghz.begin(), signal_grid_ghz.end());
    m.control_grid_ghz.assign(control_grid_ghz.begin(), control_grid_ghz.end());
    m.value.assign(signal_grid_ghz.size(), std::vector<double>(control_grid_ghz.size()));
    for (std::size_t i = 0; i < signal_grid_ghz.size(); ++i) {
        const double bs = buildup(p, signal_grid_ghz[i] - os);
        for (std::size_t j = 0; j < control_grid_ghz.size(); ++j)
            m.value[i][j] = bs * buildup(p, control_grid_ghz[j] - oc);
    }

    const auto [smin, smax] = std::minmax_element(signal_grid_ghz.begin(), signal_grid_ghz.end());
    const auto [cmin, cmax] = std::minmax_element(control_grid_ghz.begin(), control_grid_ghz.end());
    const double half = 0.5 * linewidth_ghz(p);
    const auto k0 = static_cast<long>(std::ceil((*smin - os) / p.fsr_ghz));
    const auto k1 = static_cast<long>(std::floor((*smax - os) / p.fsr_ghz));
    const auto m0 = static_cast<long>(std::ceil((*cmin - oc) / p.fsr_ghz));
    const auto m1 = static_cast<long>(std::floor((*cmax - oc) / p.fsr_ghz));
    for (long k = k0; k <= k1; ++k)
        for (long q = m0; q <= m1; ++q) {
            DualResonanceSpot s{os + k * p.fsr_ghz, oc + q * p.fsr_ghz, false};
            s.on_two_photon_line = std::abs(s.signal_ghz + s.control_ghz) <= half;
            m.spots.push_back(s);
            if (s.on_two_photon_line) m.on_line.push_back(s);
        }
    return m;
}

} // namespace orca::cavity
