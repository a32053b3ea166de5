#pragma once

// Linear two-mirror cavity probed in reflection through the in-coupler.

#include <complex>
#include <span>
#include <vector>

namespace orca::cavity {

struct CavityParams {
    double r1 = 0.6;        // in-coupler power reflectivity
    double r2 = 0.9998;     // end mirror power reflectivity
    double zeta_rt = 0.135; // round-trip excess power loss
    double fsr_ghz = 8.3;
    double tuning_coeff_ghz_per_c = 3.2;
    // Offsets of the signal and control carriers from their nearest cavity
    // resonances at the reference temperature (GHz). Signal resonances sit
    // at Delta = mode_offset_signal + k*fsr, control at delta = mode_offset_control + m*fsr.
    double mode_offset_signal_ghz = -8.0;
    double mode_offset_control_ghz = 8.0;

    // Throws DomainError on out-of-range values.
    void validate() const;
};

struct CavityResponse {
    std::vector<double> detunings_ghz;
    std::vector<std::complex<double>> reflection;
    std::vector<std::complex<double>> transmission;
};

// Round-trip amplitude factor sqrt(R1 R2 (1 - zeta_rt)).
double round_trip_amplitude(const CavityParams& p);

std::complex<double> reflection_amplitude(const CavityParams& p, double detuning_ghz);
// Round-trip loss is split evenly between the two half passes; no
// propagation phase is attached, so the amplitude is fsr-periodic.
std::complex<double> transmission_amplitude(const CavityParams& p, double detuning_ghz);

CavityResponse reflection_response(const CavityParams& p, std::span<const double> detunings_ghz);

double finesse(const CavityParams& p);
double linewidth_ghz(const CavityParams& p);
// 1 - |r(0)|^2.
double insertion_loss(const CavityParams& p);
double insertion_loss_db(const CavityParams& p);

// Circulating intensity relative to the incident intensity.
double buildup(const CavityParams& p, double detuning_ghz);

double cooperativity(double optical_depth, double finesse);

double temperature_shift_ghz(double delta_t_c, const CavityParams& p);

struct DualResonanceSpot {
    double signal_ghz = 0.0;
    double control_ghz = 0.0;
    bool on_two_photon_line = false;  // |signal + control| <= linewidth/2
};

struct DualResonanceMap {
    std::vector<double> signal_grid_ghz;
    std::vector<double> control_grid_ghz;
    std::vector<std::vector<double>> value;  // [signal][control], buildup product
    std::vector<DualResonanceSpot> spots;    // resonance pairs inside the grid
    std::vector<DualResonanceSpot> on_line;  // subset with on_two_photon_line
};

// Exact two-photon-line predicate (control = -signal).
inline bool on_two_photon_line(double signal_ghz, double control_ghz) { return signal_ghz + control_ghz == 0.0; }

// `temperature_offset_c` moves both resonance combs by tuning_coeff * dT.
DualResonanceMap dual_resonance_map(const CavityParams& p, std::span<const double> signal_grid_ghz,
                                    std::span<const double> control_grid_ghz, double temperature_offset_c = 0.0);

} // namespace orca::cavity
