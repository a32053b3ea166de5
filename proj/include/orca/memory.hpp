#pragma once

// Time-domain model of the cavity-enhanced ladder memory.
//
// Three slowly varying amplitudes are integrated with fixed-step RK4
// (time in ns, rates in rad/ns):
//
//   a  intra-cavity signal     da/dt = -(kappa/2 + i Dc) a - i g P + sqrt(kappa) a_in
//   P  5S-5P polarization      dP/dt = -(gamma_e/2 - i Delta) P - i g a - i (Omega/2) S
//   S  5S-5D spin wave         dS/dt = i delta2 S - i (Omega*/2) P
//   a_out = a_in - sqrt(kappa) a
//
// |a_in|^2 and |a_out|^2 are photon fluxes (photons/ns). The cavity is
// tuned to cancel the dispersive pull of the off-resonant atoms. Spin-wave
// decay and dephasing enter once, when the leak window closes: S is
// multiplied by the amplitude kernel whose squared modulus is the lifetime
// curve evaluated at the nominal storage time.

#include "orca/atomic.hpp"
#include "orca/cavity.hpp"
#include "orca/units.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace orca::memory {

struct PulseShape {
    double center_ns = 0.0;
    double fwhm_ns = 1.0;            // intensity FWHM
    double energy = 0.0;             // nJ for control pulses, mean photon number for the signal
    double carrier_detuning_ghz = 0.0;
    double phase_rad = 0.0;

    void validate(const std::string& what) const;
};

struct MemoryConfig {
    cavity::CavityParams cavity;
    double cooperativity = 3800.0;
    AngularFrequency doppler_width = AngularFrequency::from_ghz(0.5586);            // Gamma (FWHM)
    AngularFrequency polarization_decay = AngularFrequency::from_mhz(6.0666);       // gamma_e, homogeneous
    double intermediate_detuning_ghz = -8.0;                                        // Delta
    AngularFrequency spin_decay = AngularFrequency::from_mhz(0.66);                 // gamma_m
    double dephasing_width_mhz = 12.6;                                              // nu'
    AngularFrequency line_splitting = AngularFrequency::from_mhz(171.0);            // omega
    double amplitude_a = 0.51;
    double amplitude_b = 0.038;
    double insertion_loss = 0.68;  // zeta
    // Peak Rabi frequency (rad/ns) of a 1 nJ, 1 ns FWHM control pulse; scales
    // as sqrt(E/fwhm). Value from orca-calibrate: puts the write-energy
    // optimum of the default pulse settings at 0.2 nJ.
    double rabi_calibration = 12.188;
    double noise_rate = 3e-4;  // noise photons per pulse
    double time_step_ns = 0.005;
    bool check_convergence = false;  // rerun at half step, NumericalError above 1e-3 relative change
    bool apply_dephasing = true;
    double cavity_drift_ghz = 0.0;  // common shift of both resonance combs

    void validate() const;
};

struct SimulationResult {
    std::vector<double> time_ns;
    std::vector<double> output_flux;     // photons/ns leaving the cavity, before path loss
    std::vector<double> reference_flux;  // control-off run
    double input_photons = 0.0;
    double reference_counts = 0.0;  // C_ref, after path loss
    double leak_counts = 0.0;
    double retrieved_counts = 0.0;  // C_ret, after path loss
    double internal_efficiency = 0.0;
    double total_efficiency = 0.0;
    double objective = 0.0;  // C_ret / C_ref
    std::optional<double> snr_db;
    // Photon bookkeeping of the storage run (no path loss).
    double polarization_loss = 0.0;
    double dephasing_loss = 0.0;
    double residual_excitation = 0.0;
    double leak_window_end_ns = 0.0;
    double convergence_change = 0.0;  // relative change on step halving, when checked
};

struct SimulationOptions {
    bool record_trace = true;
    bool run_reference = true;
};

// Throws DomainError if the read pulse does not follow the write pulse with
// non-overlapping +-1.5 FWHM windows, or if the signal has not ended
// (centre + 1.5 FWHM) before the leak window closes.
SimulationResult simulate_storage_retrieval(const MemoryConfig& config, const PulseShape& signal,
                                            const PulseShape& write, const PulseShape& read,
                                            const SimulationOptions& opt = {});

// eta = C_ret / (C_ref / (1 - zeta)).
double total_efficiency(double retrieved_counts, double reference_counts, double zeta);

// exp(-gamma_m t) exp(-pi^2 nu'^2 t^2 / (4 ln 2)) |A + B exp(i omega t)|^2
// with gamma_m and omega in rad/ns, nu' in MHz and t in ns.
double lifetime_model(double t_ns, double gamma_m, double nu_prime_mhz, double a, double b, double omega);
double lifetime_model(double t_ns, const MemoryConfig& c);

std::optional<double> snr_db(double signal_counts, double noise_rate);

double mean_photon_from_counts(double detected_counts, double path_transmission);

// Nominal coupling constant g (rad/ns) for a cooperativity.
double coupling_constant(const MemoryConfig& c);

// The eight tunable operating parameters plus the fixed storage time.
// Defaults are the calibrated optimum at C = 3800 (see orca-calibrate).
struct PulseSettings {
    double control_detuning_ghz = 7.995;  // delta; two-photon resonance at delta = -Delta
    double write_energy_nj = 0.2;
    double read_write_ratio = 8.4;
    double signal_delay_ns = 0.56;  // signal centre minus write centre
    double signal_fwhm_ns = 2.0;
    double write_fwhm_ns = 2.56;
    double read_delay_offset_ns = 0.0;  // added to the storage time
    double read_fwhm_ns = 2.91;
    double storage_time_ns = 12.5;
    double mean_photon_number = 0.8;
};

struct PulseSequence {
    PulseShape signal, write, read;
};

PulseSequence make_sequence(const PulseSettings& s);

SimulationResult simulate(const MemoryConfig& c, const PulseSettings& s, const SimulationOptions& opt = {});

// Peak Rabi frequency (rad/ns) of a control pulse.
double peak_rabi(const MemoryConfig& c, const PulseShape& p);

// Field names accepted by refine_settings and the optimizer.
const std::vector<std::string>& setting_names();
double get_setting(const PulseSettings& s, const std::string& name);
void set_setting(PulseSettings& s, const std::string& name, double v);

struct SettingBound {
    std::string name;
    double lower, upper;
    double resolution = 0.0;
};

// Bounds of the eight tunable settings (control detuning in GHz, energies in
// nJ, times in ns).
const std::vector<SettingBound>& default_setting_bounds();
const SettingBound& setting_bound(const std::string& name);

// Nelder-Mead refinement of the named settings (clamped to their bounds),
// maximizing `score`. Deterministic.
using SettingsScore = std::function<double(const PulseSettings&)>;
PulseSettings refine_settings(const PulseSettings& start, std::span<const SettingBound> free, const SettingsScore& score,
                              int max_evaluations = 400, double initial_step = 0.1);

// Internal efficiency with failed (DomainError) settings scored 0.
double internal_efficiency_or_zero(const MemoryConfig& c, const PulseSettings& s);

// Scans. Points run in parallel with index-ordered output.
std::vector<SimulationResult> lifetime_scan(const MemoryConfig& c, const PulseSettings& s,
                                            std::span<const double> storage_times_ns);
std::vector<SimulationResult> energy_scan(const MemoryConfig& c, const PulseSettings& s,
                                          std::span<const double> write_energies_nj);

struct BandwidthPoint {
    double signal_fwhm_ns = 0.0;
    PulseSettings settings;
    SimulationResult result;
};
// Re-optimizes the control pulses (write energy and width, read energy and
// width, signal delay, control detuning) for each signal width, warm-started
// from the previous point.
std::vector<BandwidthPoint> bandwidth_scan(const MemoryConfig& c, const PulseSettings& s,
                                           std::span<const double> signal_fwhm_ns, int evaluations_per_point = 300);

// Best internal efficiency over the control parameters for the given
// configuration; starts from every settings in `starts` and keeps the best.
std::pair<PulseSettings, double> optimize_internal(const MemoryConfig& c, std::span<const PulseSettings> starts,
                                                   int evaluations = 400);

struct OscillationEstimate {
    double ratio = 0.0;  // modelled B/A
    atomic::TwoPhotonLine memory;
    std::optional<atomic::TwoPhotonLine> competitor;  // line that sets the ratio
    double separation_mhz = 0.0;
};

// Relative beat amplitude from the strongest competing (sigma-, sigma-) line
// within half a free spectral range of the memory line: relative line
// strength times the signal and control cavity intensity responses at the
// line offset, |H(f)|^2 |H(f)|^2. The pulses are taken spectrally flat over
// the cavity line.
// One competitor: strength_ratio * |H(f)|^2 |H(f)|^2 / |H(0)|^4.
double beat_ratio(const cavity::CavityParams& p, double strength_ratio, double separation_ghz);
OscillationEstimate oscillation_suppression(const AtomicConstants& constants, double field_mt, const MemoryConfig& c);

} // namespace orca::memory
