#pragma once

// Hyperfine + Zeeman structure of the 87Rb 5S1/2, 5P3/2 and 5D5/2 terms,
// dipole line strengths and the ladder (5S -> 5P -> 5D) two-photon lines.
//
// Energies are in MHz relative to each manifold's zero-field hyperfine
// centroid; line positions are in GHz relative to the zero-field centroid
// interval of the manifold pair. The magnetic field points along the
// quantization axis, so only m_F-conserving blocks couple.

#include "orca/constants.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace orca::atomic {

inline constexpr double kDefaultBohrMagneton = 13.996245;  // MHz/mT
inline constexpr double kReferenceFieldMt = 300.0;          // field at which level labels are fixed
inline constexpr double kLineThreshold = 1e-6;              // relative strength below which lines are dropped

enum class Polarization { sigma_plus, sigma_minus, pi };

// Change of m_F driven by the polarization (upper m_F - lower m_F).
int delta_m(Polarization p);
std::string to_string(Polarization p);
Polarization parse_polarization(const std::string& s);

// <j1 m1; j2 m2 | j m>. Arguments are doubled (2j, 2m) so half-integers are exact.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m);

struct BasisState {
    double mj = 0.0;
    double mi = 0.0;
    double mf() const { return mj + mi; }
};

// |m_j, m_i> product basis ordered by m_j then m_i, both ascending.
std::vector<BasisState> product_basis(const ManifoldSpec& m);

Eigen::MatrixXcd hyperfine_hamiltonian(const ManifoldSpec& m);
Eigen::MatrixXcd zeeman_hamiltonian(const ManifoldSpec& m, double field_mt,
                                    double bohr_magneton = kDefaultBohrMagneton);

// H = H_hfs + H_Z in MHz. Throws DomainError for a negative field and
// StructuralError for a malformed manifold.
Eigen::MatrixXcd build_hamiltonian(const ManifoldSpec& m, double field_mt,
                                   double bohr_magneton = kDefaultBohrMagneton);

// Zero-field hyperfine energy of level F from the closed-form expression.
double zero_field_energy(const ManifoldSpec& m, double f);

struct ZeemanState {
    std::string manifold;
    int index = 0;               // global label, B-continuous (see diagonalize_manifold)
    double energy_mhz = 0.0;
    Eigen::VectorXcd composition;  // amplitudes over product_basis()
    BasisState dominant;         // product state with the largest weight
    double dominant_weight = 0.0;
    double mf = 0.0;
    int block_rank = 0;          // energy rank inside the m_F block
};

// All eigenstates of the manifold, sorted by energy.
//
// Labels: the Hamiltonian is diagonalized block by block in m_F. Levels of
// equal m_F never cross (the field is the only parameter), so (m_F, rank in
// block) identifies a state continuously in B. The labels are ordered by
// energy at 300 mT and numbered from manifold.first_index upwards. Each
// eigenvector's largest component is made real and positive.
std::vector<ZeemanState> diagonalize_manifold(const ManifoldSpec& m, double field_mt,
                                              double bohr_magneton = kDefaultBohrMagneton);

struct Discontinuity {
    int index = 0;
    std::size_t grid_point = 0;  // overlap measured between grid_point-1 and grid_point
    double overlap = 0.0;
};

struct BreitRabiTable {
    std::string manifold;
    std::vector<double> fields_mt;
    std::vector<int> indices;                      // ascending labels
    std::vector<std::vector<double>> energies_mhz;  // [state][field point]
    std::vector<Discontinuity> discontinuities;    // empty when tracking succeeded
};

// Energy traces on an ascending field grid. Consecutive eigenvectors with the
// same label must overlap by more than 0.5; anything else is reported in
// `discontinuities`.
BreitRabiTable breit_rabi_curve(const ManifoldSpec& m, std::span<const double> fields_mt,
                                double bohr_magneton = kDefaultBohrMagneton);

struct TransitionLine {
    int lower = 0;
    int upper = 0;
    Polarization polarization = Polarization::sigma_minus;
    double detuning_ghz = 0.0;
    double strength = 0.0;      // normalized to the strongest line of the pair (all polarizations)
    double raw_strength = 0.0;  // |<upper|d_q|lower>|^2 in units of the reduced matrix element
};

// |<u|d_q|l>|^2 for every (upper, lower) pair, rows = upper states.
Eigen::MatrixXd dipole_strengths(const ManifoldSpec& lower, std::span<const ZeemanState> lower_states,
                                 const ManifoldSpec& upper, std::span<const ZeemanState> upper_states,
                                 Polarization p);

// One-photon lines lower -> upper for one polarization, sorted by detuning.
// Lines weaker than kLineThreshold of the pair maximum are omitted.
// Throws DomainError unless |L_upper - L_lower| = 1.
std::vector<TransitionLine> transition_lines(const ManifoldSpec& lower, const ManifoldSpec& upper,
                                             double field_mt, Polarization p,
                                             double bohr_magneton = kDefaultBohrMagneton);

struct TwoPhotonWindow {
    double signal_detuning_ghz = -8.0;  // fixed signal detuning from the 5S->5P centroid
    double control_min_ghz = 0.0;       // scanned control detuning range (5P->5D centroid)
    double control_max_ghz = 16.0;
};

struct TwoPhotonLine {
    int ground = 0;
    int intermediate = 0;  // dominant path
    int doubly_excited = 0;
    Polarization signal_pol = Polarization::sigma_minus;
    Polarization control_pol = Polarization::sigma_minus;
    double signal_detuning_ghz = 0.0;
    double control_detuning_ghz = 0.0;  // signal + control = two_photon_ghz
    double two_photon_ghz = 0.0;        // (E_d - E_g) relative to the zero-field 5S->5D interval
    double intermediate_detuning_ghz = 0.0;
    double strength = 0.0;
    double bare_strength = 0.0;  // sum over intermediates of s1*s2 without detuning weight
    bool is_loss_channel = true;
};

// Effective intermediate width used to weight paths by their detuning:
// weight = s1 s2 / (1 + (Delta_int / gamma_eff)^2). Set to the Doppler FWHM.
inline constexpr double kTwoPhotonGammaEffGhz = 0.55;

// Ladder lines for one polarization pair whose control detuning lies inside
// the window, sorted by control detuning. Lines of the same (ground, upper)
// pair are merged over intermediate states.
std::vector<TwoPhotonLine> two_photon_lines(const AtomicConstants& c, double field_mt, Polarization signal,
                                            Polarization control, const TwoPhotonWindow& window);

// Union over the four circular polarization pairs.
std::vector<TwoPhotonLine> all_two_photon_lines(const AtomicConstants& c, double field_mt,
                                                const TwoPhotonWindow& window);

// The storage transition: the (sigma-, sigma-) line with the largest bare
// strength. `intermediate_detuning_ghz` is the signal detuning from that
// line's own intermediate level; the returned line is evaluated with the
// matching centroid-referenced signal detuning.
TwoPhotonLine memory_line(const AtomicConstants& c, double field_mt, double intermediate_detuning_ghz = -8.0);

// Window whose signal detuning puts the memory line's intermediate level at
// `intermediate_detuning_ghz` and whose control range spans +-half_width_ghz
// around the memory line.
TwoPhotonWindow memory_window(const AtomicConstants& c, double field_mt, double intermediate_detuning_ghz = -8.0,
                              double half_width_ghz = 0.5);

} // namespace orca::atomic
