#pragma once

#include <filesystem>
#include <string>

namespace orca {

// One fine-structure term of 87Rb together with its hyperfine and Zeeman
// parameters. `first_index` is the level label given to the lowest state of
// this manifold in the global 1..48 numbering.
struct ManifoldSpec {
    std::string label;
    int l = 0;           // orbital angular momentum, used for dipole selection
    double j = 0.5;
    double i = 1.5;
    double a_hfs_mhz = 0.0;
    double b_hfs_mhz = 0.0;
    double g_j = 0.0;
    double g_i = 0.0;
    int first_index = 1;

    int dimension() const;
    // Throws StructuralError when J or I are not non-negative half-integers,
    // or when a quadrupole constant is given for J = 1/2 or I = 1/2.
    void validate() const;
};

struct AtomicConstants {
    std::string version;
    ManifoldSpec ground;        // 5S1/2
    ManifoldSpec intermediate;  // 5P3/2
    ManifoldSpec upper;         // 5D5/2
    double bohr_magneton_mhz_per_mt = 13.996245;
    double boltzmann_j_per_k = 1.380649e-23;
    double atomic_mass_unit_kg = 1.66053906660e-27;
    double mass_amu = 86.909180527;
    double signal_wavelength_nm = 780.241;
    double control_wavelength_nm = 775.978;
    double intermediate_linewidth_mhz = 6.0666;  // 5P3/2 natural linewidth
    double upper_linewidth_mhz = 0.66;           // 5D5/2 natural linewidth

    // Manifold by label ("5S1/2", "5P3/2", "5D5/2"); throws DomainError.
    const ManifoldSpec& manifold(const std::string& label) const;
};

// Values compiled into the library; identical to data/rb87_constants.txt.
AtomicConstants builtin_constants();

// Reads a `key = value   # comment` file. Keys not present keep their
// built-in value; unknown keys are rejected with ConfigError.
AtomicConstants load_constants(const std::filesystem::path& path);

// Resolution order: explicit path, ORCA_CONSTANTS environment variable,
// the data file shipped with the sources, built-in values.
AtomicConstants resolve_constants(const std::string& explicit_path = {});

} // namespace orca
