#pragma once

// Experiment configuration document (JSON). Every section is optional and
// falls back to the defaults below; unknown keys raise ConfigError.
//
// {
//   "constants_path": "",
//   "output_dir": "out",
//   "atomic":  {"field_mt": 169, "intermediate_detuning_ghz": -8},
//   "cavity":  {"r1": 0.6, "r2": 0.9998, "zeta_rt": 0.135, "fsr_ghz": 8.3, ...},
//   "vapour":  {"temperature_c": 85, "cell_length_mm": 6, "optical_depth": null, ...},
//   "memory":  {"cooperativity": 3800, "insertion_loss": 0.68, ...},
//   "pulses":  {"control_detuning_ghz": 7.995, "write_energy_nj": 0.2, ...},
//   "optimizer": {"population": 24, "generations": 60, "seed": 1, ...}
// }

#include "orca/cavity.hpp"
#include "orca/constants.hpp"
#include "orca/memory.hpp"
#include "orca/optimizer.hpp"
#include "orca/vapour.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace orca::config {

struct AtomicSection {
    double field_mt = 169.0;
    double intermediate_detuning_ghz = -8.0;
};

// Memory model parameters that are not owned by another section.
struct MemorySection {
    double cooperativity = 3800.0;
    std::optional<double> doppler_width_ghz;  // default: thermal width at the vapour temperature
    double polarization_decay_mhz = 6.0666;
    double spin_decay_mhz = 0.66;
    double dephasing_width_mhz = 12.6;
    double line_splitting_mhz = 171.0;
    double amplitude_a = 0.51;
    double amplitude_b = 0.038;
    double insertion_loss = 0.68;
    double rabi_calibration_rad_per_ns = 12.188;
    double noise_photons_per_pulse = 3e-4;
    double time_step_ns = 0.005;
    bool check_convergence = false;
    bool apply_dephasing = true;
    double cavity_drift_ghz = 0.0;
};

struct OptimizerSection {
    int population = 24;
    int generations = 60;
    double crossover_probability = 0.9;
    double crossover_eta = 15.0;
    double mutation_probability = -1.0;  // negative: 1 / dimension
    double mutation_eta = 20.0;
    double objective_noise_relative = 0.0;
    double drift_rate_ghz_per_generation = 0.012;
    double drift_noise_ghz = 0.02;
    bool seed_with_base = true;
    std::vector<std::string> parameters;  // empty: all pulse settings
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    std::string constants_path;  // empty: default resolution order
    std::string output_dir = "out";
    AtomicSection atomic;
    cavity::CavityParams cavity;
    vapour::VapourParams vapour;
    MemorySection memory;
    memory::PulseSettings pulses;
    OptimizerSection optimizer;

    void validate() const;
    memory::MemoryConfig memory_config(const AtomicConstants& constants) const;
    optimizer::ParameterSpace parameter_space() const;
    optimizer::GaSettings ga_settings() const;
    optimizer::DriftModel drift_model(bool enabled) const;
    AtomicConstants constants() const;
    bool pulses_valid() const;
};

// Throws ConfigError on unknown keys, wrong types or failed validation.
ExperimentConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load(const std::filesystem::path& path);

} // namespace orca::config
