#include "orca/config.hpp"

#include "orca/error.hpp"
#include "orca/io.hpp"

#include <set>

namespace orca::config {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects whatever is left over.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
        }
    }

    void get(const char* key, std::optional<double>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        if (!j_.at(key).is_number()) throw ConfigError("'" + name_ + "." + key + "' must be a number or null");
        out = j_.at(key).get<double>();
    }

    Section child(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, name_.empty() ? key : name_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k))
                throw ConfigError("unknown key '" + (name_.empty() ? k : name_ + "." + k) + "'");
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

void ExperimentConfig::validate() const {
    try {
        if (!(atomic.field_mt >= 0.0)) throw DomainError("atomic.field_mt must be >= 0");
        cavity.validate();
        vapour.validate();
        memory_config(builtin_constants()).validate();
        parameter_space().validate();
        ga_settings().validate();
        if (!pulses_valid()) throw DomainError("pulses: widths must be > 0 and energies >= 0");
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

bool ExperimentConfig::pulses_valid() const {
    return pulses.signal_fwhm_ns > 0.0 && pulses.write_fwhm_ns > 0.0 && pulses.read_fwhm_ns > 0.0 &&
           pulses.write_energy_nj >= 0.0 && pulses.read_write_ratio >= 0.0 && pulses.mean_photon_number >= 0.0 &&
           pulses.storage_time_ns >= 0.0;
}

memory::MemoryConfig ExperimentConfig::memory_config(const AtomicConstants& constants) const {
    memory::MemoryConfig m;
    m.cavity = cavity;
    m.cooperativity = memory.cooperativity;
    m.doppler_width = memory.doppler_width_ghz
                          ? AngularFrequency::from_ghz(*memory.doppler_width_ghz)
                          : vapour::doppler_width(vapour.temperature_c, constants.signal_wavelength_nm, constants.mass_amu);
    m.polarization_decay = AngularFrequency::from_mhz(memory.polarization_decay_mhz);
    m.intermediate_detuning_ghz = atomic.intermediate_detuning_ghz;
    m.spin_decay = AngularFrequency::from_mhz(memory.spin_decay_mhz);
    m.dephasing_width_mhz = memory.dephasing_width_mhz;
    m.line_splitting = AngularFrequency::from_mhz(memory.line_splitting_mhz);
    m.amplitude_a = memory.amplitude_a;
    m.amplitude_b = memory.amplitude_b;
    m.insertion_loss = memory.insertion_loss;
    m.rabi_calibration = memory.rabi_calibration_rad_per_ns;
    m.noise_rate = memory.noise_photons_per_pulse;
    m.time_step_ns = memory.time_step_ns;
    m.check_convergence = memory.check_convergence;
    m.apply_dephasing = memory.apply_dephasing;
    m.cavity_drift_ghz = memory.cavity_drift_ghz;
    return m;
}

optimizer::ParameterSpace ExperimentConfig::parameter_space() const {
    return optimizer.parameters.empty() ? optimizer::ParameterSpace::full()
                                        : optimizer::ParameterSpace::slice(optimizer.parameters);
}

optimizer::GaSettings ExperimentConfig::ga_settings() const {
    optimizer::GaSettings g;
    g.population = optimizer.population;
    g.generations = optimizer.generations;
    g.crossover_probability = optimizer.crossover_probability;
    g.crossover_eta = optimizer.crossover_eta;
    g.mutation_probability = optimizer.mutation_probability;
    g.mutation_eta = optimizer.mutation_eta;
    g.noise.relative_sd = optimizer.objective_noise_relative;
    g.seed_with_base = optimizer.seed_with_base;
    return g;
}

optimizer::DriftModel ExperimentConfig::drift_model(bool enabled) const {
    return {enabled, optimizer.drift_rate_ghz_per_generation, optimizer.drift_noise_ghz};
}

AtomicConstants ExperimentConfig::constants() const {
    return resolve_constants(constants_path);
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    Section root(j, "");
    root.get("constants_path", c.constants_path);
    root.get("output_dir", c.output_dir);

    auto a = root.child("atomic");
    a.get("field_mt", c.atomic.field_mt);
    a.get("intermediate_detuning_ghz", c.atomic.intermediate_detuning_ghz);
    a.finish();

    auto cv = root.child("cavity");
    cv.get("r1", c.cavity.r1);
    cv.get("r2", c.cavity.r2);
    cv.get("zeta_rt", c.cavity.zeta_rt);
    cv.get("fsr_ghz", c.cavity.fsr_ghz);
    cv.get("tuning_coeff_ghz_per_c", c.cavity.tuning_coeff_ghz_per_c);
    cv.get("mode_offset_signal_ghz", c.cavity.mode_offset_signal_ghz);
    cv.get("mode_offset_control_ghz", c.cavity.mode_offset_control_ghz);
    cv.finish();

    auto v = root.child("vapour");
    v.get("temperature_c", c.vapour.temperature_c);
    v.get("cell_length_mm", c.vapour.cell_length_mm);
    v.get("optical_depth", c.vapour.optical_depth);
    v.get("field_inhomogeneity_mhz", c.vapour.field_inhomogeneity_mhz);
    v.finish();

    auto m = root.child("memory");
    auto& ms = c.memory;
    m.get("cooperativity", ms.cooperativity);
    m.get("doppler_width_ghz", ms.doppler_width_ghz);
    m.get("polarization_decay_mhz", ms.polarization_decay_mhz);
    m.get("spin_decay_mhz", ms.spin_decay_mhz);
    m.get("dephasing_width_mhz", ms.dephasing_width_mhz);
    m.get("line_splitting_mhz", ms.line_splitting_mhz);
    m.get("amplitude_a", ms.amplitude_a);
    m.get("amplitude_b", ms.amplitude_b);
    m.get("insertion_loss", ms.insertion_loss);
    m.get("rabi_calibration_rad_per_ns", ms.rabi_calibration_rad_per_ns);
    m.get("noise_photons_per_pulse", ms.noise_photons_per_pulse);
    m.get("time_step_ns", ms.time_step_ns);
    m.get("check_convergence", ms.check_convergence);
    m.get("apply_dephasing", ms.apply_dephasing);
    m.get("cavity_drift_ghz", ms.cavity_drift_ghz);
    m.finish();

    auto p = root.child("pulses");
    for (const auto& name : memory::setting_names()) {
        double val = memory::get_setting(c.pulses, name);
        p.get(name.c_str(), val);
        memory::set_setting(c.pulses, name, val);
    }
    p.get("storage_time_ns", c.pulses.storage_time_ns);
    p.get("mean_photon_number", c.pulses.mean_photon_number);
    p.finish();

    auto o = root.child("optimizer");
    auto& os = c.optimizer;
    o.get("population", os.population);
    o.get("generations", os.generations);
    o.get("crossover_probability", os.crossover_probability);
    o.get("crossover_eta", os.crossover_eta);
    o.get("mutation_probability", os.mutation_probability);
    o.get("mutation_eta", os.mutation_eta);
    o.get("objective_noise_relative", os.objective_noise_relative);
    o.get("drift_rate_ghz_per_generation", os.drift_rate_ghz_per_generation);
    o.get("drift_noise_ghz", os.drift_noise_ghz);
    o.get("seed_with_base", os.seed_with_base);
    o.get("parameters", os.parameters);
    o.get("seed", os.seed);
    o.finish();

    root.finish();
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json pulses = json::object();
    for (const auto& name : memory::setting_names()) pulses[name] = memory::get_setting(c.pulses, name);
    pulses["storage_time_ns"] = c.pulses.storage_time_ns;
    pulses["mean_photon_number"] = c.pulses.mean_photon_number;
    const auto& ms = c.memory;
    const auto& os = c.optimizer;
    return {
        {"constants_path", c.constants_path},
        {"output_dir", c.output_dir},
        {"atomic", {{"field_mt", c.atomic.field_mt}, {"intermediate_detuning_ghz", c.atomic.intermediate_detuning_ghz}}},
        {"cavity",
         {{"r1", c.cavity.r1},
          {"r2", c.cavity.r2},
          {"zeta_rt", c.cavity.zeta_rt},
          {"fsr_ghz", c.cavity.fsr_ghz},
          {"tuning_coeff_ghz_per_c", c.cavity.tuning_coeff_ghz_per_c},
          {"mode_offset_signal_ghz", c.cavity.mode_offset_signal_ghz},
          {"mode_offset_control_ghz", c.cavity.mode_offset_control_ghz}}},
        {"vapour",
         {{"temperature_c", c.vapour.temperature_c},
          {"cell_length_mm", c.vapour.cell_length_mm},
          {"optical_depth", optional_json(c.vapour.optical_depth)},
          {"field_inhomogeneity_mhz", optional_json(c.vapour.field_inhomogeneity_mhz)}}},
        {"memory",
         {{"cooperativity", ms.cooperativity},
          {"doppler_width_ghz", optional_json(ms.doppler_width_ghz)},
          {"polarization_decay_mhz", ms.polarization_decay_mhz},
          {"spin_decay_mhz", ms.spin_decay_mhz},
          {"dephasing_width_mhz", ms.dephasing_width_mhz},
          {"line_splitting_mhz", ms.line_splitting_mhz},
          {"amplitude_a", ms.amplitude_a},
          {"amplitude_b", ms.amplitude_b},
          {"insertion_loss", ms.insertion_loss},
          {"rabi_calibration_rad_per_ns", ms.rabi_calibration_rad_per_ns},
          {"noise_photons_per_pulse", ms.noise_photons_per_pulse},
          {"time_step_ns", ms.time_step_ns},
          {"check_convergence", ms.check_convergence},
          {"apply_dephasing", ms.apply_dephasing},
          {"cavity_drift_ghz", ms.cavity_drift_ghz}}},
        {"pulses", pulses},
        {"optimizer",
         {{"population", os.population},
          {"generations", os.generations},
          {"crossover_probability", os.crossover_probability},
          {"crossover_eta", os.crossover_eta},
          {"mutation_probability", os.mutation_probability},
          {"mutation_eta", os.mutation_eta},
          {"objective_noise_relative", os.objective_noise_relative},
          {"drift_rate_ghz_per_generation", os.drift_rate_ghz_per_generation},
          {"drift_noise_ghz", os.drift_noise_ghz},
          {"seed_with_base", os.seed_with_base},
          {"parameters", os.parameters},
          {"seed", os.seed}}},
    };
}

ExperimentConfig load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_text(path), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

} // namespace orca::config
