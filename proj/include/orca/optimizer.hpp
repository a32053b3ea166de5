#pragma once

#include "orca/memory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace orca::optimizer {

struct ParameterSpec {
    std::string name;  // a memory::PulseSettings field name
    double min = 0.0;
    double max = 1.0;
    double resolution = 0.0;  // 0 = continuous
};

struct ParameterSpace {
    std::vector<ParameterSpec> params;

    void validate() const;
    std::size_t size() const { return params.size(); }
    // All eight pulse settings with their default bounds.
    static ParameterSpace full();
    // Subset of full() in the given order.
    static ParameterSpace slice(const std::vector<std::string>& names);
    // Snap to the resolution grid and clamp into bounds.
    std::vector<double> quantize(std::vector<double> x) const;
    bool contains(const std::vector<double>& x) const;
    memory::PulseSettings apply(const memory::PulseSettings& base, const std::vector<double>& x) const;
    std::vector<double> extract(const memory::PulseSettings& s) const;
};

struct DriftModel {
    bool enabled = false;
    double drift_rate_ghz = 0.012;  // per generation
    double noise_sd_ghz = 0.02;     // seeded Gaussian jitter per generation
};

struct ObjectiveNoise {
    double relative_sd = 0.0;  // multiplicative shot-noise jitter; 0 = deterministic
};

// C_ret / C_ref with both resonance combs shifted by drift_offset_ghz.
// Failed simulations score 0 and increment *faults when given.
double objective(const ParameterSpace& space, const std::vector<double>& x, const memory::PulseSettings& base,
                 const memory::MemoryConfig& config, double drift_offset_ghz, int* faults = nullptr);

struct GaSettings {
    int population = 24;
    int generations = 60;
    double crossover_probability = 0.9;
    double crossover_eta = 15.0;       // SBX distribution index
    double mutation_probability = -1;  // per gene; negative = 1 / dimension
    double mutation_eta = 20.0;        // polynomial mutation index
    ObjectiveNoise noise;
    unsigned threads = 0;  // 0 = hardware concurrency
    bool seed_with_base = true;  // first member = base settings, rest uniform random
    // Optional explicit starting population (each inside the space).
    std::vector<std::vector<double>> initial_population;

    void validate() const;
};

struct TraceRecord {
    int generation = 0;
    std::vector<double> best_parameters;  // best of this generation
    double best_objective = 0.0;
    double mean_objective = 0.0;
    double best_so_far = 0.0;
    double drift_offset_ghz = 0.0;
    int evaluations = 0;
    int faults = 0;
};

struct OptimizationTrace {
    std::uint64_t seed = 0;
    GaSettings settings;
    DriftModel drift;
    ParameterSpace space;
    std::vector<TraceRecord> records;
    std::vector<std::vector<double>> final_population;
    std::vector<double> final_objectives;
};

// Maximizing sort: rank 0 holds individuals no other dominates.
std::vector<int> non_dominated_rank(const std::vector<std::vector<double>>& objectives);
// Crowding distance inside one front (indices into objectives); boundary points get +inf.
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& objectives,
                                      const std::vector<std::size_t>& front);

double drift_offset(const DriftModel& d, std::uint64_t seed, int generation);

OptimizationTrace run_ga(const ParameterSpace& space, const memory::PulseSettings& base,
                         const memory::MemoryConfig& config, const DriftModel& drift, const GaSettings& ga,
                         std::uint64_t seed);

struct GridResult {
    ParameterSpace space;
    std::vector<std::vector<double>> axes;
    std::vector<double> values;  // row-major over axes (last axis fastest)
    std::vector<double> best_point;
    double best_value = 0.0;
};

// Exhaustive search over at most two parameters with `points` samples per axis
// (a single-point axis when min == max).
GridResult grid_search(const ParameterSpace& space, const memory::PulseSettings& base,
                       const memory::MemoryConfig& config, int points = 50, unsigned threads = 0);

} // namespace orca::optimizer
