// orca-calibrate: one-time calibration of the control Rabi scale.
//
// The optimal write pulse depends on its area, so E_opt * cal^2 is fixed.
// Optimize the control settings once at a trial scale, then rescale so the
// optimum write energy lands on the target. Prints the new scale, the
// optimized settings and an energy scan around the target as JSON.

#include "orca/config.hpp"
#include "orca/error.hpp"
#include "orca/io.hpp"
#include "orca/memory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>

using namespace orca;
using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the control Rabi scale against a target optimum write energy"};
    std::string config_path;
    double target_nj = 0.2;
    int evaluations = 600;
    app.add_option("-c,--config", config_path, "experiment configuration (JSON)");
    app.add_option("--target", target_nj, "write energy of the optimum, nJ");
    app.add_option("--evaluations", evaluations, "optimizer budget");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = config_path.empty() ? config::from_json(json::object()) : config::load(config_path);
        auto mc = cfg.memory_config(cfg.constants());
        const double trial = mc.rabi_calibration;

        // Starting guess: pulse areas that map the signal into the spin wave.
        memory::PulseSettings s = cfg.pulses;
        s.control_detuning_ghz = -cfg.atomic.intermediate_detuning_ghz;
        s.write_energy_nj = std::pow(3.43 / trial, 2) * s.write_fwhm_ns;
        s.read_fwhm_ns = 1.0;
        s.read_write_ratio = std::pow(23.7 / trial, 2) / s.write_energy_nj;
        std::vector<memory::PulseSettings> starts{s, cfg.pulses};
        auto [best, eff] = memory::optimize_internal(mc, starts, evaluations);

        const double cal = trial * std::sqrt(best.write_energy_nj / target_nj);
        mc.rabi_calibration = cal;
        best.write_energy_nj = target_nj;

        std::vector<double> grid;
        for (int k = -10; k <= 10; ++k) grid.push_back(target_nj * (1.0 + 0.05 * k));
        const auto scan = memory::energy_scan(mc, best, grid);
        json energies = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i)
            energies.push_back({{"write_energy_nj", grid[i]}, {"internal_efficiency", scan[i].internal_efficiency}});

        json settings = json::object();
        for (const auto& n : memory::setting_names()) settings[n] = memory::get_setting(best, n);
        std::cout << json{{"rabi_calibration_rad_per_ns", cal},
                          {"internal_efficiency", eff},
                          {"settings", settings},
                          {"energy_scan", energies},
                          {"version", io::version()}}
                         .dump(2)
                  << '\n';
    } catch (const NumericalError& e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}
