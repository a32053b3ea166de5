// orca-twin: command-line front end.
//
// Exit codes: 0 success, 2 configuration or argument error, 3 numerical failure.
// Failures print a JSON object {"error": kind, "message": ...} on stderr.

#include "orca/atomic.hpp"
#include "orca/cavity.hpp"
#include "orca/config.hpp"
#include "orca/error.hpp"
#include "orca/estimation.hpp"
#include "orca/io.hpp"
#include "orca/memory.hpp"
#include "orca/optimizer.hpp"
#include "orca/vapour.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace orca;

namespace {

struct Common {
    std::string config_path;
    std::string constants_path;
    std::vector<std::string> overrides;  // section.key=value, value parsed as JSON
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
    if (with_config) {
        cmd->add_option("-c,--config", c.config_path, "experiment configuration (JSON)");
        cmd->add_option("--set", c.overrides, "override a config value, e.g. pulses.write_energy_nj=0.25");
    }
    cmd->add_option("--constants", c.constants_path, "atomic constants file (overrides ORCA_CONSTANTS)");
    cmd->add_option("-o,--out", c.out, "output file (CSV or JSON)");
}

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);  // bare strings
    }
}

struct Context {
    config::ExperimentConfig cfg;
    json cfg_json;
    AtomicConstants constants;
};

Context load_context(const Common& c) {
    json j = json::object();
    if (!c.config_path.empty()) {
        try {
            j = json::parse(io::read_text(c.config_path), nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw ConfigError("'" + c.config_path + "' is not valid JSON: " + e.what());
        }
    }
    for (const auto& o : c.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
        std::string key = o.substr(0, eq);
        json* node = &j;
        std::size_t start = 0;
        for (;;) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                (*node)[part] = parse_value(o.substr(eq + 1));
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    Context ctx;
    ctx.cfg = config::from_json(j);
    if (!c.constants_path.empty()) ctx.cfg.constants_path = c.constants_path;
    ctx.cfg_json = config::to_json(ctx.cfg);
    ctx.constants = ctx.cfg.constants();
    return ctx;
}

fs::path output_path(const Context& ctx, const Common& c, const std::string& fallback) {
    return c.out.empty() ? fs::path(ctx.cfg.output_dir) / fallback : fs::path(c.out);
}

fs::path sidecar(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw ConfigError("point count must be >= 1");
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

std::vector<double> arange(double a, double b, double step) {
    if (!(step > 0.0) || b < a) throw ConfigError("scan range needs from <= to and step > 0");
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) v.push_back(a + i * step);
    return v;
}

json fit_json(const estimation::FitResult& r) {
    json params = json::object();
    for (std::size_t k = 0; k < r.names.size(); ++k) {
        const double u = r.uncertainties[k];
        params[r.names[k]] = {{"value", r.values[k]}, {"uncertainty", std::isfinite(u) ? json(u) : json(nullptr)}};
    }
    return {{"parameters", params},     {"derived", r.derived},
            {"residual_norm", r.residual_norm}, {"gradient_norm", r.gradient_norm},
            {"converged", r.converged}, {"singular", r.singular},
            {"iterations", r.iterations}, {"flags", r.flags}};
}

json summary_json(const memory::SimulationResult& r) {
    return {{"input_photons", r.input_photons},
            {"reference_counts", r.reference_counts},
            {"leak_counts", r.leak_counts},
            {"retrieved_counts", r.retrieved_counts},
            {"internal_efficiency", r.internal_efficiency},
            {"total_efficiency", r.total_efficiency},
            {"objective", r.objective},
            {"snr_db", r.snr_db ? json(*r.snr_db) : json(nullptr)},
            {"polarization_loss", r.polarization_loss},
            {"dephasing_loss", r.dephasing_loss},
            {"residual_excitation", r.residual_excitation},
            {"leak_window_end_ns", r.leak_window_end_ns}};
}

json with_provenance(json body, const Context& ctx) {
    body["provenance"] = io::provenance(ctx.cfg_json);
    return body;
}

void report(const fs::path& p) { std::cout << json{{"written", p.string()}}.dump() << '\n'; }

// --- levels ---------------------------------------------------------------

struct LevelsArgs {
    Common common;
    std::vector<double> field{0.0, 300.0};
    int points = 301;
    std::vector<std::string> manifolds;
};

int cmd_levels(const LevelsArgs& a) {
    Context ctx = load_context(a.common);
    if (a.field.size() != 2) throw ConfigError("--field expects two values: min max");
    if (a.field[0] < 0.0 || a.field[1] < a.field[0]) throw ConfigError("--field needs 0 <= min <= max");
    const auto fields = a.field[0] == a.field[1] ? std::vector<double>{a.field[0]} : linspace(a.field[0], a.field[1], a.points);
    std::vector<std::string> names = a.manifolds;
    if (names.empty()) names = {ctx.constants.ground.label, ctx.constants.intermediate.label, ctx.constants.upper.label};
    io::Table t;
    t.columns.push_back("field_mt");
    std::vector<atomic::BreitRabiTable> tables;
    json meta = json::array();
    for (const auto& n : names) {
        tables.push_back(atomic::breit_rabi_curve(ctx.constants.manifold(n), fields, ctx.constants.bohr_magneton_mhz_per_mt));
        const auto& tb = tables.back();
        for (int idx : tb.indices) t.columns.push_back("level_" + std::to_string(idx) + "_mhz");
        meta.push_back({{"manifold", n},
                        {"first_index", tb.indices.front()},
                        {"last_index", tb.indices.back()},
                        {"discontinuities", tb.discontinuities.size()}});
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
        std::vector<double> row{fields[f]};
        for (const auto& tb : tables)
            for (const auto& e : tb.energies_mhz) row.push_back(e[f]);
        t.add_row(std::move(row));
    }
    const auto path = output_path(ctx, a.common, "levels.csv");
    io::write_csv(path, t);
    io::write_json(sidecar(path), with_provenance({{"manifolds", meta}, {"states", t.columns.size() - 1}}, ctx));
    report(path);
    return 0;
}

// --- spectrum -------------------------------------------------------------

struct SpectrumArgs {
    Common common;
    bool one_photon = false, two_photon = false;
    double from = 0.0, to = 0.0;
    int points = 2001;
    std::string signal_pol = "sigma-", control_pol = "sigma-";
};

int cmd_spectrum(const SpectrumArgs& a) {
    Context ctx = load_context(a.common);
    const auto& c = ctx.cfg;
    const auto sp = atomic::parse_polarization(a.signal_pol);
    io::Table t;
    json meta;
    fs::path path;
    if (a.one_photon) {
        const double lo = a.from == a.to ? -15.0 : a.from, hi = a.from == a.to ? 15.0 : a.to;
        const auto det = linspace(lo, hi, a.points);
        const auto tr = vapour::one_photon_spectrum(c.vapour, ctx.constants, c.atomic.field_mt, sp, det);
        t.columns = {"detuning_ghz", "transmission"};
        for (std::size_t i = 0; i < det.size(); ++i) t.add_row(std::vector<double>{det[i], tr[i]});
        meta = {{"kind", "one_photon"},
                {"field_mt", c.atomic.field_mt},
                {"polarization", a.signal_pol},
                {"optical_depth", vapour::effective_optical_depth(c.vapour)},
                {"doppler_fwhm_ghz",
                 vapour::doppler_width(c.vapour.temperature_c, ctx.constants.signal_wavelength_nm, ctx.constants.mass_amu).ghz()}};
        path = output_path(ctx, a.common, "spectrum_one_photon.csv");
    } else {
        const auto cp = atomic::parse_polarization(a.control_pol);
        const auto mem = atomic::memory_line(ctx.constants, c.atomic.field_mt, c.atomic.intermediate_detuning_ghz);
        const double lo = a.from == a.to ? mem.control_detuning_ghz - 0.5 : a.from;
        const double hi = a.from == a.to ? mem.control_detuning_ghz + 0.5 : a.to;
        const auto det = linspace(lo, hi, a.points);
        vapour::TwoPhotonOptions opt;
        opt.signal_detuning_ghz = mem.signal_detuning_ghz;
        const auto s = vapour::two_photon_spectrum(c.vapour, ctx.constants, c.atomic.field_mt, sp, cp, det, opt);
        t.columns = {"control_detuning_ghz", "transmission"};
        for (std::size_t i = 0; i < det.size(); ++i) t.add_row(std::vector<double>{det[i], s.transmission[i]});
        json lines = json::array();
        double smax = 0.0;
        for (const auto& l : s.lines) smax = std::max(smax, l.strength);
        for (const auto& l : s.lines)
            lines.push_back({{"ground", l.ground},
                             {"intermediate", l.intermediate},
                             {"doubly_excited", l.doubly_excited},
                             {"control_detuning_ghz", l.control_detuning_ghz},
                             {"strength", l.strength},
                             {"relative_strength", smax > 0.0 ? l.strength / smax : 0.0}});
        meta = {{"kind", "two_photon"},
                {"field_mt", c.atomic.field_mt},
                {"signal_detuning_ghz", opt.signal_detuning_ghz},
                {"signal_polarization", a.signal_pol},
                {"control_polarization", a.control_pol},
                {"line_fwhm_mhz", s.line_fwhm_mhz},
                {"near_one_photon_resonance", s.near_one_photon_resonance},
                {"lines", lines}};
        path = output_path(ctx, a.common, "spectrum_two_photon.csv");
    }
    io::write_csv(path, t);
    io::write_json(sidecar(path), with_provenance(meta, ctx));
    report(path);
    return 0;
}

// --- cavity ---------------------------------------------------------------

struct CavityArgs {
    Common common;
    bool scan = false, resmap = false;
    double span_ghz = 20.0;
    int points = 4001;
    double temperature_offset_c = 0.0;
};

int cmd_cavity(const CavityArgs& a) {
    Context ctx = load_context(a.common);
    const auto& p = ctx.cfg.cavity;
    io::Table t;
    json summary = {{"finesse", cavity::finesse(p)},
                    {"linewidth_ghz", cavity::linewidth_ghz(p)},
                    {"zeta_rt", p.zeta_rt},
                    {"fsr_ghz", p.fsr_ghz},
                    {"insertion_loss", cavity::insertion_loss(p)},
                    {"insertion_loss_db", cavity::insertion_loss_db(p)}};
    fs::path path;
    if (a.resmap) {
        const auto grid = linspace(-a.span_ghz, a.span_ghz, std::min(a.points, 801));
        const auto m = cavity::dual_resonance_map(p, grid, grid, a.temperature_offset_c);
        t.columns = {"signal_ghz", "control_ghz", "buildup_product"};
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t k = 0; k < grid.size(); ++k) t.add_row(std::vector<double>{grid[i], grid[k], m.value[i][k]});
        json spots = json::array();
        for (const auto& s : m.on_line) spots.push_back({{"signal_ghz", s.signal_ghz}, {"control_ghz", s.control_ghz}});
        summary["dual_resonant_pairs"] = spots;
        summary["resonance_spots"] = m.spots.size();
        summary["temperature_offset_c"] = a.temperature_offset_c;
        path = output_path(ctx, a.common, "cavity_resmap.csv");
    } else {
        const auto det = linspace(-a.span_ghz, a.span_ghz, a.points);
        const auto r = cavity::reflection_response(p, det);
        t.columns = {"detuning_ghz", "reflection", "transmission", "reflection_phase_rad"};
        for (std::size_t i = 0; i < det.size(); ++i)
            t.add_row(std::vector<double>{det[i], std::norm(r.reflection[i]), std::norm(r.transmission[i]),
                                          std::arg(r.reflection[i])});
        path = output_path(ctx, a.common, "cavity_scan.csv");
    }
    io::write_csv(path, t);
    io::write_json(sidecar(path), with_provenance(summary, ctx));
    report(path);
    return 0;
}

// --- store ----------------------------------------------------------------

struct StoreArgs {
    Common common;
    bool control_off = false;
};

int cmd_store(const StoreArgs& a) {
    Context ctx = load_context(a.common);
    auto mc = ctx.cfg.memory_config(ctx.constants);
    auto s = ctx.cfg.pulses;
    if (a.control_off) s.write_energy_nj = 0.0;
    const auto r = memory::simulate(mc, s);
    io::Table t;
    t.columns = {"time_ns", "output_flux_per_ns", "reference_flux_per_ns"};
    for (std::size_t i = 0; i < r.time_ns.size(); ++i) t.add_row(std::vector<double>{r.time_ns[i], r.output_flux[i], r.reference_flux[i]});
    const auto path = output_path(ctx, a.common, "store.csv");
    io::write_csv(path, t);
    io::write_json(sidecar(path), with_provenance(summary_json(r), ctx));
    report(path);
    return 0;
}

// --- scan -----------------------------------------------------------------

struct ScanArgs {
    Common common;
    bool lifetime = false, energy = false, bandwidth = false;
    std::optional<double> from, to, step;
    int evaluations = 300;
};

int cmd_scan(const ScanArgs& a) {
    Context ctx = load_context(a.common);
    const auto mc = ctx.cfg.memory_config(ctx.constants);
    const auto& s = ctx.cfg.pulses;
    io::Table t;
    fs::path path;
    json meta = json::object();
    if (a.lifetime) {
        const auto grid = arange(a.from.value_or(0.0), a.to.value_or(80.0), a.step.value_or(0.5));
        const auto rs = memory::lifetime_scan(mc, s, grid);
        t.columns = {"storage_time_ns", "internal_efficiency", "total_efficiency", "model_efficiency"};
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.add_row(std::vector<double>{grid[i], rs[i].internal_efficiency, rs[i].total_efficiency, memory::lifetime_model(grid[i], mc)});
        path = output_path(ctx, a.common, "scan_lifetime.csv");
    } else if (a.energy) {
        const auto grid = arange(a.from.value_or(0.02), a.to.value_or(0.6), a.step.value_or(0.02));
        const auto rs = memory::energy_scan(mc, s, grid);
        t.columns = {"write_energy_nj", "internal_efficiency", "total_efficiency"};
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.add_row(std::vector<double>{grid[i], rs[i].internal_efficiency, rs[i].total_efficiency});
        path = output_path(ctx, a.common, "scan_energy.csv");
    } else {
        const auto grid = arange(a.from.value_or(1.0), a.to.value_or(3.5), a.step.value_or(0.5));
        const auto rs = memory::bandwidth_scan(mc, s, grid, a.evaluations);
        t.columns = {"signal_fwhm_ns", "internal_efficiency", "total_efficiency"};
        json settings = json::array();
        for (const auto& p : rs) {
            t.add_row(std::vector<double>{p.signal_fwhm_ns, p.result.internal_efficiency, p.result.total_efficiency});
            json js = json::object();
            for (const auto& n : memory::setting_names()) js[n] = memory::get_setting(p.settings, n);
            settings.push_back(js);
        }
        meta["optimized_settings"] = settings;
        path = output_path(ctx, a.common, "scan_bandwidth.csv");
    }
    io::write_csv(path, t);
    io::write_json(sidecar(path), with_provenance(meta, ctx));
    report(path);
    return 0;
}

// --- optimize -------------------------------------------------------------

struct OptimizeArgs {
    Common common;
    std::optional<std::uint64_t> seed;
    std::string drift = "off";
    std::optional<int> generations;
};

int cmd_optimize(const OptimizeArgs& a) {
    Context ctx = load_context(a.common);
    const auto mc = ctx.cfg.memory_config(ctx.constants);
    auto ga = ctx.cfg.ga_settings();
    if (a.generations) ga.generations = *a.generations;
    const auto space = ctx.cfg.parameter_space();
    const std::uint64_t seed = a.seed.value_or(ctx.cfg.optimizer.seed);
    const auto trace = optimizer::run_ga(space, ctx.cfg.pulses, mc, ctx.cfg.drift_model(a.drift == "on"), ga, seed);
    io::Table t;
    t.columns.push_back("generation");
    for (const auto& p : space.params) t.columns.push_back(p.name);
    for (const char* c : {"best_objective", "mean_objective", "best_so_far", "drift_offset_ghz", "evaluations", "faults"})
        t.columns.push_back(c);
    for (const auto& r : trace.records) {
        std::vector<double> row{static_cast<double>(r.generation)};
        row.insert(row.end(), r.best_parameters.begin(), r.best_parameters.end());
        row.insert(row.end(), {r.best_objective, r.mean_objective, r.best_so_far, r.drift_offset_ghz,
                               static_cast<double>(r.evaluations), static_cast<double>(r.faults)});
        t.add_row(std::move(row));
    }
    const auto path = output_path(ctx, a.common, "optimize_trace.csv");
    io::write_csv(path, t);
    json params = json::array();
    for (const auto& p : space.params)
        params.push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}, {"resolution", p.resolution}});
    io::write_json(sidecar(path), with_provenance({{"seed", seed},
                                                   {"drift", a.drift == "on"},
                                                   {"population", ga.population},
                                                   {"generations", ga.generations},
                                                   {"crossover_probability", ga.crossover_probability},
                                                   {"crossover_eta", ga.crossover_eta},
                                                   {"mutation_probability", ga.mutation_probability},
                                                   {"mutation_eta", ga.mutation_eta},
                                                   {"parameters", params}},
                                                  ctx));
    report(path);
    return 0;
}

// --- fit ------------------------------------------------------------------

struct FitArgs {
    Common common;
    std::string model;
    std::string data;
    std::string x_column, y_column;
};

int cmd_fit(const FitArgs& a) {
    Context ctx = load_context(a.common);
    const auto table = io::read_csv(a.data);
    if (table.columns.size() < 2) throw ConfigError("fit data need at least two columns");
    const auto x = a.x_column.empty() ? table.column(std::size_t{0}) : table.column(a.x_column);
    const auto y = a.y_column.empty() ? table.column(std::size_t{1}) : table.column(a.y_column);
    estimation::FitResult r;
    if (a.model == "cavity") {
        r = estimation::fit_cavity_reflection(x, y, ctx.cfg.cavity.r1, ctx.cfg.cavity.r2);
    } else if (a.model == "doppler") {
        estimation::DopplerFitSetup setup;
        setup.vapour = ctx.cfg.vapour;
        r = estimation::fit_doppler_absorption(x, y, ctx.constants, setup);
    } else if (a.model == "lifetime") {
        r = estimation::fit_lifetime(x, y, ctx.cfg.memory_config(ctx.constants).spin_decay.rad_per_ns());
    } else {
        r = estimation::fit_gaussian_line(x, y);
    }
    json out = with_provenance(fit_json(r), ctx);
    out["model"] = a.model;
    out["data"] = a.data;
    if (a.common.out.empty()) {
        std::cout << out.dump(2) << '\n';
    } else {
        io::write_json(a.common.out, out);
        report(a.common.out);
    }
    return 0;
}

int fail(const char* kind, const std::string& msg, int code) {
    std::cerr << json{{"error", kind}, {"message", msg}}.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital twin of a cavity-enhanced ladder-type vapour memory"};
    app.set_version_flag("--version", io::version());
    app.require_subcommand(1);

    LevelsArgs levels;
    auto* c_levels = app.add_subcommand("levels", "Breit-Rabi energy traces");
    add_common(c_levels, levels.common);
    c_levels->add_option("--field", levels.field, "field range in mT: min max")->expected(2);
    c_levels->add_option("--points", levels.points, "field samples");
    c_levels->add_option("--manifolds", levels.manifolds, "manifold labels, e.g. 5S1/2 5P3/2");

    SpectrumArgs spectrum;
    auto* c_spec = app.add_subcommand("spectrum", "one- or two-photon absorption spectrum");
    add_common(c_spec, spectrum.common);
    auto* g1 = c_spec->add_flag("--one-photon", spectrum.one_photon, "signal transmission vs signal detuning");
    auto* g2 = c_spec->add_flag("--two-photon", spectrum.two_photon, "signal transmission vs control detuning");
    g1->excludes(g2);
    c_spec->add_option("--from", spectrum.from, "scan start, GHz");
    c_spec->add_option("--to", spectrum.to, "scan end, GHz");
    c_spec->add_option("--points", spectrum.points, "samples");
    c_spec->add_option("--signal-pol", spectrum.signal_pol, "sigma+, sigma- or pi");
    c_spec->add_option("--control-pol", spectrum.control_pol, "sigma+, sigma- or pi");

    CavityArgs cav;
    auto* c_cav = app.add_subcommand("cavity", "cavity reflection scan or dual-resonance map");
    add_common(c_cav, cav.common);
    auto* s1 = c_cav->add_flag("--scan", cav.scan, "reflection and transmission vs detuning");
    auto* s2 = c_cav->add_flag("--resmap", cav.resmap, "dual-resonance map");
    s1->excludes(s2);
    c_cav->add_option("--span", cav.span_ghz, "half span, GHz");
    c_cav->add_option("--points", cav.points, "samples per axis");
    c_cav->add_option("--temperature-offset", cav.temperature_offset_c, "cavity temperature offset, C");

    StoreArgs store;
    auto* c_store = app.add_subcommand("store", "one reference plus storage-and-retrieval run");
    add_common(c_store, store.common);
    c_store->add_flag("--control-off", store.control_off, "zero control energy");

    ScanArgs scan;
    auto* c_scan = app.add_subcommand("scan", "lifetime, energy or bandwidth scan");
    add_common(c_scan, scan.common);
    auto* l = c_scan->add_flag("--lifetime", scan.lifetime, "efficiency vs storage time");
    auto* e = c_scan->add_flag("--energy", scan.energy, "efficiency vs write energy");
    auto* b = c_scan->add_flag("--bandwidth", scan.bandwidth, "efficiency vs signal width");
    l->excludes(e)->excludes(b);
    e->excludes(b);
    c_scan->add_option("--from", scan.from, "grid start");
    c_scan->add_option("--to", scan.to, "grid end");
    c_scan->add_option("--step", scan.step, "grid step");
    c_scan->add_option("--evaluations", scan.evaluations, "optimizer budget per bandwidth point");

    OptimizeArgs opt;
    auto* c_opt = app.add_subcommand("optimize", "genetic optimization of the pulse settings");
    add_common(c_opt, opt.common);
    c_opt->add_option("--seed", opt.seed, "random seed (default from config)");
    c_opt->add_option("--drift", opt.drift, "cavity drift on|off")->check(CLI::IsMember({"on", "off"}));
    c_opt->add_option("--generations", opt.generations, "generation count");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "fit a model to two-column CSV data");
    add_common(c_fit, fit.common);
    c_fit->add_option("--model", fit.model, "cavity|doppler|lifetime|line")
        ->required()
        ->check(CLI::IsMember({"cavity", "doppler", "lifetime", "line"}));
    c_fit->add_option("data", fit.data, "CSV file")->required();
    c_fit->add_option("--x", fit.x_column, "abscissa column (default: first)");
    c_fit->add_option("--y", fit.y_column, "ordinate column (default: second)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (*c_levels) return cmd_levels(levels);
        if (*c_spec) {
            if (!spectrum.one_photon && !spectrum.two_photon) throw ConfigError("choose --one-photon or --two-photon");
            return cmd_spectrum(spectrum);
        }
        if (*c_cav) return cmd_cavity(cav);
        if (*c_store) return cmd_store(store);
        if (*c_scan) {
            if (!scan.lifetime && !scan.energy && !scan.bandwidth)
                throw ConfigError("choose --lifetime, --energy or --bandwidth");
            return cmd_scan(scan);
        }
        if (*c_opt) return cmd_optimize(opt);
        if (*c_fit) return cmd_fit(fit);
    } catch (const NumericalError& e) {
        return fail(e.kind(), e.what(), 3);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const std::filesystem::filesystem_error& e) {
        return fail("io", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 3);
    }
    return 2;
}
