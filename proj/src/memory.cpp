#include "orca/memory.hpp"

#include "orca/error.hpp"
#include "orca/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

namespace orca::memory {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
const double kLn2 = std::log(2.0);

double wrap_to_fsr(double x, double fsr) {
    double y = std::fmod(x, fsr);
    if (y > 0.5 * fsr) y -= fsr;
    if (y <= -0.5 * fsr) y += fsr;
    return y;
}

// Normalized Gaussian photon-flux profile with intensity FWHM `fwhm`.
double flux_profile(double t, const PulseShape& p) {
    const double x = t - p.center_ns;
    return 2.0 * std::sqrt(kLn2 / std::numbers::pi) / p.fwhm_ns * std::exp(-4.0 * kLn2 * x * x / (p.fwhm_ns * p.fwhm_ns));
}

// Field envelope whose square has the pulse's intensity FWHM.
double field_envelope(double t, const PulseShape& p) {
    const double x = t - p.center_ns;
    return std::exp(-2.0 * kLn2 * x * x / (p.fwhm_ns * p.fwhm_ns));
}

struct Rates {
    double kappa, sqrt_kappa, g, cavity_detuning, gamma_e, delta, delta2;
    double omega_w, omega_r;
    cd phase_w, phase_r, phase_s;
};

struct State {
    cd a, p, s;
    double out, ploss, in;
};

struct Deriv {
    cd da, dp, ds;
    double dout, dploss, din;
};

class Integrator {
public:
    Integrator(const Rates& r, const PulseShape& sig, const PulseShape& w, const PulseShape& rd)
        : r_(r), sig_(sig), w_(w), rd_(rd) {}

    cd input(double t) const { return std::sqrt(sig_.energy * flux_profile(t, sig_)) * r_.phase_s; }

    cd control(double t) const {
        return r_.omega_w * field_envelope(t, w_) * r_.phase_w + r_.omega_r * field_envelope(t, rd_) * r_.phase_r;
    }

    cd output(double t, const State& y) const { return input(t) - r_.sqrt_kappa * y.a; }

    Deriv f(double t, const State& y) const {
        const cd ain = input(t);
        const cd om = control(t);
        const cd aout = ain - r_.sqrt_kappa * y.a;
        Deriv d;
        d.da = -(0.5 * r_.kappa + kI * r_.cavity_detuning) * y.a - kI * r_.g * y.p + r_.sqrt_kappa * ain;
        d.dp = -(0.5 * r_.gamma_e - kI * r_.delta) * y.p - kI * r_.g * y.a - kI * 0.5 * om * y.s;
        d.ds = kI * r_.delta2 * y.s - kI * 0.5 * std::conj(om) * y.p;
        d.dout = std::norm(aout);
        d.dploss = r_.gamma_e * std::norm(y.p);
        d.din = std::norm(ain);
        return d;
    }

    static State axpy(const State& y, double h, const Deriv& k) {
        return {y.a + h * k.da, y.p + h * k.dp, y.s + h * k.ds, y.out + h * k.dout, y.ploss + h * k.dploss,
                y.in + h * k.din};
    }

    State step(double t, const State& y, double h) const {
        const Deriv k1 = f(t, y);
        const Deriv k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const Deriv k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const Deriv k4 = f(t + h, axpy(y, h, k3));
        const double c = h / 6.0;
        return {y.a + c * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da),
                y.p + c * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp),
                y.s + c * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds),
                y.out + c * (k1.dout + 2.0 * k2.dout + 2.0 * k3.dout + k4.dout),
                y.ploss + c * (k1.dploss + 2.0 * k2.dploss + 2.0 * k3.dploss + k4.dploss),
                y.in + c * (k1.din + 2.0 * k2.din + 2.0 * k3.din + k4.din)};
    }

private:
    Rates r_;
    PulseShape sig_, w_, rd_;
};

struct RunOutput {
    double input = 0.0, leak = 0.0, retrieved = 0.0, ploss = 0.0, dephasing = 0.0, residual = 0.0;
    std::vector<double> time, flux;
};

cd storage_kernel(const MemoryConfig& c, double tau) {
    if (!c.apply_dephasing) return 1.0;
    const double nu = 1e-3 * c.dephasing_width_mhz;  // GHz = 1/ns
    const double env = std::exp(-0.5 * c.spin_decay.rad_per_ns() * tau) *
                       std::exp(-std::numbers::pi * std::numbers::pi * nu * nu * tau * tau / (8.0 * kLn2));
    const double ab = c.amplitude_a + c.amplitude_b;
    if (ab <= 0.0) return 0.0;
    return env * (c.amplitude_a + c.amplitude_b * std::polar(1.0, c.line_splitting.rad_per_ns() * tau)) / ab;
}

Rates make_rates(const MemoryConfig& c, const PulseShape& sig, const PulseShape& w, const PulseShape& rd) {
    Rates r{};
    const double lw = cavity::linewidth_ghz(c.cavity);
    r.kappa = kTwoPi * lw;
    r.sqrt_kappa = std::sqrt(r.kappa);
    r.g = coupling_constant(c);
    r.gamma_e = c.polarization_decay.rad_per_ns();
    const double delta_ghz = c.intermediate_detuning_ghz + sig.carrier_detuning_ghz;
    r.delta = kTwoPi * delta_ghz;
    const double pull = -r.g * r.g * r.delta / (r.delta * r.delta + 0.25 * r.gamma_e * r.gamma_e);
    const double sig_off =
        wrap_to_fsr(delta_ghz - (c.cavity.mode_offset_signal_ghz + c.cavity_drift_ghz), c.cavity.fsr_ghz);
    r.cavity_detuning = pull + kTwoPi * sig_off;
    r.delta2 = kTwoPi * (delta_ghz + w.carrier_detuning_ghz);
    r.omega_w = peak_rabi(c, w);
    r.omega_r = peak_rabi(c, rd);
    r.phase_w = std::polar(1.0, w.phase_rad);
    r.phase_r = std::polar(1.0, rd.phase_rad);
    r.phase_s = std::polar(1.0, sig.phase_rad);
    return r;
}

RunOutput integrate(const MemoryConfig& c, const PulseShape& sig, const PulseShape& w, const PulseShape& rd,
                    double dt, bool record, bool control_on) {
    PulseShape wr = w, rr = rd;
    if (!control_on) wr.energy = rr.energy = 0.0;
    const Integrator in(make_rates(c, sig, wr, rr), sig, wr, rr);
    const cd kernel = storage_kernel(c, rd.center_ns - w.center_ns);

    const double t_mid = 0.5 * (w.center_ns + rd.center_ns);
    const double t_begin = std::min({sig.center_ns - 4.0 * sig.fwhm_ns, w.center_ns - 4.0 * w.fwhm_ns}) - 1.0;
    const double ring = 20.0 / (kTwoPi * cavity::linewidth_ghz(c.cavity));
    const double t_end = std::max(rd.center_ns + 4.0 * rd.fwhm_ns, sig.center_ns + 4.0 * sig.fwhm_ns) + ring + 2.0;
    const long n_pre = static_cast<long>(std::ceil((t_mid - t_begin) / dt));
    const long n_post = static_cast<long>(std::ceil((t_end - t_mid) / dt));
    const double t0 = t_mid - n_pre * dt;

    RunOutput o;
    if (record) {
        o.time.reserve(n_pre + n_post + 1);
        o.flux.reserve(n_pre + n_post + 1);
    }
    State y{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    for (long k = 0; k < n_pre + n_post; ++k) {
        const double t = t0 + k * dt;
        if (record) {
            o.time.push_back(t);
            o.flux.push_back(std::norm(in.output(t, y)));
        }
        if (k == n_pre) {
            o.leak = y.out;
            const double before = std::norm(y.s);
            y.s *= kernel;
            o.dephasing = before - std::norm(y.s);
        }
        y = in.step(t, y, dt);
    }
    const double t_last = t0 + (n_pre + n_post) * dt;
    if (record) {
        o.time.push_back(t_last);
        o.flux.push_back(std::norm(in.output(t_last, y)));
    }
    o.input = y.in;
    o.retrieved = y.out - o.leak;
    o.ploss = y.ploss;
    o.residual = std::norm(y.a) + std::norm(y.p) + std::norm(y.s);
    return o;
}

void validate_sequence(const PulseShape& sig, const PulseShape& w, const PulseShape& rd) {
    sig.validate("signal");
    w.validate("write");
    rd.validate("read");
    if (w.carrier_detuning_ghz != rd.carrier_detuning_ghz)
        throw DomainError("write and read pulses must share the control carrier detuning");
    const double w_end = w.center_ns + 1.5 * w.fwhm_ns;
    const double r_begin = rd.center_ns - 1.5 * rd.fwhm_ns;
    if (!(w_end <= r_begin)) {
        std::ostringstream os;
        os << "write window (ends " << w_end << " ns) overlaps read window (starts " << r_begin << " ns)";
        throw DomainError(os.str());
    }
    const double t_mid = 0.5 * (w.center_ns + rd.center_ns);
    if (!(sig.center_ns + 1.5 * sig.fwhm_ns <= t_mid)) {
        std::ostringstream os;
        os << "signal pulse extends past the end of the leak window (" << t_mid << " ns)";
        throw DomainError(os.str());
    }
}

} // namespace

void PulseShape::validate(const std::string& what) const {
    if (!(fwhm_ns > 0.0)) throw DomainError(what + " pulse: fwhm must be > 0");
    if (!(energy >= 0.0)) throw DomainError(what + " pulse: energy must be >= 0");
    if (!std::isfinite(center_ns) || !std::isfinite(carrier_detuning_ghz) || !std::isfinite(phase_rad))
        throw DomainError(what + " pulse: non-finite field");
}

void MemoryConfig::validate() const {
    cavity.validate();
    if (!(cooperativity >= 0.0)) throw DomainError("memory: cooperativity must be >= 0");
    if (!(insertion_loss >= 0.0 && insertion_loss < 1.0)) throw DomainError("memory: insertion loss must lie in [0, 1)");
    if (!(amplitude_a >= 0.0 && amplitude_b >= 0.0)) throw DomainError("memory: line amplitudes must be >= 0");
    if (!(doppler_width.rad_per_ns() > 0.0)) throw DomainError("memory: Doppler width must be > 0");
    if (!(polarization_decay.rad_per_ns() > 0.0)) throw DomainError("memory: polarization decay must be > 0");
    if (!(spin_decay.rad_per_ns() >= 0.0)) throw DomainError("memory: spin decay must be >= 0");
    if (!(dephasing_width_mhz >= 0.0)) throw DomainError("memory: dephasing width must be >= 0");
    if (!(rabi_calibration >= 0.0)) throw DomainError("memory: rabi calibration must be >= 0");
    if (!(noise_rate >= 0.0)) throw DomainError("memory: noise rate must be >= 0");
    if (!(time_step_ns > 0.0 && time_step_ns <= 0.05)) throw DomainError("memory: time step must lie in (0, 0.05] ns");
}

double coupling_constant(const MemoryConfig& c) {
    const double kappa = kTwoPi * cavity::linewidth_ghz(c.cavity);
    const double gd = c.doppler_width.rad_per_ns();
    return std::sqrt(c.cooperativity * kappa * gd / (8.0 * std::numbers::pi * std::sqrt(std::numbers::pi * kLn2)));
}

double peak_rabi(const MemoryConfig& c, const PulseShape& p) {
    if (p.energy <= 0.0) return 0.0;
    const double off =
        p.carrier_detuning_ghz - (c.cavity.mode_offset_control_ghz + c.cavity_drift_ghz);
    const double enhancement = cavity::buildup(c.cavity, off) / cavity::buildup(c.cavity, 0.0);
    return c.rabi_calibration * std::sqrt(p.energy / p.fwhm_ns * enhancement);
}

SimulationResult simulate_storage_retrieval(const MemoryConfig& config, const PulseShape& signal,
                                            const PulseShape& write, const PulseShape& read,
                                            const SimulationOptions& opt) {
    config.validate();
    validate_sequence(signal, write, read);

    auto run = [&](double dt) {
        const RunOutput st = integrate(config, signal, write, read, dt, opt.record_trace, true);
        for (double v : {st.input, st.leak, st.retrieved, st.ploss, st.dephasing, st.residual})
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "integration diverged at dt=" << dt << " ns; reduce the time step";
                throw NumericalError(os.str());
            }
        SimulationResult r;
        const double loss = 1.0 - config.insertion_loss;
        r.input_photons = st.input;
        r.leak_counts = loss * st.leak;
        r.retrieved_counts = loss * st.retrieved;
        r.internal_efficiency = st.input > 0.0 ? st.retrieved / st.input : 0.0;
        r.polarization_loss = st.ploss;
        r.dephasing_loss = st.dephasing;
        r.residual_excitation = st.residual;
        r.leak_window_end_ns = 0.5 * (write.center_ns + read.center_ns);
        r.time_ns = st.time;
        r.output_flux = st.flux;
        if (opt.run_reference) {
            const RunOutput ref = integrate(config, signal, write, read, dt, opt.record_trace, false);
            r.reference_counts = loss * (ref.leak + ref.retrieved);
            r.reference_flux = ref.flux;
            if (r.reference_counts > 0.0) {
                r.objective = r.retrieved_counts / r.reference_counts;
                r.total_efficiency = total_efficiency(r.retrieved_counts, r.reference_counts, config.insertion_loss);
            }
        }
        r.snr_db = snr_db(r.retrieved_counts, config.noise_rate);
        return r;
    };

    SimulationResult r = run(config.time_step_ns);
    if (config.check_convergence) {
        const SimulationResult fine = run(0.5 * config.time_step_ns);
        const double base = std::max(std::abs(fine.internal_efficiency), 1e-12);
        r.convergence_change = std::abs(fine.internal_efficiency - r.internal_efficiency) / base;
        if (!(r.convergence_change <= 1e-3)) {
            std::ostringstream os;
            os << "step-size convergence failure: relative change " << r.convergence_change << " on halving dt="
               << config.time_step_ns << " ns";
            throw NumericalError(os.str());
        }
    }
    return r;
}

double total_efficiency(double retrieved_counts, double reference_counts, double zeta) {
    if (!(reference_counts > 0.0)) throw DomainError("total_efficiency: reference counts must be > 0");
    return (1.0 - zeta) * retrieved_counts / reference_counts;
}

double lifetime_model(double t, double gamma_m, double nu_prime_mhz, double a, double b, double omega) {
    if (t < 0.0) throw DomainError("lifetime_model: t must be >= 0");
    const double nu = 1e-3 * nu_prime_mhz;
    const double beat = std::norm(a + b * std::polar(1.0, omega * t));
    return std::exp(-gamma_m * t) * std::exp(-std::numbers::pi * std::numbers::pi * nu * nu * t * t / (4.0 * kLn2)) * beat;
}

double lifetime_model(double t, const MemoryConfig& c) {
    return lifetime_model(t, c.spin_decay.rad_per_ns(), c.dephasing_width_mhz, c.amplitude_a, c.amplitude_b,
                          c.line_splitting.rad_per_ns());
}

std::optional<double> snr_db(double signal_counts, double noise_rate) {
    if (noise_rate <= 0.0) return std::nullopt;
    if (signal_counts <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal_counts / noise_rate);
}

double mean_photon_from_counts(double detected_counts, double path_transmission) {
    if (!(path_transmission > 0.0 && path_transmission <= 1.0))
        throw DomainError("mean_photon_from_counts: transmission must lie in (0, 1]");
    if (detected_counts < 0.0) throw DomainError("mean_photon_from_counts: counts must be >= 0");
    return detected_counts / path_transmission;
}

PulseSequence make_sequence(const PulseSettings& s) {
    PulseSequence q;
    q.write = {0.0, s.write_fwhm_ns, s.write_energy_nj, s.control_detuning_ghz, 0.0};
    q.signal = {s.signal_delay_ns, s.signal_fwhm_ns, s.mean_photon_number, 0.0, 0.0};
    q.read = {s.storage_time_ns + s.read_delay_offset_ns, s.read_fwhm_ns, s.write_energy_nj * s.read_write_ratio,
              s.control_detuning_ghz, 0.0};
    return q;
}

SimulationResult simulate(const MemoryConfig& c, const PulseSettings& s, const SimulationOptions& opt) {
    const auto q = make_sequence(s);
    return simulate_storage_retrieval(c, q.signal, q.write, q.read, opt);
}

const std::vector<SettingBound>& default_setting_bounds() {
    static const std::vector<SettingBound> b{
        {"control_detuning_ghz", 7.5, 8.5, 0.001}, {"write_energy_nj", 0.01, 1.0, 0.001},
        {"read_write_ratio", 1.0, 100.0, 0.1},     {"signal_delay_ns", -3.0, 3.0, 0.01},
        {"signal_fwhm_ns", 0.5, 4.0, 0.01},        {"write_fwhm_ns", 0.3, 5.0, 0.01},
        {"read_delay_offset_ns", -2.0, 2.0, 0.01}, {"read_fwhm_ns", 0.3, 4.0, 0.01},
    };
    return b;
}

const SettingBound& setting_bound(const std::string& name) {
    for (const auto& b : default_setting_bounds())
        if (b.name == name) return b;
    throw DomainError("unknown pulse setting '" + name + "'");
}

const std::vector<std::string>& setting_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& b : default_setting_bounds()) n.push_back(b.name);
        return n;
    }();
    return names;
}

namespace {
double* setting_ptr(PulseSettings& s, const std::string& name) {
    if (name == "control_detuning_ghz") return &s.control_detuning_ghz;
    if (name == "write_energy_nj") return &s.write_energy_nj;
    if (name == "read_write_ratio") return &s.read_write_ratio;
    if (name == "signal_delay_ns") return &s.signal_delay_ns;
    if (name == "signal_fwhm_ns") return &s.signal_fwhm_ns;
    if (name == "write_fwhm_ns") return &s.write_fwhm_ns;
    if (name == "read_delay_offset_ns") return &s.read_delay_offset_ns;
    if (name == "read_fwhm_ns") return &s.read_fwhm_ns;
    if (name == "storage_time_ns") return &s.storage_time_ns;
    if (name == "mean_photon_number") return &s.mean_photon_number;
    throw DomainError("unknown pulse setting '" + name + "'");
}
} // namespace

double get_setting(const PulseSettings& s, const std::string& name) {
    return *setting_ptr(const_cast<PulseSettings&>(s), name);
}

void set_setting(PulseSettings& s, const std::string& name, double v) { *setting_ptr(s, name) = v; }

PulseSettings refine_settings(const PulseSettings& start, std::span<const SettingBound> free, const SettingsScore& score,
                              int max_evaluations, double initial_step) {
    const std::size_t n = free.size();
    if (n == 0) return start;
    auto to_settings = [&](const std::vector<double>& u) {
        PulseSettings s = start;
        for (std::size_t k = 0; k < n; ++k) {
            const double x = std::clamp(u[k], 0.0, 1.0);
            set_setting(s, free[k].name, free[k].lower + x * (free[k].upper - free[k].lower));
        }
        return s;
    };
    int evals = 0;
    auto cost = [&](std::vector<double>& u) {
        for (auto& x : u) x = std::clamp(x, 0.0, 1.0);
        ++evals;
        return -score(to_settings(u));
    };

    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k)
        simplex[0][k] = (get_setting(start, free[k].name) - free[k].lower) / (free[k].upper - free[k].lower);
    for (std::size_t v = 1; v <= n; ++v) {
        simplex[v] = simplex[0];
        const double step = simplex[0][v - 1] + initial_step <= 1.0 ? initial_step : -initial_step;
        simplex[v][v - 1] += step;
    }
    std::vector<double> f(n + 1);
    for (std::size_t v = 0; v <= n; ++v) f[v] = cost(simplex[v]);

    std::vector<std::size_t> order(n + 1);
    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        if (std::abs(f[worst] - f[best]) < 1e-9) {
            double spread = 0.0;
            for (std::size_t v = 0; v <= n; ++v)
                for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(simplex[v][k] - simplex[best][k]));
            if (spread < 1e-6) break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v <= n; ++v)
            if (v != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v][k] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return p;
        };
        auto xr = along(-1.0);
        const double fr = cost(xr);
        if (fr < f[best]) {
            auto xe = along(-2.0);
            const double fe = cost(xe);
            if (fe < fr) { simplex[worst] = xe; f[worst] = fe; }
            else { simplex[worst] = xr; f[worst] = fr; }
        } else if (fr < f[second]) {
            simplex[worst] = xr;
            f[worst] = fr;
        } else {
            auto xc = fr < f[worst] ? along(-0.5) : along(0.5);
            const double fc = cost(xc);
            if (fc < std::min(fr, f[worst])) {
                simplex[worst] = xc;
                f[worst] = fc;
            } else {
                for (std::size_t v = 0; v <= n; ++v) {
                    if (v == best) continue;
                    for (std::size_t k = 0; k < n; ++k) simplex[v][k] = simplex[best][k] + 0.5 * (simplex[v][k] - simplex[best][k]);
                    f[v] = cost(simplex[v]);
                }
            }
        }
    }
    const auto it = std::min_element(f.begin(), f.end());
    return to_settings(simplex[static_cast<std::size_t>(it - f.begin())]);
}

double internal_efficiency_or_zero(const MemoryConfig& c, const PulseSettings& s) {
    try {
        return simulate(c, s, {false, false}).internal_efficiency;
    } catch (const DomainError&) {
        return 0.0;
    }
}

std::vector<SimulationResult> lifetime_scan(const MemoryConfig& c, const PulseSettings& s,
                                            std::span<const double> storage_times_ns) {
    return parallel_map(storage_times_ns.size(), [&](std::size_t k) {
        PulseSettings p = s;
        p.storage_time_ns = storage_times_ns[k];
        return simulate(c, p, {false, true});
    });
}

std::vector<SimulationResult> energy_scan(const MemoryConfig& c, const PulseSettings& s,
                                          std::span<const double> write_energies_nj) {
    for (double e : write_energies_nj)
        if (!(e >= 0.0)) throw DomainError("energy_scan: energies must be >= 0");
    return parallel_map(write_energies_nj.size(), [&](std::size_t k) {
        PulseSettings p = s;
        p.write_energy_nj = write_energies_nj[k];
        return simulate(c, p, {false, true});
    });
}

namespace {
std::vector<SettingBound> control_bounds() {
    std::vector<SettingBound> b;
    for (const char* name : {"control_detuning_ghz", "write_energy_nj", "read_write_ratio", "signal_delay_ns",
                             "write_fwhm_ns", "read_fwhm_ns"})
        b.push_back(setting_bound(name));
    return b;
}
} // namespace

std::pair<PulseSettings, double> optimize_internal(const MemoryConfig& c, std::span<const PulseSettings> starts,
                                                   int evaluations) {
    if (starts.empty()) throw DomainError("optimize_internal: no starting point");
    const auto free = control_bounds();
    auto score = [&](const PulseSettings& s) { return internal_efficiency_or_zero(c, s); };
    auto results = parallel_map(starts.size(), [&](std::size_t k) {
        PulseSettings best = refine_settings(starts[k], free, score, evaluations, 0.1);
        best = refine_settings(best, free, score, evaluations / 2, 0.02);
        return std::make_pair(best, score(best));
    });
    return *std::max_element(results.begin(), results.end(),
                             [](const auto& a, const auto& b) { return a.second < b.second; });
}

std::vector<BandwidthPoint> bandwidth_scan(const MemoryConfig& c, const PulseSettings& s,
                                           std::span<const double> signal_fwhm_ns, int evaluations_per_point) {
    std::vector<BandwidthPoint> out;
    PulseSettings warm = s;
    for (double w : signal_fwhm_ns) {
        if (!(w > 0.0)) throw DomainError("bandwidth_scan: widths must be > 0");
        PulseSettings a = warm, b = s;
        a.signal_fwhm_ns = b.signal_fwhm_ns = w;
        const std::array<PulseSettings, 2> starts{a, b};
        auto [best, eff] = optimize_internal(c, starts, evaluations_per_point);
        BandwidthPoint p;
        p.signal_fwhm_ns = w;
        p.settings = best;
        p.result = simulate(c, best, {false, true});
        out.push_back(std::move(p));
        warm = best;
    }
    return out;
}

double beat_ratio(const cavity::CavityParams& p, double strength_ratio, double separation_ghz) {
    const double l = cavity::buildup(p, separation_ghz) / cavity::buildup(p, 0.0);
    return strength_ratio * l * l;
}

OscillationEstimate oscillation_suppression(const AtomicConstants& constants, double field_mt, const MemoryConfig& c) {
    if (!(field_mt > 0.0)) throw DomainError("oscillation_suppression: field must be > 0");
    c.validate();
    const double half = 0.5 * c.cavity.fsr_ghz;
    OscillationEstimate est;
    est.memory = atomic::memory_line(constants, field_mt, c.intermediate_detuning_ghz);
    const atomic::TwoPhotonWindow w{est.memory.signal_detuning_ghz, est.memory.control_detuning_ghz - half,
                                    est.memory.control_detuning_ghz + half};
    const auto lines = atomic::two_photon_lines(constants, field_mt, atomic::Polarization::sigma_minus,
                                                atomic::Polarization::sigma_minus, w);
    for (const auto& ln : lines) {
        if (ln.ground == est.memory.ground && ln.doubly_excited == est.memory.doubly_excited) continue;
        const double f = ln.two_photon_ghz - est.memory.two_photon_ghz;
        const double r = beat_ratio(c.cavity, ln.strength / est.memory.strength, f);
        if (r > est.ratio) {
            est.ratio = r;
            est.competitor = ln;
            est.separation_mhz = 1e3 * f;
        }
    }
    return est;
}

} // namespace orca::memory
