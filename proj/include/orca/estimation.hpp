#pragma once

#include "orca/atomic.hpp"
#include "orca/cavity.hpp"
#include "orca/constants.hpp"
#include "orca/vapour.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace orca::estimation {

// Model values at every abscissa for a parameter vector.
using CurveModel = std::function<std::vector<double>(std::span<const double> x, std::span<const double> theta)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct LsqOptions {
    int max_iterations = 500;
    double step_tolerance = 1e-8;      // relative parameter change
    double gradient_tolerance = 1e-10;  // |J^T r|_inf
    double jacobian_step = 1e-6;        // relative central-difference step
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> uncertainties;  // 1 sigma; +inf when not identifiable
    double residual_norm = 0.0;         // sum of squared residuals
    double gradient_norm = 0.0;
    bool converged = false;
    bool singular = false;
    int iterations = 0;
    std::vector<double> residual_history;  // after each accepted step
    std::vector<std::string> flags;
    std::map<std::string, double> derived;

    double value(const std::string& name) const;
    double uncertainty(const std::string& name) const;
    bool has_flag(const std::string& f) const;
};

// Central differences with step h_k = rel * max(|theta_k|, 1e-3); one-sided
// at an active bound.
Eigen::MatrixXd numeric_jacobian(const CurveModel& model, std::span<const double> x, std::span<const double> theta,
                                 const Bounds& bounds, double rel_step = 1e-6);

// Levenberg-Marquardt with Marquardt scaling and projection onto the bounds.
// Throws DomainError when the data are too few or the start violates bounds.
FitResult least_squares(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                        std::vector<std::string> names, std::vector<double> initial, const Bounds& bounds,
                        const LsqOptions& opt = {});

// Reflected power amp * |r(Delta - centre)|^2 with R1, R2 fixed.
// Parameters: fsr_ghz, zeta_rt, amplitude, center_ghz. Derived: finesse, linewidth_ghz.
FitResult fit_cavity_reflection(std::span<const double> detuning_ghz, std::span<const double> power, double r1,
                                double r2, const LsqOptions& opt = {});

// One-photon transmission with Doppler width and line strengths fixed by theory.
// Parameters: field_mt, offset_ghz, optical_depth.
struct DopplerFitSetup {
    vapour::VapourParams vapour;
    atomic::Polarization polarization = atomic::Polarization::sigma_minus;
    double max_field_mt = 300.0;
};
FitResult fit_doppler_absorption(std::span<const double> detuning_ghz, std::span<const double> transmission,
                                 const AtomicConstants& constants, const DopplerFitSetup& setup,
                                 const LsqOptions& opt = {});

// Lifetime model with gamma_m fixed (rad/ns). Parameters: nu_prime_mhz,
// beat_mhz (omega / 2 pi), a, b. Derived: eta0, lifetime_ns, omega_rad_per_ns.
FitResult fit_lifetime(std::span<const double> t_ns, std::span<const double> efficiency, double gamma_m,
                       const LsqOptions& opt = {});

// Gaussian dip offset - depth exp(-4 ln2 (x - centre)^2 / fwhm^2).
// Parameters: center, fwhm, depth, offset (units of x and y).
FitResult fit_gaussian_line(std::span<const double> x, std::span<const double> y, const LsqOptions& opt = {});

// 1/e time of the decay envelope exp(-gamma_m t - pi^2 nu'^2 t^2 / (4 ln 2)), ns.
double envelope_lifetime(double gamma_m, double nu_prime_mhz);

// Frequency (1/ns = GHz) of the largest spectral peak of uniformly sampled
// data after removing a quadratic trend; zero-padded FFT with parabolic
// peak interpolation. min_freq excludes the trend region.
double dominant_frequency(std::span<const double> t, std::span<const double> y, double min_freq = 0.0);

} // namespace orca::estimation
