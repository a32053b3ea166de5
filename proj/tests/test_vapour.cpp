#include "orca/error.hpp"
#include "orca/vapour.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace orca;
using namespace orca::vapour;

namespace {

const AtomicConstants& rb() {
    static const AtomicConstants c = builtin_constants();
    return c;
}

constexpr double kB = 1.380649e-23, amu = 1.66053906660e-27;

double sigma_v(double t_c, double m_amu) { return std::sqrt(kB * (t_c + 273.15) / (m_amu * amu)); }

// Spectrum by explicit sum over velocity classes: each class absorbs with a
// narrow normalized Gaussian (6 MHz FWHM) at its Doppler-shifted frequency.
std::vector<double> velocity_class_spectrum(const VapourParams& v, double field, std::span<const double> det) {
    const auto& c = rb();
    const double sv = sigma_v(v.temperature_c, c.mass_amu);
    const double lambda = c.signal_wavelength_nm * 1e-9;
    const int n = 2001;
    const double vmax = 6.0 * sv;
    const double dv = 2.0 * vmax / (n - 1);
    const double h_fwhm = 0.006;  // GHz
    const double h_sigma = h_fwhm / std::sqrt(8.0 * std::log(2.0));
    // Doppler profile peak of a unit-area Gaussian in frequency
    const double f_sigma = sv / lambda * 1e-9;
    const double peak_norm = std::sqrt(2.0 * std::numbers::pi) * std::sqrt(f_sigma * f_sigma + h_sigma * h_sigma);
    const auto lines = atomic::transition_lines(c.ground, c.intermediate, field, atomic::Polarization::sigma_minus);
    const double d = effective_optical_depth(v);
    std::vector<double> out;
    for (double x : det) {
        double od = 0.0;
        for (const auto& ln : lines) {
            const double w = one_photon_weight(ln, c.ground, c.intermediate);
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                const double vel = -vmax + k * dv;
                const double pv = std::exp(-0.5 * vel * vel / (sv * sv)) / (std::sqrt(2.0 * std::numbers::pi) * sv);
                const double shift = vel / lambda * 1e-9;
                const double y = x - ln.detuning_ghz - shift;
                acc += pv * dv * std::exp(-0.5 * y * y / (h_sigma * h_sigma)) / (std::sqrt(2.0 * std::numbers::pi) * h_sigma);
            }
            od += d * w * acc * peak_norm;
        }
        out.push_back(std::exp(-od));
    }
    return out;
}

} // namespace

TEST_SUITE("vapour") {

TEST_CASE("Doppler width") {
    const double expected = 2.0 / (rb().signal_wavelength_nm * 1e-9) * std::numbers::pi *
                            std::sqrt(8.0 * std::log(2.0)) * sigma_v(85.0, rb().mass_amu);
    const auto g = doppler_width(85.0, rb().signal_wavelength_nm, rb().mass_amu);
    CHECK(g.rad_per_s() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g.ghz() == doctest::Approx(0.55).epsilon(0.03));
    CHECK(doppler_width(85.0, 780.0, 87.0).ghz() == doctest::Approx(0.55).epsilon(0.03));
    CHECK(doppler_width(-273.15 + 1e-12, 780.0, 87.0).ghz() < 1e-7);
    CHECK_THROWS_AS(doppler_width(-274.0, 780.0, 87.0), DomainError);
    const double r = doppler_width(85.0, 776.0, 87.0).ghz() / doppler_width(85.0, 780.0, 87.0).ghz();
    CHECK(r == doctest::Approx(780.0 / 776.0).epsilon(1e-12));
    CHECK(std::abs(r - 1.0) < 0.01);
    // sqrt(T_K) and 1/lambda scaling over grids
    for (double t : {0.0, 40.0, 85.0, 140.0})
        for (double lam : {770.0, 780.0, 795.0}) {
            const double ratio = doppler_width(t, lam, 87.0).ghz() / doppler_width(85.0, 780.0, 87.0).ghz();
            CHECK(ratio == doctest::Approx(std::sqrt((t + 273.15) / 358.15) * 780.0 / lam).epsilon(1e-12));
        }
}

TEST_CASE("optical depth model") {
    CHECK(optical_depth(85.0, 6.0) == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(optical_depth(85.0, 3.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(optical_depth(95.0, 6.0) > 200.0);
    double prev = 0.0;
    for (double t = 20.0; t <= 150.0; t += 5.0) {
        const double d = optical_depth(t, 6.0);
        CHECK(d > prev);
        prev = d;
    }
    CHECK_THROWS_AS(optical_depth(10.0, 6.0), DomainError);
    CHECK_THROWS_AS(optical_depth(160.0, 6.0), DomainError);
    VapourParams v;
    v.optical_depth = 12.0;
    CHECK(effective_optical_depth(v) == 12.0);
    v.optical_depth = -1.0;
    CHECK_THROWS_AS(v.validate(), DomainError);
    VapourParams cold;
    cold.temperature_c = -300.0;
    CHECK_THROWS_AS(cold.validate(), DomainError);
}

TEST_CASE("one-photon spectrum bounds and the empty cell") {
    VapourParams v;
    std::vector<double> grid;
    for (int k = 0; k <= 600; ++k) grid.push_back(-15.0 + 0.05 * k);
    for (double b : {0.0, 169.0}) {
        for (double t : one_photon_spectrum(v, rb(), b, atomic::Polarization::sigma_minus, grid)) {
            CHECK(t >= 0.0);
            CHECK(t <= 1.0);
        }
    }
    v.optical_depth = 0.0;
    for (double t : one_photon_spectrum(v, rb(), 169.0, atomic::Polarization::sigma_minus, grid)) CHECK(t == 1.0);
}

TEST_CASE("one-photon spectrum equals a velocity-class sum") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        VapourParams v;
        v.temperature_c = 50.0 + 60.0 * u(rng);
        v.optical_depth = 0.5 + 4.0 * u(rng);
        const double b = 300.0 * u(rng);
        std::vector<double> grid;
        for (int k = 0; k <= 60; ++k) grid.push_back(-12.0 + 0.4 * k);
        const auto lib = one_photon_spectrum(v, rb(), b, atomic::Polarization::sigma_minus, grid);
        const auto ref = velocity_class_spectrum(v, b, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(lib[k] - ref[k]) <= 1e-4);
    }
}

TEST_CASE("a single isolated line has centre transmission exp(-d)") {
    // spinless nucleus at zero field: every sigma- component sits at one frequency
    AtomicConstants c = rb();
    for (auto* m : {&c.ground, &c.intermediate, &c.upper}) {
        m->i = 0.0;
        m->a_hfs_mhz = 0.0;
        m->b_hfs_mhz = 0.0;
    }
    c.ground.first_index = 1;
    c.intermediate.first_index = 3;
    c.upper.first_index = 7;
    VapourParams v;
    v.optical_depth = 7.5;
    const std::vector<double> x{0.0};
    CHECK(one_photon_spectrum(v, c, 0.0, atomic::Polarization::sigma_minus, x)[0] ==
          doctest::Approx(std::exp(-7.5)).epsilon(1e-6).scale(1.0));
}

TEST_CASE("residual Doppler lifetime") {
    const auto& c = rb();
    const auto counter = residual_doppler_lifetime(85.0, c.signal_wavelength_nm, c.control_wavelength_nm,
                                                   Geometry::counter_propagating, c.mass_amu);
    const auto co = residual_doppler_lifetime(85.0, c.signal_wavelength_nm, c.control_wavelength_nm,
                                              Geometry::co_propagating, c.mass_amu);
    REQUIRE(counter);
    REQUIRE(co);
    CHECK(*counter >= 100.0);
    CHECK(*counter <= 140.0);
    const double ks = 1.0 / c.signal_wavelength_nm, kc = 1.0 / c.control_wavelength_nm;
    CHECK(*counter / *co == doctest::Approx((ks + kc) / std::abs(ks - kc)).epsilon(0.01));
    // direct arithmetic: 1 / (|dk| sigma_v)
    const double dk = 2.0 * std::numbers::pi * std::abs(ks - kc) * 1e9;
    CHECK(*counter == doctest::Approx(1e9 / (dk * sigma_v(85.0, c.mass_amu))).epsilon(1e-9));
    CHECK_FALSE(residual_doppler_lifetime(85.0, 780.0, 780.0, Geometry::counter_propagating, c.mass_amu).has_value());
}

TEST_CASE("two-photon spectrum") {
    const auto& c = rb();
    VapourParams v;
    const auto mem = atomic::memory_line(c, 169.0);
    std::vector<double> grid;
    for (int k = 0; k <= 2000; ++k) grid.push_back(mem.control_detuning_ghz - 0.5 + 0.0005 * k);
    TwoPhotonOptions opt;
    opt.signal_detuning_ghz = mem.signal_detuning_ghz;
    const auto s = two_photon_spectrum(v, c, 169.0, atomic::Polarization::sigma_minus, atomic::Polarization::sigma_minus,
                                       grid, opt);
    for (double t : s.transmission) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
    CHECK_FALSE(s.near_one_photon_resonance);
    // line positions come straight from the level structure
    const auto lines = atomic::two_photon_lines(c, 169.0, atomic::Polarization::sigma_minus,
                                                atomic::Polarization::sigma_minus,
                                                {opt.signal_detuning_ghz, grid.front() - 1.0, grid.back() + 1.0});
    for (const auto& l : s.lines) {
        bool match = false;
        for (const auto& r : lines)
            match |= r.ground == l.ground && r.doubly_excited == l.doubly_excited &&
                     r.control_detuning_ghz == l.control_detuning_ghz;
        CHECK(match);
    }
    // the deepest dip sits on the memory line
    const auto it = std::min_element(s.transmission.begin(), s.transmission.end());
    CHECK(grid[it - s.transmission.begin()] == doctest::Approx(mem.control_detuning_ghz).epsilon(1e-4));

    // width is the quadrature sum of its parts and lies in the measured band
    const double rd = two_photon_doppler_fwhm_mhz(85.0, c.signal_wavelength_nm, c.control_wavelength_nm,
                                                  Geometry::counter_propagating, c.mass_amu);
    const double inh = field_inhomogeneity_mhz(v, c);
    CHECK(s.line_fwhm_mhz == doctest::Approx(std::sqrt(rd * rd + inh * inh + c.upper_linewidth_mhz * c.upper_linewidth_mhz)));
    CHECK(s.line_fwhm_mhz >= 11.8 - 2.4);
    CHECK(s.line_fwhm_mhz <= 11.8 + 2.4);
    CHECK(std::sqrt(rd * rd + inh * inh) == doctest::Approx(12.6));

    // co-propagating lines are Doppler broad
    opt.geometry = Geometry::co_propagating;
    const auto co = two_photon_spectrum(v, c, 169.0, atomic::Polarization::sigma_minus, atomic::Polarization::sigma_minus,
                                        grid, opt);
    CHECK(co.line_fwhm_mhz > 20.0 * rd);

    // control off: flat at the one-photon background
    opt.geometry = Geometry::counter_propagating;
    opt.control_absorbance = 0.0;
    const auto flat = two_photon_spectrum(v, c, 169.0, atomic::Polarization::sigma_minus,
                                          atomic::Polarization::sigma_minus, grid, opt);
    for (double t : flat.transmission) CHECK(t == flat.background);
}

TEST_CASE("two-photon spectrum warns near one-photon resonance") {
    const auto& c = rb();
    const auto lines = atomic::transition_lines(c.ground, c.intermediate, 169.0, atomic::Polarization::sigma_minus);
    TwoPhotonOptions opt;
    opt.signal_detuning_ghz = lines.front().detuning_ghz + 0.1;
    const std::vector<double> grid{0.0, 1.0};
    const auto s = two_photon_spectrum(VapourParams{}, c, 169.0, atomic::Polarization::sigma_minus,
                                       atomic::Polarization::sigma_minus, grid, opt);
    CHECK(s.near_one_photon_resonance);
}

}
