#include "orca/estimation.hpp"

#include "orca/error.hpp"
#include "orca/memory.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orca::estimation {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<double> clamp_to(std::vector<double> v, const Bounds& b) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::clamp(v[k], b.lower[k], b.upper[k]);
    return v;
}

double ssr(std::span<const double> y, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - f[i];
        s += r * r;
    }
    return s;
}


void require_xy(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("x and y lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("data contain non-finite values");
}

std::size_t argmin(std::span<const double> y) {
    return static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
}

} // namespace

double FitResult::value(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return values[k];
    if (auto it = derived.find(name); it != derived.end()) return it->second;
    throw DomainError("fit result has no parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return uncertainties[k];
    throw DomainError("fit result has no parameter '" + name + "'");
}

bool FitResult::has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

Eigen::MatrixXd numeric_jacobian(const CurveModel& model, std::span<const double> x, std::span<const double> theta,
                                 const Bounds& bounds, double rel_step) {
    const std::size_t p = theta.size();
    Eigen::MatrixXd j(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p));
    std::vector<double> tp(theta.begin(), theta.end());
    for (std::size_t k = 0; k < p; ++k) {
        const double h = rel_step * std::max(std::abs(theta[k]), 1e-3);
        double up = theta[k] + h, dn = theta[k] - h;
        if (up > bounds.upper[k]) up = theta[k];
        if (dn < bounds.lower[k]) dn = theta[k];
        tp[k] = up;
        const auto fu = model(x, tp);
        tp[k] = dn;
        const auto fd = model(x, tp);
        tp[k] = theta[k];
        const double span = up - dn;
        for (std::size_t i = 0; i < x.size(); ++i) j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (fu[i] - fd[i]) / span;
    }
    return j;
}

FitResult least_squares(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                        std::vector<std::string> names, std::vector<double> initial, const Bounds& bounds,
                        const LsqOptions& opt) {
    require_xy(x, y);
    const std::size_t p = initial.size();
    if (names.size() != p || bounds.lower.size() != p || bounds.upper.size() != p)
        throw DomainError("least_squares: parameter, name and bound counts differ");
    if (x.size() <= p) throw DomainError("least_squares: need more data points than parameters");
    for (std::size_t k = 0; k < p; ++k)
        if (!(initial[k] >= bounds.lower[k] && initial[k] <= bounds.upper[k]))
            throw DomainError("least_squares: initial value of '" + names[k] + "' outside its bounds");

    FitResult out;
    out.names = std::move(names);
    std::vector<double> theta = std::move(initial);
    auto f = model(x, theta);
    double s = ssr(y, f);
    double lambda = 1e-3;
    bool small_step = false;
    Eigen::MatrixXd jac;
    Eigen::VectorXd grad;

    auto residuals = [&](const std::vector<double>& fv) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
        for (std::size_t i = 0; i < y.size(); ++i) r(static_cast<Eigen::Index>(i)) = y[i] - fv[i];
        return r;
    };
    auto scaled_gradient = [&]() {
        double g = 0.0;
        const double rn = std::sqrt(std::max(s, 1e-300));
        for (Eigen::Index k = 0; k < jac.cols(); ++k) {
            const double cn = jac.col(k).norm();
            if (cn > 0.0) g = std::max(g, std::abs(grad(k)) / (cn * rn));
        }
        return g;
    };

    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        jac = numeric_jacobian(model, x, theta, bounds, opt.jacobian_step);
        grad = jac.transpose() * residuals(f);
        if (grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd a = jac.transpose() * jac;
        Eigen::VectorXd dscale = a.diagonal();
        const double floor = 1e-12 * std::max(dscale.maxCoeff(), 1e-300);
        for (Eigen::Index k = 0; k < dscale.size(); ++k) dscale(k) = std::max(dscale(k), floor);

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd m = a;
            m.diagonal() += lambda * dscale;
            const Eigen::VectorXd step = m.ldlt().solve(grad);
            std::vector<double> trial(p);
            for (std::size_t k = 0; k < p; ++k) trial[k] = theta[k] + step(static_cast<Eigen::Index>(k));
            trial = clamp_to(std::move(trial), bounds);
            const auto ft = model(x, trial);
            const double st = ssr(y, ft);
            if (std::isfinite(st) && st < s) {
                double dn = 0.0, tn = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    dn += (trial[k] - theta[k]) * (trial[k] - theta[k]);
                    tn += theta[k] * theta[k];
                }
                small_step = std::sqrt(dn) <= opt.step_tolerance * (std::sqrt(tn) + opt.step_tolerance);
                theta = std::move(trial);
                f = ft;
                s = st;
                out.residual_history.push_back(s);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted || small_step) {
            jac = numeric_jacobian(model, x, theta, bounds, opt.jacobian_step);
            grad = jac.transpose() * residuals(f);
            out.converged = grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance || scaled_gradient() < 1e-3;
            if (!accepted) out.flags.push_back("stalled");
            ++it;
            break;
        }
    }
    if (it >= opt.max_iterations && !out.converged) out.flags.push_back("max_iterations");
    out.iterations = it;
    out.values = theta;
    out.residual_norm = s;
    if (jac.size() == 0) jac = numeric_jacobian(model, x, theta, bounds, opt.jacobian_step);
    if (grad.size() == 0) grad = jac.transpose() * residuals(f);
    out.gradient_norm = scaled_gradient();

    // Covariance s^2 (J^T J)^+ ; directions with vanishing curvature make the
    // parameters that load on them unidentifiable.
    const double dof = static_cast<double>(x.size() - p);
    const double sigma2 = s / dof;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac.transpose() * jac);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double emax = std::max(ev.maxCoeff(), 1e-300);
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    std::vector<bool> unidentified(p, false);
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const Eigen::VectorXd v = es.eigenvectors().col(k);
        if (ev(k) > 1e-12 * emax) {
            pinv += v * v.transpose() / ev(k);
        } else {
            out.singular = true;
            for (std::size_t q = 0; q < p; ++q)
                if (std::abs(v(static_cast<Eigen::Index>(q))) > 0.1) unidentified[q] = true;
        }
    }
    if (out.singular) out.flags.push_back("singular_jacobian");
    out.uncertainties.resize(p);
    for (std::size_t k = 0; k < p; ++k)
        out.uncertainties[k] = unidentified[k] ? kInf : std::sqrt(std::max(0.0, sigma2 * pinv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))));
    return out;
}

// ---------------------------------------------------------------- cavity

FitResult fit_cavity_reflection(std::span<const double> det, std::span<const double> power, double r1, double r2,
                                const LsqOptions& opt) {
    require_xy(det, power);
    const std::size_t n = det.size();
    if (n < 16) throw DomainError("fit_cavity_reflection: too few points");
    const double dx = (det.back() - det.front()) / static_cast<double>(n - 1);
    if (!(dx > 0.0)) throw DomainError("fit_cavity_reflection: detunings must increase");

    // FSR from the largest autocorrelation peak past the first zero crossing.
    const double mean = std::accumulate(power.begin(), power.end(), 0.0) / static_cast<double>(n);
    std::vector<double> ac(n, 0.0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += (power[i] - mean) * (power[i + lag] - mean);
        ac[lag] = acc / static_cast<double>(n);  // biased: long lags with little overlap lose weight
    }
    std::size_t lag = 1;
    while (lag < n && ac[lag] > 0.0) ++lag;
    const std::size_t last = (9 * n) / 10;
    std::size_t best = 0;
    for (std::size_t k = std::max<std::size_t>(lag, 1); k + 1 < last; ++k)
        if (ac[k] > 0.0 && ac[k] >= ac[k - 1] && ac[k] >= ac[k + 1] && (best == 0 || ac[k] > ac[best])) best = k;
    if (lag >= n || best == 0)
        throw DomainError("fit_cavity_reflection: data must span at least one free spectral range");
    double peak = static_cast<double>(best);
    if (best + 1 < n) {
        const double a = ac[best - 1], b = ac[best], c = ac[best + 1];
        const double den = a - 2.0 * b + c;
        if (den < 0.0) peak += 0.5 * (a - c) / den;
    }
    const double fsr0 = peak * dx;
    double center0 = det[argmin(power)];
    center0 -= fsr0 * std::round(center0 / fsr0);

    auto model = [r1, r2](std::span<const double> x, std::span<const double> th) {
        cavity::CavityParams p;
        p.r1 = r1;
        p.r2 = r2;
        p.fsr_ghz = std::max(th[0], 1e-9);
        p.zeta_rt = std::clamp(th[1], 0.0, 0.999999);
        std::vector<double> f(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = th[2] * std::norm(cavity::reflection_amplitude(p, x[i] - th[3]));
        return f;
    };

    // zeta_rt and amplitude from a coarse scan with the amplitude solved linearly.
    double zbest = 0.1, abest = 1.0, sbest = kInf;
    for (double z = 0.005; z < 0.9; z += 0.005) {
        const std::vector<double> th{fsr0, z, 1.0, center0};
        const auto f = model(det, th);
        double fy = 0.0, ff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fy += f[i] * power[i];
            ff += f[i] * f[i];
        }
        const double a = fy / ff;
        std::vector<double> fa(f);
        for (auto& v : fa) v *= a;
        const double sv = ssr(power, fa);
        if (sv < sbest) {
            sbest = sv;
            zbest = z;
            abest = a;
        }
    }

    Bounds b{{0.5 * fsr0, 0.0, 0.0, center0 - 0.5 * fsr0}, {2.0 * fsr0, 0.99, 10.0 * std::max(abest, 1e-3), center0 + 0.5 * fsr0}};
    auto res = least_squares(model, det, power, {"fsr_ghz", "zeta_rt", "amplitude", "center_ghz"},
                             clamp_to({fsr0, zbest, abest, center0}, b), b, opt);
    // One visible dip leaves the FSR unconstrained.
    const double first_dip = res.values[3] + res.values[0] * std::ceil((det.front() - res.values[3]) / res.values[0]);
    if (first_dip + res.values[0] > det.back())
        throw DomainError("fit_cavity_reflection: data must span at least one free spectral range");
    cavity::CavityParams p;
    p.r1 = r1;
    p.r2 = r2;
    p.fsr_ghz = res.values[0];
    p.zeta_rt = res.values[1];
    res.derived["finesse"] = cavity::finesse(p);
    res.derived["linewidth_ghz"] = cavity::linewidth_ghz(p);
    res.derived["insertion_loss"] = cavity::insertion_loss(p);
    return res;
}

// ---------------------------------------------------------------- Doppler

FitResult fit_doppler_absorption(std::span<const double> det, std::span<const double> trans,
                                 const AtomicConstants& constants, const DopplerFitSetup& setup, const LsqOptions& opt) {
    require_xy(det, trans);
    if (det.size() < 8) throw DomainError("fit_doppler_absorption: too few points");
    auto model = [&](std::span<const double> x, std::span<const double> th) {
        vapour::VapourParams v = setup.vapour;
        v.optical_depth = std::max(th[2], 0.0);
        std::vector<double> shifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] - th[1];
        return vapour::one_photon_spectrum(v, constants, std::max(th[0], 0.0), setup.polarization, shifted);
    };

    // Start: for each field on a coarse grid align the deepest model dip with
    // the deepest data dip and match its depth; keep the best.
    const double data_min_x = det[argmin(trans)];
    const double data_od = -std::log(std::clamp(*std::min_element(trans.begin(), trans.end()), 1e-3, 1.0));
    std::vector<double> start{0.0, 0.0, 1.0};
    double sbest = kInf;
    const double span = det.back() - det.front();
    for (double b = 0.0; b <= setup.max_field_mt + 1e-9; b += 5.0) {
        std::vector<double> th{b, 0.0, 1.0};
        const auto unit = model(det, th);
        const std::size_t k = argmin(unit);
        const double unit_od = -std::log(std::clamp(unit[k], 1e-300, 1.0));
        if (unit_od <= 0.0) continue;
        th[1] = std::clamp(data_min_x - det[k], -0.5 * span, 0.5 * span);
        th[2] = data_od / unit_od;
        const double sv = ssr(trans, model(det, th));
        if (sv < sbest) {
            sbest = sv;
            start = th;
        }
    }
    Bounds b{{0.0, -0.5 * span, 0.0}, {setup.max_field_mt, 0.5 * span, 1e5}};
    return least_squares(model, det, trans, {"field_mt", "offset_ghz", "optical_depth"}, clamp_to(start, b), b, opt);
}

// ---------------------------------------------------------------- lifetime

double envelope_lifetime(double gamma_m, double nu_prime_mhz) {
    // gamma t + c t^2 = 1, c = pi^2 nu'^2 / (4 ln 2)
    const double nu = 1e-3 * nu_prime_mhz;
    const double c = std::numbers::pi * std::numbers::pi * nu * nu / (4.0 * std::log(2.0));
    if (c == 0.0) return gamma_m > 0.0 ? 1.0 / gamma_m : kInf;
    return (-gamma_m + std::sqrt(gamma_m * gamma_m + 4.0 * c)) / (2.0 * c);
}

double dominant_frequency(std::span<const double> t, std::span<const double> y, double min_freq) {
    require_xy(t, y);
    const std::size_t n = t.size();
    if (n < 8) throw DomainError("dominant_frequency: too few samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw DomainError("dominant_frequency: times must increase");

    Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (t[i] - t.front()) / (t.back() - t.front());
        v(static_cast<Eigen::Index>(i), 0) = 1.0;
        v(static_cast<Eigen::Index>(i), 1) = u;
        v(static_cast<Eigen::Index>(i), 2) = u * u;
        yy(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::VectorXd coef = v.colPivHouseholderQr().solve(yy);
    const Eigen::VectorXd resid = yy - v * coef;

    std::size_t m = 1;
    while (m < 16 * n) m <<= 1;
    std::vector<double> buf(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
        buf[i] = w * resid(static_cast<Eigen::Index>(i));
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);
    const double df = 1.0 / (static_cast<double>(m) * dt);
    std::size_t best = 0;
    double bmag = -1.0;
    for (std::size_t k = 1; k < m / 2; ++k) {
        if (k * df < min_freq) continue;
        const double mag = std::abs(spec[k]);
        if (mag > bmag) {
            bmag = mag;
            best = k;
        }
    }
    if (best == 0) throw DomainError("dominant_frequency: no frequency above the minimum");
    double k = static_cast<double>(best);
    if (best + 1 < m / 2) {
        const double a = std::log(std::abs(spec[best - 1]) + 1e-300), b = std::log(bmag + 1e-300),
                     c = std::log(std::abs(spec[best + 1]) + 1e-300);
        const double den = a - 2.0 * b + c;
        if (den < 0.0) k += 0.5 * (a - c) / den;
    }
    return k * df;
}

FitResult fit_lifetime(std::span<const double> t, std::span<const double> eta, double gamma_m, const LsqOptions& opt) {
    require_xy(t, eta);
    const std::size_t n = t.size();
    if (n < 16) throw DomainError("fit_lifetime: too few points");

    auto model = [gamma_m](std::span<const double> x, std::span<const double> th) {
        const double omega = kTwoPi * 1e-3 * th[1];
        std::vector<double> f(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = memory::lifetime_model(std::max(x[i], 0.0), gamma_m, th[0], th[2], th[3], omega);
        return f;
    };

    // Beat from the spectral peak above 20 MHz. A peak on the search floor
    // means no beat is resolved; the fit then starts from B = 0.
    constexpr double kFloorGhz = 0.02;
    double beat_mhz = 1e3 * dominant_frequency(t, eta, kFloorGhz);
    const bool beat_resolved = beat_mhz > 1.05e3 * kFloorGhz;
    if (beat_resolved && beat_mhz * 1e-3 * (t.back() - t.front()) < 2.0)
        throw DomainError("fit_lifetime: data must span at least two beat periods");

    // Envelope 1/e time from a one-period running mean.
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    const auto half = static_cast<std::size_t>(std::max(1.0, std::round(0.5e3 / beat_mhz / dt)));
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0, hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += eta[k];
        smooth[i] = acc / static_cast<double>(hi - lo + 1);
    }
    const double s0 = smooth.front();
    double t_e = -1.0;
    for (std::size_t i = 1; i < n; ++i)
        if (smooth[i] < s0 * std::exp(-1.0)) {
            t_e = t[i];
            break;
        }
    double nu0 = 5.0;
    if (t_e > 0.0) {
        const double rem = std::max(0.05, 1.0 - gamma_m * t_e);
        nu0 = 1e3 * std::sqrt(rem * 4.0 * std::log(2.0)) / (std::numbers::pi * t_e);
    }

    // A, B from a linear fit of eta / envelope to c0 + c1 cos(omega t).
    const double omega = kTwoPi * 1e-3 * beat_mhz;
    Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double env = memory::lifetime_model(std::max(t[i], 0.0), gamma_m, nu0, 1.0, 0.0, 0.0);
        v(static_cast<Eigen::Index>(i), 0) = env;
        v(static_cast<Eigen::Index>(i), 1) = env * std::cos(omega * t[i]);
        r(static_cast<Eigen::Index>(i)) = eta[i];
    }
    const Eigen::VectorXd c = v.colPivHouseholderQr().solve(r);
    const double c0 = std::max(c(0), 1e-12), c1 = std::clamp(c(1), 0.0, c0);
    const double sp = std::sqrt(c0 + c1), sm = std::sqrt(c0 - c1);
    const double a0 = 0.5 * (sp + sm), b0 = beat_resolved ? 0.5 * (sp - sm) : 0.0;

    Bounds b{{0.0, 0.0, 0.0, 0.0}, {1e3, 2e3, 10.0, 10.0}};
    auto res = least_squares(model, t, eta, {"nu_prime_mhz", "beat_mhz", "a", "b"}, clamp_to({nu0, beat_mhz, a0, b0}, b),
                             b, opt);
    const double a = res.values[2], bb = res.values[3];
    res.derived["eta0"] = (a + bb) * (a + bb);
    res.derived["lifetime_ns"] = envelope_lifetime(gamma_m, res.values[0]);
    res.derived["omega_rad_per_ns"] = kTwoPi * 1e-3 * res.values[1];
    if (res.singular || !(bb > 2.0 * res.uncertainties[3])) {
        res.flags.push_back("omega_unidentifiable");
        res.uncertainties[1] = kInf;
    }
    return res;
}

// ---------------------------------------------------------------- Gaussian line

FitResult fit_gaussian_line(std::span<const double> x, std::span<const double> y, const LsqOptions& opt) {
    require_xy(x, y);
    const std::size_t n = x.size();
    if (n < 8) throw DomainError("fit_gaussian_line: too few points");
    const double range = x.back() - x.front();
    if (!(range > 0.0)) throw DomainError("fit_gaussian_line: x must increase");

    const std::size_t edge = std::max<std::size_t>(2, n / 10);
    double off0 = 0.0;
    for (std::size_t i = 0; i < edge; ++i) off0 += y[i] + y[n - 1 - i];
    off0 /= 2.0 * static_cast<double>(edge);
    const std::size_t k = argmin(y);
    const double depth0 = off0 - y[k];
    double fwhm0 = 0.25 * range;
    if (depth0 > 0.0) {
        std::size_t lo = k, hi = k;
        while (lo > 0 && y[lo] < off0 - 0.5 * depth0) --lo;
        while (hi + 1 < n && y[hi] < off0 - 0.5 * depth0) ++hi;
        fwhm0 = std::max(x[hi] - x[lo], 2.0 * range / static_cast<double>(n));
    }
    auto model = [](std::span<const double> xs, std::span<const double> th) {
        std::vector<double> f(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double u = xs[i] - th[0];
            f[i] = th[3] - th[2] * std::exp(-4.0 * std::log(2.0) * u * u / (th[1] * th[1]));
        }
        return f;
    };
    Bounds b{{x.front(), 0.1 * range / static_cast<double>(n), -kInf, -kInf}, {x.back(), 10.0 * range, kInf, kInf}};
    auto res = least_squares(model, x, y, {"center", "fwhm", "depth", "offset"}, clamp_to({x[k], fwhm0, depth0, off0}, b),
                             b, opt);
    if (res.singular || !(std::abs(res.values[2]) > 3.0 * res.uncertainties[2])) {
        res.flags.push_back("fwhm_unidentifiable");
        res.uncertainties[1] = kInf;
    }
    return res;
}

} // namespace orca::estimation
