#include "orca/atomic.hpp"
#include "orca/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace orca;
using namespace orca::atomic;

namespace {

const AtomicConstants& rb() {
    static const AtomicConstants c = builtin_constants();
    return c;
}

// Closed-form zero-field hyperfine energy, written out independently.
double hfs_energy(double a, double b, double i, double j, double f) {
    const double k = f * (f + 1) - i * (i + 1) - j * (j + 1);
    double e = 0.5 * a * k;
    if (b != 0.0 && i > 0.5 && j > 0.5)
        e += b * (1.5 * k * (k + 1) - 2.0 * i * (i + 1) * j * (j + 1)) / (4.0 * i * (2 * i - 1) * j * (2 * j - 1));
    return e;
}

// Exact J = 1/2 energies (Breit-Rabi), sorted.
std::vector<double> breit_rabi_formula(const ManifoldSpec& m, double b_mt) {
    const double mu = kDefaultBohrMagneton;
    const double i = m.i;
    const double de = m.a_hfs_mhz * (i + 0.5);
    const double x = (m.g_j - m.g_i) * mu * b_mt / de;
    std::vector<double> e;
    for (double mf = -(i + 0.5); mf <= i + 0.5 + 1e-9; mf += 1.0) {
        const double base = -de / (2 * (2 * i + 1)) + m.g_i * mu * mf * b_mt;
        if (std::abs(std::abs(mf) - (i + 0.5)) < 1e-9) {
            // stretched states: the square root is |1 +- x|, take the analytic branch
            e.push_back(base + 0.5 * de * (1.0 + (mf > 0 ? x : -x)));
            continue;
        }
        const double root = std::sqrt(1.0 + 4.0 * mf * x / (2 * i + 1) + x * x);
        e.push_back(base + 0.5 * de * root);
        e.push_back(base - 0.5 * de * root);
    }
    std::sort(e.begin(), e.end());
    return e;
}

std::vector<double> energies(const std::vector<ZeemanState>& s) {
    std::vector<double> e;
    for (const auto& z : s) e.push_back(z.energy_mhz);
    return e;
}

} // namespace

TEST_SUITE("atomic") {

TEST_CASE("clebsch-gordan values and orthonormality") {
    CHECK(clebsch_gordan(1, 1, 1, -1, 2, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(1, 1, 1, -1, 0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(1, -1, 1, 1, 0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(2, 2, 2, -2, 0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(1, 1, 1, 1, 2, 0) == 0.0);
    // sum over m1, m2 of <j1 m1 j2 m2|j m>^2 = 1 for each (j, m)
    for (int tj = 1; tj <= 5; tj += 2)
        for (int tm = -tj; tm <= tj; tm += 2) {
            double s = 0.0;
            for (int m1 = -3; m1 <= 3; m1 += 2)
                for (int m2 = -2; m2 <= 2; m2 += 2) {
                    const double c = clebsch_gordan(3, m1, 2, m2, tj, tm);
                    s += c * c;
                }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("manifold dimensions total 48 with labels 1..48") {
    const auto& c = rb();
    CHECK(c.ground.dimension() == 8);
    CHECK(c.intermediate.dimension() == 16);
    CHECK(c.upper.dimension() == 24);
    CHECK(c.ground.b_hfs_mhz == 0.0);
    for (double b : {0.0, 37.0, 169.0, 300.0}) {
        std::set<int> labels;
        for (const auto* m : {&c.ground, &c.intermediate, &c.upper})
            for (const auto& z : diagonalize_manifold(*m, b)) labels.insert(z.index);
        REQUIRE(labels.size() == 48);
        CHECK(*labels.begin() == 1);
        CHECK(*labels.rbegin() == 48);
    }
}

TEST_CASE("hamiltonian is hermitian, block diagonal in m_F, Zeeman part traceless") {
    const auto& c = rb();
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper})
        for (double b : {0.0, 50.0, 169.0, 250.0}) {
            const auto h = build_hamiltonian(*m, b);
            CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
            const auto basis = product_basis(*m);
            double off = 0.0;
            for (Eigen::Index r = 0; r < h.rows(); ++r)
                for (Eigen::Index k = 0; k < h.cols(); ++k)
                    if (std::abs(basis[r].mf() - basis[k].mf()) > 1e-9) off = std::max(off, std::abs(h(r, k)));
            CHECK(off == 0.0);
            const auto hz = zeeman_hamiltonian(*m, b);
            CHECK(std::abs(hz.trace()) <= 1e-9);
            // diagonal Zeeman term mu B (gJ mj + gI mi)
            for (std::size_t r = 0; r < basis.size(); ++r)
                CHECK(hz(r, r).real() ==
                      doctest::Approx(kDefaultBohrMagneton * b * (m->g_j * basis[r].mj + m->g_i * basis[r].mi)));
        }
}

TEST_CASE("negative field and malformed manifolds are rejected") {
    CHECK_THROWS_AS(build_hamiltonian(rb().ground, -1.0), DomainError);
    ManifoldSpec bad = rb().ground;
    bad.j = 0.7;
    CHECK_THROWS_AS(build_hamiltonian(bad, 0.0), StructuralError);
    ManifoldSpec quad = rb().ground;
    quad.b_hfs_mhz = 1.0;
    CHECK_THROWS_AS(build_hamiltonian(quad, 0.0), StructuralError);
}

TEST_CASE("zero field reproduces the analytic hyperfine energies within 1e-6 MHz") {
    const auto& c = rb();
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper}) {
        const auto states = diagonalize_manifold(*m, 0.0);
        for (const auto& z : states) {
            // identify F from the composition: the state is an F eigenstate at B = 0
            double best = 1e9;
            for (double f = std::abs(m->j - m->i); f <= m->j + m->i + 1e-9; f += 1.0)
                best = std::min(best, std::abs(z.energy_mhz - hfs_energy(m->a_hfs_mhz, m->b_hfs_mhz, m->i, m->j, f)));
            CHECK(best <= 1e-6);
        }
        // m_F degeneracy: every F level has 2F+1 members within 1e-9 MHz
        for (double f = std::abs(m->j - m->i); f <= m->j + m->i + 1e-9; f += 1.0) {
            const double ef = hfs_energy(m->a_hfs_mhz, m->b_hfs_mhz, m->i, m->j, f);
            std::vector<double> group;
            for (const auto& z : states)
                if (std::abs(z.energy_mhz - ef) < 1e-3) group.push_back(z.energy_mhz);
            CHECK(group.size() == static_cast<std::size_t>(2 * f + 1));
            if (!group.empty())
                CHECK(*std::max_element(group.begin(), group.end()) - *std::min_element(group.begin(), group.end()) <= 1e-9);
        }
        CHECK(zero_field_energy(*m, m->i + m->j) ==
              doctest::Approx(hfs_energy(m->a_hfs_mhz, m->b_hfs_mhz, m->i, m->j, m->i + m->j)).epsilon(1e-12));
    }
    // 5S1/2 F=1/F=2 splitting is 2 A
    const auto e = energies(diagonalize_manifold(c.ground, 0.0));
    CHECK(e.back() - e.front() == doctest::Approx(2.0 * c.ground.a_hfs_mhz).epsilon(1e-12));
}

TEST_CASE("5S1/2 energies follow the Breit-Rabi formula at every field") {
    for (double b : {0.0, 1.0, 20.0, 100.0, 169.0, 250.0, 300.0}) {
        const auto e = energies(diagonalize_manifold(rb().ground, b));
        const auto oracle = breit_rabi_formula(rb().ground, b);
        REQUIRE(e.size() == oracle.size());
        for (std::size_t k = 0; k < e.size(); ++k) CHECK(e[k] == doctest::Approx(oracle[k]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("eigenvectors: unit norm, single m_F, small residual, dominant weight by brute force") {
    const auto& c = rb();
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper})
        for (double b : {0.0, 169.0, 300.0}) {
            const auto h = build_hamiltonian(*m, b);
            const auto basis = product_basis(*m);
            for (const auto& z : diagonalize_manifold(*m, b)) {
                CHECK(std::abs(z.composition.squaredNorm() - 1.0) <= 1e-12);
                const double resid = (h * z.composition - z.energy_mhz * z.composition).norm();
                CHECK(resid <= 1e-9 * std::max(1.0, h.norm()));
                double wmax = 0.0;
                std::size_t kmax = 0;
                for (std::size_t k = 0; k < basis.size(); ++k) {
                    const double w = std::norm(z.composition[k]);
                    if (w > 1e-14) CHECK(std::abs(basis[k].mf() - z.mf) < 1e-9);
                    if (w > wmax) {
                        wmax = w;
                        kmax = k;
                    }
                }
                CHECK(z.dominant_weight == doctest::Approx(wmax).epsilon(1e-12));
                CHECK(z.dominant.mj == basis[kmax].mj);
                CHECK(z.dominant.mi == basis[kmax].mi);
            }
        }
}

TEST_CASE("high field: 5P3/2 and 5D5/2 are in the Paschen-Back regime at 169 mT") {
    for (const auto* m : {&rb().intermediate, &rb().upper}) {
        const auto s = diagonalize_manifold(*m, 169.0);
        for (const auto& z : s) CHECK(z.dominant_weight > 0.9);
        // clusters by dominant m_J are spaced by gJ muB B
        std::map<double, std::vector<double>> by_mj;
        for (const auto& z : s) by_mj[z.dominant.mj].push_back(z.energy_mhz);
        std::vector<double> means;
        for (auto& [mj, es] : by_mj) {
            double sum = 0.0;
            for (double e : es) sum += e;
            means.push_back(sum / es.size());
        }
        const double pb = m->g_j * kDefaultBohrMagneton * 169.0;
        for (std::size_t k = 1; k < means.size(); ++k)
            CHECK(means[k] - means[k - 1] == doctest::Approx(pb).epsilon(0.02));
    }
}

// The two claims below assume 5S1/2 is in the Paschen-Back regime at 169 mT.
// With A = 3417 MHz, x = (gJ - gI) muB B / (2A) is only 0.69 there, so they
// do not hold; they stay here as documented expected failures.
TEST_CASE("5S1/2 dominant weight above 0.9 at 169 mT" * doctest::should_fail()) {
    for (const auto& z : diagonalize_manifold(rb().ground, 169.0)) CHECK(z.dominant_weight > 0.9);
}

TEST_CASE("5S1/2 energy clusters split by gJ muB B at 169 mT" * doctest::should_fail()) {
    const auto e = energies(diagonalize_manifold(rb().ground, 169.0));
    const double split = (e[4] + e[5] + e[6] + e[7] - e[0] - e[1] - e[2] - e[3]) / 4.0;
    CHECK(split == doctest::Approx(rb().ground.g_j * kDefaultBohrMagneton * 169.0).epsilon(0.1));
}

TEST_CASE("breit-rabi traces are continuous and refine smoothly") {
    auto grid = [](double hi, int n) {
        std::vector<double> g;
        for (int k = 0; k <= n; ++k) g.push_back(hi * k / n);
        return g;
    };
    const auto& c = rb();
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper}) {
        const auto coarse = breit_rabi_curve(*m, grid(200.0, 200));
        const auto fine = breit_rabi_curve(*m, grid(200.0, 400));
        CHECK(coarse.discontinuities.empty());
        CHECK(fine.discontinuities.empty());
        REQUIRE(coarse.indices == fine.indices);
        // second differences scale as h^2 for smooth traces
        auto max_d2 = [](const BreitRabiTable& t) {
            double mx = 0.0;
            for (const auto& tr : t.energies_mhz)
                for (std::size_t k = 1; k + 1 < tr.size(); ++k) mx = std::max(mx, std::abs(tr[k + 1] - 2 * tr[k] + tr[k - 1]));
            return mx;
        };
        const double d2c = max_d2(coarse), d2f = max_d2(fine);
        CHECK(d2f <= 0.35 * d2c + 1e-9);  // 0.25 asymptotically
        // labels agree with the per-field diagonalization
        for (std::size_t s = 0; s < coarse.indices.size(); ++s) {
            const auto st = diagonalize_manifold(*m, 169.0);
            for (const auto& z : st)
                if (z.index == coarse.indices[s]) CHECK(z.energy_mhz == doctest::Approx(coarse.energies_mhz[s][169]));
        }
    }
    CHECK(breit_rabi_curve(c.ground, std::vector<double>{0.0}).energies_mhz.size() == 8);
    CHECK_THROWS_AS(breit_rabi_curve(c.ground, std::vector<double>{10.0, 5.0}), DomainError);
}

TEST_CASE("energies are continuous under a 1e-6 mT field change") {
    const auto& c = rb();
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper})
        for (double b : {0.0, 50.0, 169.0}) {
            const auto a = diagonalize_manifold(*m, b), d = diagonalize_manifold(*m, b + 1e-6);
            std::map<int, double> ea;
            for (const auto& z : a) ea[z.index] = z.energy_mhz;
            for (const auto& z : d) CHECK(std::abs(z.energy_mhz - ea[z.index]) < 1e-3);
        }
}

TEST_CASE("5D5/2 level spacings at 169 mT are tens of MHz inside m_J groups") {
    const auto e = energies(diagonalize_manifold(rb().upper, 169.0));
    // six m_J groups of four, spaced by ~2.8 GHz; inner spacings set by A(5D)
    for (int g = 0; g < 6; ++g)
        for (int k = 0; k < 3; ++k) {
            const double d = e[4 * g + k + 1] - e[4 * g + k];
            CHECK(d > 1.0);
            CHECK(d < 60.0);
        }
    for (int g = 1; g < 6; ++g) CHECK(e[4 * g] - e[4 * g - 1] > 2000.0);
}

TEST_CASE("one-photon selection rules and normalization") {
    const auto& c = rb();
    for (auto p : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi}) {
        const auto lower = diagonalize_manifold(c.ground, 169.0);
        const auto upper = diagonalize_manifold(c.intermediate, 169.0);
        std::map<int, double> mf;
        for (const auto& z : lower) mf[z.index] = z.mf;
        for (const auto& z : upper) mf[z.index] = z.mf;
        double smax = 0.0;
        for (const auto& l : transition_lines(c.ground, c.intermediate, 169.0, p)) {
            CHECK(mf[l.upper] - mf[l.lower] == doctest::Approx(delta_m(p)));
            CHECK(l.strength >= 0.0);
            CHECK(l.strength <= 1.0 + 1e-12);
            smax = std::max(smax, l.strength);
        }
        CHECK(smax > 0.1);
    }
    // the strongest line over all polarizations has strength 1
    double overall = 0.0;
    for (auto p : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi})
        for (const auto& l : transition_lines(c.ground, c.intermediate, 50.0, p)) overall = std::max(overall, l.strength);
    CHECK(overall == doctest::Approx(1.0));
    CHECK_THROWS_AS(transition_lines(c.ground, c.upper, 10.0, Polarization::pi), DomainError);
}

TEST_CASE("line strength sum rule is field independent") {
    const auto& c = rb();
    for (const auto& [lo, up] : {std::pair{&c.ground, &c.intermediate}, std::pair{&c.intermediate, &c.upper}}) {
        std::vector<double> ref;
        for (double b : {0.0, 50.0, 169.0, 250.0}) {
            const auto ls = diagonalize_manifold(*lo, b);
            const auto us = diagonalize_manifold(*up, b);
            std::map<int, double> sums;
            for (auto p : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi}) {
                const auto d = dipole_strengths(*lo, ls, *up, us, p);
                for (std::size_t k = 0; k < ls.size(); ++k) sums[ls[k].index] += d.col(k).sum();
            }
            // total over lower states, also per lower state label
            std::vector<double> v;
            for (auto& [idx, s] : sums) v.push_back(s);
            if (ref.empty()) {
                ref = v;
                // all lower states share the same total at zero field
                for (double s : v) CHECK(s == doctest::Approx(v.front()).epsilon(1e-9));
            } else {
                for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(v[k] - ref[k]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("two-photon bookkeeping and loss-channel classification") {
    const auto& c = rb();
    const TwoPhotonWindow w{-12.742, -20.0, 20.0};
    const auto all = all_two_photon_lines(c, 169.0, w);
    REQUIRE(!all.empty());
    std::map<int, double> e;
    for (const auto* m : {&c.ground, &c.intermediate, &c.upper})
        for (const auto& z : diagonalize_manifold(*m, 169.0)) e[z.index] = z.energy_mhz;
    std::map<int, double> mf;
    for (const auto* m : {&c.ground, &c.upper})
        for (const auto& z : diagonalize_manifold(*m, 169.0)) mf[z.index] = z.mf;
    int non_loss = 0;
    for (const auto& l : all) {
        CHECK(l.signal_detuning_ghz + l.control_detuning_ghz == l.two_photon_ghz);
        CHECK(l.two_photon_ghz == doctest::Approx((e[l.doubly_excited] - e[l.ground]) / 1000.0).epsilon(1e-12));
        CHECK(mf[l.doubly_excited] - mf[l.ground] ==
              doctest::Approx(delta_m(l.signal_pol) + delta_m(l.control_pol)));
        const bool ss = l.signal_pol == Polarization::sigma_minus && l.control_pol == Polarization::sigma_minus;
        CHECK(l.is_loss_channel == !ss);
        non_loss += !l.is_loss_channel;
        CHECK(l.control_detuning_ghz >= w.control_min_ghz);
        CHECK(l.control_detuning_ghz <= w.control_max_ghz);
    }
    CHECK(non_loss > 0);
}

TEST_CASE("two-photon lines match an independent enumeration of level triples") {
    const auto& c = rb();
    const double b = 169.0;
    const TwoPhotonWindow w{-12.742, -30.0, 30.0};
    const auto g = diagonalize_manifold(c.ground, b);
    const auto e = diagonalize_manifold(c.intermediate, b);
    const auto d = diagonalize_manifold(c.upper, b);
    const auto s1 = dipole_strengths(c.ground, g, c.intermediate, e, Polarization::sigma_minus);
    const auto s2 = dipole_strengths(c.intermediate, e, c.upper, d, Polarization::sigma_minus);
    std::set<std::pair<int, int>> oracle;
    double best = 0.0;
    std::map<std::pair<int, int>, double> bare;
    for (std::size_t gi = 0; gi < g.size(); ++gi)
        for (std::size_t di = 0; di < d.size(); ++di) {
            double s = 0.0;
            for (std::size_t ei = 0; ei < e.size(); ++ei) s += s1(ei, gi) * s2(di, ei);
            bare[{g[gi].index, d[di].index}] = s;
            best = std::max(best, s);
        }
    for (auto& [k, s] : bare)
        if (s > 1e-3 * best) oracle.insert(k);
    std::set<std::pair<int, int>> found;
    for (const auto& l : two_photon_lines(c, b, Polarization::sigma_minus, Polarization::sigma_minus, w))
        found.insert({l.ground, l.doubly_excited});
    // every strong path of the brute-force enumeration is reported
    for (const auto& k : oracle) CHECK(found.count(k) == 1);
}

TEST_CASE("zero field: (sigma-, sigma+) lines coincide with (sigma+, sigma-)") {
    const auto& c = rb();
    const TwoPhotonWindow w{-8.0, -20.0, 20.0};
    auto positions = [&](Polarization a, Polarization b) {
        std::vector<double> v;
        for (const auto& l : two_photon_lines(c, 0.0, a, b, w)) v.push_back(l.control_detuning_ghz);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; }), v.end());
        return v;
    };
    const auto mp = positions(Polarization::sigma_minus, Polarization::sigma_plus);
    const auto pm = positions(Polarization::sigma_plus, Polarization::sigma_minus);
    REQUIRE(mp.size() == pm.size());
    for (std::size_t k = 0; k < mp.size(); ++k) CHECK(mp[k] == doctest::Approx(pm[k]).epsilon(1e-9));
}

TEST_CASE("memory line is a strong (sigma-, sigma-) line with one neighbour inside +-0.5 GHz at 169 mT") {
    const auto& c = rb();
    const auto mem = memory_line(c, 169.0);
    CHECK(!mem.is_loss_channel);
    CHECK(mem.signal_detuning_ghz + mem.control_detuning_ghz == mem.two_photon_ghz);
    const auto w = memory_window(c, 169.0);
    const auto lines = two_photon_lines(c, 169.0, Polarization::sigma_minus, Polarization::sigma_minus, w);
    double smax = 0.0;
    for (const auto& l : lines) smax = std::max(smax, l.strength);
    int strong = 0;
    bool has_memory = false;
    for (const auto& l : lines) {
        if (l.strength >= 0.1 * smax) ++strong;
        has_memory |= l.ground == mem.ground && l.doubly_excited == mem.doubly_excited;
    }
    CHECK(has_memory);
    CHECK(strong == 2);
}

TEST_CASE("polarization names round-trip") {
    for (auto p : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi})
        CHECK(parse_polarization(to_string(p)) == p);
    CHECK_THROWS_AS(parse_polarization("circular"), DomainError);
}

}
