#include "orca/atomic.hpp"

#include "orca/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace orca::atomic {

namespace {

int twice(double x) { return static_cast<int>(std::lround(2.0 * x)); }

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

struct Block {
    double mf = 0.0;
    std::vector<int> members;  // indices into product_basis
};

std::vector<Block> mf_blocks(const std::vector<BasisState>& basis) {
    std::map<int, Block> by_mf;
    for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
        auto& b = by_mf[twice(basis[k].mf())];
        b.mf = basis[k].mf();
        b.members.push_back(k);
    }
    std::vector<Block> out;
    for (auto& [key, b] : by_mf) out.push_back(std::move(b));
    return out;
}

struct RawState {
    double mf;
    int rank;
    double energy;
    Eigen::VectorXcd vec;
};

std::vector<RawState> solve_blocks(const ManifoldSpec& m, double field_mt, double mu_b) {
    const auto basis = product_basis(m);
    const Eigen::MatrixXcd h = build_hamiltonian(m, field_mt, mu_b);
    const double hnorm = std::max(h.norm(), 1.0);
    const int n = static_cast<int>(basis.size());
    std::vector<RawState> out;
    for (const auto& blk : mf_blocks(basis)) {
        const int nb = static_cast<int>(blk.members.size());
        Eigen::MatrixXcd sub(nb, nb);
        for (int r = 0; r < nb; ++r)
            for (int c = 0; c < nb; ++c) sub(r, c) = h(blk.members[r], blk.members[c]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sub);
        if (es.info() != Eigen::Success) {
            std::ostringstream os;
            os << "eigensolver failed for " << m.label << " block m_F=" << blk.mf << " at B=" << field_mt << " mT";
            throw NumericalError(os.str());
        }
        for (int k = 0; k < nb; ++k) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
            Eigen::Index big = 0;
            es.eigenvectors().col(k).cwiseAbs().maxCoeff(&big);
            const std::complex<double> lead = es.eigenvectors()(big, k);
            const std::complex<double> phase = std::conj(lead) / std::abs(lead);
            for (int r = 0; r < nb; ++r) v(blk.members[r]) = es.eigenvectors()(r, k) * phase;
            const double e = es.eigenvalues()(k);
            const double resid = (h * v - e * v).norm();
            if (resid > 1e-9 * hnorm) {
                std::ostringstream os;
                os << "eigenvector residual " << resid << " exceeds bound for " << m.label << " at B=" << field_mt
                   << " mT (|H|=" << hnorm << ")";
                throw NumericalError(os.str());
            }
            out.push_back({blk.mf, k, e, std::move(v)});
        }
    }
    return out;
}

// Map (2 m_F, rank) -> global index, from the ordering at the reference field.
std::map<std::pair<int, int>, int> reference_labels(const ManifoldSpec& m, double mu_b) {
    auto ref = solve_blocks(m, kReferenceFieldMt, mu_b);
    std::stable_sort(ref.begin(), ref.end(), [](const RawState& a, const RawState& b) { return a.energy < b.energy; });
    std::map<std::pair<int, int>, int> labels;
    for (int k = 0; k < static_cast<int>(ref.size()); ++k) labels[{twice(ref[k].mf), ref[k].rank}] = m.first_index + k;
    return labels;
}

} // namespace

int delta_m(Polarization p) {
    switch (p) {
        case Polarization::sigma_plus: return 1;
        case Polarization::sigma_minus: return -1;
        case Polarization::pi: return 0;
    }
    return 0;
}

std::string to_string(Polarization p) {
    switch (p) {
        case Polarization::sigma_plus: return "sigma+";
        case Polarization::sigma_minus: return "sigma-";
        case Polarization::pi: return "pi";
    }
    return "?";
}

Polarization parse_polarization(const std::string& s) {
    if (s == "sigma+" || s == "s+" || s == "+") return Polarization::sigma_plus;
    if (s == "sigma-" || s == "s-" || s == "-") return Polarization::sigma_minus;
    if (s == "pi" || s == "0") return Polarization::pi;
    throw DomainError("unknown polarization '" + s + "' (expected sigma+, sigma- or pi)");
}

double clebsch_gordan(int j1, int m1, int j2, int m2, int j, int m) {
    if (m1 + m2 != m) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m) > j) return 0.0;
    if (j < std::abs(j1 - j2) || j > j1 + j2) return 0.0;
    if ((j1 + j2 + j) % 2 != 0 || (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0) return 0.0;

    const double pre = std::sqrt((j + 1) * factorial((j1 + j2 - j) / 2) * factorial((j1 - j2 + j) / 2) *
                                 factorial((-j1 + j2 + j) / 2) / factorial((j1 + j2 + j) / 2 + 1));
    const double norm = std::sqrt(factorial((j + m) / 2) * factorial((j - m) / 2) * factorial((j1 - m1) / 2) *
                                  factorial((j1 + m1) / 2) * factorial((j2 - m2) / 2) * factorial((j2 + m2) / 2));
    double sum = 0.0;
    for (int k = 0; k <= (j1 + j2 - j) / 2; ++k) {
        const int a = (j1 + j2 - j) / 2 - k;
        const int b = (j1 - m1) / 2 - k;
        const int c = (j2 + m2) / 2 - k;
        const int d = (j - j2 + m1) / 2 + k;
        const int e = (j - j1 - m2) / 2 + k;
        if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
        const double term = 1.0 / (factorial(k) * factorial(a) * factorial(b) * factorial(c) * factorial(d) * factorial(e));
        sum += (k % 2 == 0) ? term : -term;
    }
    return pre * norm * sum;
}

std::vector<BasisState> product_basis(const ManifoldSpec& m) {
    m.validate();
    std::vector<BasisState> out;
    for (int tmj = -twice(m.j); tmj <= twice(m.j); tmj += 2)
        for (int tmi = -twice(m.i); tmi <= twice(m.i); tmi += 2) out.push_back({tmj / 2.0, tmi / 2.0});
    return out;
}

Eigen::MatrixXcd hyperfine_hamiltonian(const ManifoldSpec& m) {
    const auto basis = product_basis(m);
    const int n = static_cast<int>(basis.size());
    const double jj = m.j * (m.j + 1.0);
    const double ii = m.i * (m.i + 1.0);
    Eigen::MatrixXd ij = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        const auto [mj, mi] = basis[a];
        for (int c = 0; c < n; ++c) {
            const auto [mj2, mi2] = basis[c];
            double v = 0.0;
            if (a == c) v += mj * mi;
            if (twice(mj2) == twice(mj) + 2 && twice(mi2) == twice(mi) - 2)
                v += 0.5 * std::sqrt(jj - mj * (mj + 1.0)) * std::sqrt(ii - mi * (mi - 1.0));
            if (twice(mj2) == twice(mj) - 2 && twice(mi2) == twice(mi) + 2)
                v += 0.5 * std::sqrt(jj - mj * (mj - 1.0)) * std::sqrt(ii - mi * (mi + 1.0));
            ij(c, a) = v;
        }
    }
    Eigen::MatrixXd h = m.a_hfs_mhz * ij;
    if (m.b_hfs_mhz != 0.0) {
        const double den = 2.0 * m.i * (2.0 * m.i - 1.0) * m.j * (2.0 * m.j - 1.0);
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        h += m.b_hfs_mhz * (3.0 * ij * ij + 1.5 * ij - ii * jj * id) / den;
    }
    // Round-off in the products above leaves ~1e-16 asymmetry; symmetrize exactly.
    const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
    return sym.cast<std::complex<double>>();
}

Eigen::MatrixXcd zeeman_hamiltonian(const ManifoldSpec& m, double field_mt, double bohr_magneton) {
    const auto basis = product_basis(m);
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) h(k, k) = bohr_magneton * field_mt * (m.g_j * basis[k].mj + m.g_i * basis[k].mi);
    return h;
}

Eigen::MatrixXcd build_hamiltonian(const ManifoldSpec& m, double field_mt, double bohr_magneton) {
    if (!(field_mt >= 0.0)) throw DomainError("magnetic field must be >= 0 mT");
    return hyperfine_hamiltonian(m) + zeeman_hamiltonian(m, field_mt, bohr_magneton);
}

double zero_field_energy(const ManifoldSpec& m, double f) {
    const double ii = m.i * (m.i + 1.0);
    const double jj = m.j * (m.j + 1.0);
    const double k = f * (f + 1.0) - ii - jj;
    double e = 0.5 * m.a_hfs_mhz * k;
    if (m.b_hfs_mhz != 0.0)
        e += m.b_hfs_mhz * (1.5 * k * (k + 1.0) - 2.0 * ii * jj) / (4.0 * m.i * (2.0 * m.i - 1.0) * m.j * (2.0 * m.j - 1.0));
    return e;
}

std::vector<ZeemanState> diagonalize_manifold(const ManifoldSpec& m, double field_mt, double bohr_magneton) {
    if (!(field_mt >= 0.0)) throw DomainError("magnetic field must be >= 0 mT");
    const auto labels = reference_labels(m, bohr_magneton);
    const auto basis = product_basis(m);
    auto raw = solve_blocks(m, field_mt, bohr_magneton);

    std::vector<ZeemanState> out;
    out.reserve(raw.size());
    for (auto& r : raw) {
        ZeemanState s;
        s.manifold = m.label;
        s.index = labels.at({twice(r.mf), r.rank});
        s.energy_mhz = r.energy;
        s.mf = r.mf;
        s.block_rank = r.rank;
        Eigen::Index big = 0;
        s.dominant_weight = r.vec.cwiseAbs2().maxCoeff(&big);
        s.dominant = basis[big];
        s.composition = std::move(r.vec);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const ZeemanState& a, const ZeemanState& b) {
        if (a.energy_mhz != b.energy_mhz) return a.energy_mhz < b.energy_mhz;
        return a.index < b.index;
    });
    return out;
}

BreitRabiTable breit_rabi_curve(const ManifoldSpec& m, std::span<const double> fields_mt, double bohr_magneton) {
    if (fields_mt.empty()) throw DomainError("field grid is empty");
    for (std::size_t k = 1; k < fields_mt.size(); ++k)
        if (!(fields_mt[k] >= fields_mt[k - 1])) throw DomainError("field grid must be sorted ascending");

    BreitRabiTable t;
    t.manifold = m.label;
    t.fields_mt.assign(fields_mt.begin(), fields_mt.end());
    const int n = m.dimension();
    for (int k = 0; k < n; ++k) t.indices.push_back(m.first_index + k);
    t.energies_mhz.assign(n, std::vector<double>(fields_mt.size(), 0.0));

    std::vector<Eigen::VectorXcd> prev(n);
    for (std::size_t p = 0; p < fields_mt.size(); ++p) {
        const auto states = diagonalize_manifold(m, fields_mt[p], bohr_magneton);
        for (const auto& s : states) {
            const int row = s.index - m.first_index;
            t.energies_mhz[row][p] = s.energy_mhz;
            if (p > 0) {
                const double ov = std::abs(prev[row].dot(s.composition));
                if (ov <= 0.5) t.discontinuities.push_back({s.index, p, ov});
            }
            prev[row] = s.composition;
        }
    }
    return t;
}

Eigen::MatrixXd dipole_strengths(const ManifoldSpec& lower, std::span<const ZeemanState> lower_states,
                                 const ManifoldSpec& upper, std::span<const ZeemanState> upper_states,
                                 Polarization p) {
    const auto bl = product_basis(lower);
    const auto bu = product_basis(upper);
    const int q = delta_m(p);
    // Product-basis dipole operator <mj' mi'| d_q |mj mi> = CG(J mj 1 q | J' mj') delta(mi, mi').
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bu.size()), static_cast<Eigen::Index>(bl.size()));
    for (std::size_t a = 0; a < bl.size(); ++a)
        for (std::size_t c = 0; c < bu.size(); ++c) {
            if (twice(bl[a].mi) != twice(bu[c].mi)) continue;
            if (twice(bu[c].mj) != twice(bl[a].mj) + 2 * q) continue;
            d(c, a) = clebsch_gordan(twice(lower.j), twice(bl[a].mj), 2, 2 * q, twice(upper.j), twice(bu[c].mj));
        }
    Eigen::MatrixXcd vl(static_cast<Eigen::Index>(bl.size()), static_cast<Eigen::Index>(lower_states.size()));
    for (std::size_t k = 0; k < lower_states.size(); ++k) vl.col(k) = lower_states[k].composition;
    Eigen::MatrixXcd vu(static_cast<Eigen::Index>(bu.size()), static_cast<Eigen::Index>(upper_states.size()));
    for (std::size_t k = 0; k < upper_states.size(); ++k) vu.col(k) = upper_states[k].composition;
    const Eigen::MatrixXcd amp = vu.adjoint() * d.cast<std::complex<double>>() * vl;
    return amp.cwiseAbs2();
}

std::vector<TransitionLine> transition_lines(const ManifoldSpec& lower, const ManifoldSpec& upper, double field_mt,
                                             Polarization p, double bohr_magneton) {
    if (std::abs(upper.l - lower.l) != 1)
        throw DomainError("dipole-forbidden manifold pair " + lower.label + " -> " + upper.label);
    const auto ls = diagonalize_manifold(lower, field_mt, bohr_magneton);
    const auto us = diagonalize_manifold(upper, field_mt, bohr_magneton);

    double pair_max = 0.0;
    for (auto pol : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi})
        pair_max = std::max(pair_max, dipole_strengths(lower, ls, upper, us, pol).maxCoeff());
    const Eigen::MatrixXd s = dipole_strengths(lower, ls, upper, us, p);

    std::vector<TransitionLine> out;
    for (std::size_t u = 0; u < us.size(); ++u)
        for (std::size_t l = 0; l < ls.size(); ++l) {
            const double raw = s(u, l);
            if (raw < kLineThreshold * pair_max) continue;
            out.push_back({ls[l].index, us[u].index, p, (us[u].energy_mhz - ls[l].energy_mhz) / 1000.0, raw / pair_max, raw});
        }
    std::stable_sort(out.begin(), out.end(),
                     [](const TransitionLine& a, const TransitionLine& b) { return a.detuning_ghz < b.detuning_ghz; });
    return out;
}

namespace {

// Pair-normalized strengths for all polarizations, computed once per call.
struct PairStrengths {
    std::vector<ZeemanState> lower, upper;
    std::map<Polarization, Eigen::MatrixXd> s;  // rows = upper, normalized to the pair maximum
};

PairStrengths pair_strengths(const ManifoldSpec& lo, const ManifoldSpec& up, double field_mt, double mu_b) {
    PairStrengths ps;
    ps.lower = diagonalize_manifold(lo, field_mt, mu_b);
    ps.upper = diagonalize_manifold(up, field_mt, mu_b);
    double mx = 0.0;
    for (auto pol : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi}) {
        ps.s[pol] = dipole_strengths(lo, ps.lower, up, ps.upper, pol);
        mx = std::max(mx, ps.s[pol].maxCoeff());
    }
    for (auto& [pol, m] : ps.s) m /= mx;
    return ps;
}

std::vector<TwoPhotonLine> ladder_lines(const PairStrengths& sp, const PairStrengths& pd, Polarization sig,
                                        Polarization ctrl, const TwoPhotonWindow& w) {
    const auto& gs = sp.lower;
    const auto& es = sp.upper;
    const auto& ds = pd.upper;
    const Eigen::MatrixXd& s1 = sp.s.at(sig);   // [e][g]
    const Eigen::MatrixXd& s2 = pd.s.at(ctrl);  // [d][e]

    std::vector<TwoPhotonLine> all;
    double mx = 0.0;
    for (std::size_t g = 0; g < gs.size(); ++g)
        for (std::size_t d = 0; d < ds.size(); ++d) {
            double total = 0.0, bare = 0.0, best = -1.0;
            std::size_t best_e = 0;
            for (std::size_t e = 0; e < es.size(); ++e) {
                const double prod = s1(e, g) * s2(d, e);
                if (prod == 0.0) continue;
                bare += prod;
                const double dint = w.signal_detuning_ghz - (es[e].energy_mhz - gs[g].energy_mhz) / 1000.0;
                const double c = prod / (1.0 + (dint / kTwoPhotonGammaEffGhz) * (dint / kTwoPhotonGammaEffGhz));
                total += c;
                if (c > best) { best = c; best_e = e; }
            }
            if (total <= 0.0) continue;
            TwoPhotonLine ln;
            ln.ground = gs[g].index;
            ln.intermediate = es[best_e].index;
            ln.doubly_excited = ds[d].index;
            ln.signal_pol = sig;
            ln.control_pol = ctrl;
            ln.signal_detuning_ghz = w.signal_detuning_ghz;
            ln.two_photon_ghz = (ds[d].energy_mhz - gs[g].energy_mhz) / 1000.0;
            ln.control_detuning_ghz = ln.two_photon_ghz - ln.signal_detuning_ghz;
            ln.two_photon_ghz = ln.signal_detuning_ghz + ln.control_detuning_ghz;  // exact sum, not just within rounding
            ln.intermediate_detuning_ghz = w.signal_detuning_ghz - (es[best_e].energy_mhz - gs[g].energy_mhz) / 1000.0;
            ln.strength = total;
            ln.bare_strength = bare;
            ln.is_loss_channel = !(sig == Polarization::sigma_minus && ctrl == Polarization::sigma_minus);
            mx = std::max(mx, total);
            all.push_back(ln);
        }
    std::vector<TwoPhotonLine> out;
    for (const auto& ln : all) {
        if (ln.strength < kLineThreshold * mx) continue;
        if (ln.control_detuning_ghz < w.control_min_ghz || ln.control_detuning_ghz > w.control_max_ghz) continue;
        out.push_back(ln);
    }
    std::stable_sort(out.begin(), out.end(), [](const TwoPhotonLine& a, const TwoPhotonLine& b) {
        return a.control_detuning_ghz < b.control_detuning_ghz;
    });
    return out;
}

void check_window(const TwoPhotonWindow& w) {
    if (!(w.control_max_ghz > w.control_min_ghz)) throw DomainError("two-photon window is empty");
}

} // namespace

std::vector<TwoPhotonLine> two_photon_lines(const AtomicConstants& c, double field_mt, Polarization signal,
                                            Polarization control, const TwoPhotonWindow& window) {
    check_window(window);
    const double mu = c.bohr_magneton_mhz_per_mt;
    const auto sp = pair_strengths(c.ground, c.intermediate, field_mt, mu);
    const auto pd = pair_strengths(c.intermediate, c.upper, field_mt, mu);
    return ladder_lines(sp, pd, signal, control, window);
}

std::vector<TwoPhotonLine> all_two_photon_lines(const AtomicConstants& c, double field_mt,
                                                const TwoPhotonWindow& window) {
    check_window(window);
    const double mu = c.bohr_magneton_mhz_per_mt;
    const auto sp = pair_strengths(c.ground, c.intermediate, field_mt, mu);
    const auto pd = pair_strengths(c.intermediate, c.upper, field_mt, mu);
    std::vector<TwoPhotonLine> out;
    for (auto s : {Polarization::sigma_minus, Polarization::sigma_plus})
        for (auto k : {Polarization::sigma_minus, Polarization::sigma_plus}) {
            auto part = ladder_lines(sp, pd, s, k, window);
            out.insert(out.end(), part.begin(), part.end());
        }
    return out;
}

TwoPhotonLine memory_line(const AtomicConstants& c, double field_mt, double intermediate_detuning_ghz) {
    const double mu = c.bohr_magneton_mhz_per_mt;
    const auto sp = pair_strengths(c.ground, c.intermediate, field_mt, mu);
    const auto pd = pair_strengths(c.intermediate, c.upper, field_mt, mu);
    TwoPhotonWindow wide{0.0, -1e9, 1e9};
    const auto probe = ladder_lines(sp, pd, Polarization::sigma_minus, Polarization::sigma_minus, wide);
    if (probe.empty()) throw DomainError("no (sigma-, sigma-) ladder line");
    const auto best = *std::max_element(probe.begin(), probe.end(), [](const TwoPhotonLine& a, const TwoPhotonLine& b) {
        return a.bare_strength < b.bare_strength;
    });
    const double e_int = best.signal_detuning_ghz - best.intermediate_detuning_ghz;  // E_e - E_g in GHz
    wide.signal_detuning_ghz = e_int + intermediate_detuning_ghz;
    for (const auto& ln : ladder_lines(sp, pd, Polarization::sigma_minus, Polarization::sigma_minus, wide))
        if (ln.ground == best.ground && ln.doubly_excited == best.doubly_excited) return ln;
    throw NumericalError("memory line lost after re-weighting");
}

TwoPhotonWindow memory_window(const AtomicConstants& c, double field_mt, double intermediate_detuning_ghz,
                              double half_width_ghz) {
    const auto m = memory_line(c, field_mt, intermediate_detuning_ghz);
    return {m.signal_detuning_ghz, m.control_detuning_ghz - half_width_ghz, m.control_detuning_ghz + half_width_ghz};
}

} // namespace orca::atomic
