#include "orca/optimizer.hpp"

#include "orca/error.hpp"
#include "orca/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace orca::optimizer {

namespace {

constexpr std::uint64_t kDriftStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNoiseStream = 0xbf58476d1ce4e5b9ULL;

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Simulated binary crossover for one gene.
std::pair<double, double> sbx(double x1, double x2, double lo, double hi, double eta, std::mt19937_64& rng) {
    if (std::abs(x1 - x2) < 1e-14) return {x1, x2};
    const double y1 = std::min(x1, x2), y2 = std::max(x1, x2);
    const double u = uniform(rng);
    auto child = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    const double b1 = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    const double b2 = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    double c1 = 0.5 * ((y1 + y2) - child(b1) * (y2 - y1));
    double c2 = 0.5 * ((y1 + y2) + child(b2) * (y2 - y1));
    c1 = std::clamp(c1, lo, hi);
    c2 = std::clamp(c2, lo, hi);
    if (uniform(rng) < 0.5) std::swap(c1, c2);
    return {c1, c2};
}

double polynomial_mutation(double x, double lo, double hi, double eta, std::mt19937_64& rng) {
    const double span = hi - lo;
    const double d1 = (x - lo) / span, d2 = (hi - x) / span;
    const double u = uniform(rng);
    const double p = 1.0 / (eta + 1.0);
    double dq;
    if (u < 0.5) {
        const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(v, p) - 1.0;
    } else {
        const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(v, p);
    }
    return std::clamp(x + dq * span, lo, hi);
}

struct Individual {
    std::vector<double> x;
    double f = 0.0;
    int rank = 0;
    double crowd = 0.0;
};

// Ranks and crowding of a pool; returns the order of survival.
std::vector<std::size_t> survival_order(std::vector<Individual>& pool) {
    std::vector<std::vector<double>> obj;
    obj.reserve(pool.size());
    for (const auto& p : pool) obj.push_back({p.f});
    const auto rank = non_dominated_rank(obj);
    const int max_rank = rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end());
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (rank[i] == r) front.push_back(i);
        const auto cd = crowding_distance(obj, front);
        for (std::size_t k = 0; k < front.size(); ++k) {
            pool[front[k]].rank = r;
            pool[front[k]].crowd = cd[k];
        }
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pool[a].rank != pool[b].rank) return pool[a].rank < pool[b].rank;
        return pool[a].crowd > pool[b].crowd;
    });
    return order;
}

const Individual& tournament(const std::vector<Individual>& pop, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual& a = pop[pick(rng)];
    const Individual& b = pop[pick(rng)];
    if (a.rank != b.rank) return a.rank < b.rank ? a : b;
    if (a.crowd != b.crowd) return a.crowd > b.crowd ? a : b;
    return uniform(rng) < 0.5 ? a : b;
}

} // namespace

void ParameterSpace::validate() const {
    if (params.empty()) throw DomainError("parameter space is empty");
    for (const auto& p : params) {
        memory::setting_bound(p.name);
        if (!(p.min <= p.max)) throw DomainError("parameter '" + p.name + "': min must not exceed max");
        if (p.resolution < 0.0) throw DomainError("parameter '" + p.name + "': resolution must be >= 0");
    }
}

ParameterSpace ParameterSpace::full() {
    ParameterSpace s;
    for (const auto& b : memory::default_setting_bounds()) s.params.push_back({b.name, b.lower, b.upper, b.resolution});
    return s;
}

ParameterSpace ParameterSpace::slice(const std::vector<std::string>& names) {
    ParameterSpace s;
    for (const auto& n : names) {
        const auto& b = memory::setting_bound(n);
        s.params.push_back({b.name, b.lower, b.upper, b.resolution});
    }
    return s;
}

std::vector<double> ParameterSpace::quantize(std::vector<double> x) const {
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& p = params[k];
        double v = std::clamp(x[k], p.min, p.max);
        if (p.resolution > 0.0) {
            v = p.min + std::round((v - p.min) / p.resolution) * p.resolution;
            if (v > p.max) v -= p.resolution;
            v = std::clamp(v, p.min, p.max);
        }
        x[k] = v;
    }
    return x;
}

bool ParameterSpace::contains(const std::vector<double>& x) const {
    if (x.size() != params.size()) return false;
    for (std::size_t k = 0; k < params.size(); ++k)
        if (!(x[k] >= params[k].min && x[k] <= params[k].max)) return false;
    return true;
}

memory::PulseSettings ParameterSpace::apply(const memory::PulseSettings& base, const std::vector<double>& x) const {
    memory::PulseSettings s = base;
    for (std::size_t k = 0; k < params.size(); ++k) memory::set_setting(s, params[k].name, x[k]);
    return s;
}

std::vector<double> ParameterSpace::extract(const memory::PulseSettings& s) const {
    std::vector<double> x;
    for (const auto& p : params) x.push_back(memory::get_setting(s, p.name));
    return x;
}

double objective(const ParameterSpace& space, const std::vector<double>& x, const memory::PulseSettings& base,
                 const memory::MemoryConfig& config, double drift_offset_ghz, int* faults) {
    if (!space.contains(x)) throw DomainError("objective: parameters outside the space bounds");
    memory::MemoryConfig c = config;
    c.cavity_drift_ghz += drift_offset_ghz;
    try {
        return memory::simulate(c, space.apply(base, x), {false, true}).objective;
    } catch (const Error&) {
        if (faults) ++*faults;
        return 0.0;
    }
}

void GaSettings::validate() const {
    if (population < 8) throw DomainError("GA population must be >= 8");
    if (generations < 0) throw DomainError("GA generations must be >= 0");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
        throw DomainError("GA crossover probability must lie in [0, 1]");
    if (mutation_probability > 1.0) throw DomainError("GA mutation probability must be <= 1");
    if (!(crossover_eta >= 0.0 && mutation_eta >= 0.0)) throw DomainError("GA distribution indices must be >= 0");
    if (noise.relative_sd < 0.0) throw DomainError("objective noise must be >= 0");
}

std::vector<int> non_dominated_rank(const std::vector<std::vector<double>>& obj) {
    const std::size_t n = obj.size();
    auto dominates = [&](std::size_t a, std::size_t b) {
        bool strictly = false;
        for (std::size_t m = 0; m < obj[a].size(); ++m) {
            if (obj[a][m] < obj[b][m]) return false;
            if (obj[a][m] > obj[b][m]) strictly = true;
        }
        return strictly;
    };
    std::vector<int> rank(n, 0), count(n, 0);
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> current;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            if (dominates(a, b)) dominated[a].push_back(b);
            else if (dominates(b, a)) ++count[a];
        }
        if (count[a] == 0) current.push_back(a);
    }
    int r = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t a : current) {
            rank[a] = r;
            for (std::size_t b : dominated[a])
                if (--count[b] == 0) next.push_back(b);
        }
        current = std::move(next);
        ++r;
    }
    return rank;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& obj, const std::vector<std::size_t>& front) {
    const std::size_t n = front.size();
    std::vector<double> d(n, 0.0);
    if (n <= 2) {
        std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
        return d;
    }
    const std::size_t m = obj[front[0]].size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return obj[front[a]][k] < obj[front[b]][k]; });
        const double lo = obj[front[order.front()]][k], hi = obj[front[order.back()]][k];
        d[order.front()] = d[order.back()] = std::numeric_limits<double>::infinity();
        if (hi <= lo) continue;
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[order[i]] += (obj[front[order[i + 1]]][k] - obj[front[order[i - 1]]][k]) / (hi - lo);
    }
    return d;
}

double drift_offset(const DriftModel& d, std::uint64_t seed, int generation) {
    if (!d.enabled) return 0.0;
    double jitter = 0.0;
    if (d.noise_sd_ghz > 0.0) {
        std::mt19937_64 rng(seed ^ kDriftStream ^ (static_cast<std::uint64_t>(generation) * 0x100000001b3ULL));
        jitter = std::normal_distribution<double>(0.0, d.noise_sd_ghz)(rng);
    }
    return d.drift_rate_ghz * generation + jitter;
}

OptimizationTrace run_ga(const ParameterSpace& space, const memory::PulseSettings& base,
                         const memory::MemoryConfig& config, const DriftModel& drift, const GaSettings& ga,
                         std::uint64_t seed) {
    space.validate();
    ga.validate();
    config.validate();
    const std::size_t dim = space.size();
    const double pm = ga.mutation_probability < 0.0 ? 1.0 / static_cast<double>(dim) : ga.mutation_probability;
    std::mt19937_64 rng(seed);

    OptimizationTrace trace;
    trace.seed = seed;
    trace.settings = ga;
    trace.drift = drift;
    trace.space = space;

    auto evaluate = [&](std::vector<Individual>& group, double offset, int gen, int& faults) {
        std::vector<int> f(group.size(), 0);
        const auto values = parallel_map(
            group.size(),
            [&](std::size_t k) {
                int local = 0;
                double v = objective(space, group[k].x, base, config, offset, &local);
                if (ga.noise.relative_sd > 0.0) {
                    std::mt19937_64 nrng(seed ^ kNoiseStream ^ (static_cast<std::uint64_t>(gen) << 20) ^ k);
                    v *= 1.0 + std::normal_distribution<double>(0.0, ga.noise.relative_sd)(nrng);
                }
                f[k] = local;
                return v;
            },
            ga.threads);
        for (std::size_t k = 0; k < group.size(); ++k) {
            group[k].f = values[k];
            faults += f[k];
        }
    };

    std::vector<Individual> pop;
    if (!ga.initial_population.empty()) {
        for (const auto& x : ga.initial_population) {
            if (!space.contains(x)) throw DomainError("initial population member outside the space");
            pop.push_back({x});
        }
        if (static_cast<int>(pop.size()) != ga.population)
            throw DomainError("initial population size differs from the population setting");
    } else {
        if (ga.seed_with_base) pop.push_back({space.quantize(space.extract(base))});
        while (static_cast<int>(pop.size()) < ga.population) {
            std::vector<double> x(dim);
            for (std::size_t k = 0; k < dim; ++k)
                x[k] = space.params[k].min + uniform(rng) * (space.params[k].max - space.params[k].min);
            pop.push_back({space.quantize(std::move(x))});
        }
    }

    double best_so_far = -std::numeric_limits<double>::infinity();
    auto record = [&](int gen, double offset, int evals, int faults) {
        const auto it = std::max_element(pop.begin(), pop.end(),
                                         [](const Individual& a, const Individual& b) { return a.f < b.f; });
        double mean = 0.0;
        for (const auto& p : pop) mean += p.f;
        mean /= static_cast<double>(pop.size());
        best_so_far = std::max(best_so_far, it->f);
        trace.records.push_back({gen, it->x, it->f, mean, best_so_far, offset, evals, faults});
    };

    {
        int faults = 0;
        const double off = drift_offset(drift, seed, 0);
        evaluate(pop, off, 0, faults);
        survival_order(pop);
        record(0, off, static_cast<int>(pop.size()), faults);
    }

    for (int gen = 1; gen <= ga.generations; ++gen) {
        int faults = 0, evals = 0;
        const double off = drift_offset(drift, seed, gen);
        if (drift.enabled) {
            evaluate(pop, off, gen, faults);
            evals += static_cast<int>(pop.size());
            survival_order(pop);
        }
        std::vector<Individual> kids;
        while (static_cast<int>(kids.size()) < ga.population) {
            Individual a{tournament(pop, rng).x}, b{tournament(pop, rng).x};
            if (uniform(rng) < ga.crossover_probability)
                for (std::size_t k = 0; k < dim; ++k) {
                    if (uniform(rng) > 0.5) continue;
                    auto [c1, c2] = sbx(a.x[k], b.x[k], space.params[k].min, space.params[k].max, ga.crossover_eta, rng);
                    a.x[k] = c1;
                    b.x[k] = c2;
                }
            for (auto* c : {&a, &b}) {
                for (std::size_t k = 0; k < dim; ++k)
                    if (uniform(rng) < pm && space.params[k].max > space.params[k].min)
                        c->x[k] = polynomial_mutation(c->x[k], space.params[k].min, space.params[k].max, ga.mutation_eta, rng);
                c->x = space.quantize(std::move(c->x));
            }
            kids.push_back(std::move(a));
            if (static_cast<int>(kids.size()) < ga.population) kids.push_back(std::move(b));
        }
        evaluate(kids, off, gen, faults);
        evals += static_cast<int>(kids.size());

        std::vector<Individual> pool = pop;
        pool.insert(pool.end(), kids.begin(), kids.end());
        const auto order = survival_order(pool);
        std::vector<Individual> next;
        for (std::size_t k = 0; k < static_cast<std::size_t>(ga.population); ++k) next.push_back(pool[order[k]]);
        pop = std::move(next);
        survival_order(pop);
        record(gen, off, evals, faults);
    }
    for (const auto& p : pop) {
        trace.final_population.push_back(p.x);
        trace.final_objectives.push_back(p.f);
    }
    return trace;
}

GridResult grid_search(const ParameterSpace& space, const memory::PulseSettings& base,
                       const memory::MemoryConfig& config, int points, unsigned threads) {
    space.validate();
    if (space.size() > 2) throw DomainError("grid_search supports at most two parameters");
    if (points < 1) throw DomainError("grid_search: points must be >= 1");
    GridResult g;
    g.space = space;
    std::size_t total = 1;
    for (const auto& p : space.params) {
        std::vector<double> axis;
        if (p.max == p.min || points == 1) {
            axis.push_back(p.min);
        } else {
            for (int i = 0; i < points; ++i) axis.push_back(p.min + (p.max - p.min) * i / (points - 1));
        }
        total *= axis.size();
        g.axes.push_back(std::move(axis));
    }
    if (total > 1000000) throw DomainError("grid_search: more than 1e6 grid points");
    auto point = [&](std::size_t idx) {
        std::vector<double> x(space.size());
        for (std::size_t k = space.size(); k-- > 0;) {
            x[k] = g.axes[k][idx % g.axes[k].size()];
            idx /= g.axes[k].size();
        }
        return x;
    };
    g.values = parallel_map(total, [&](std::size_t i) { return objective(space, point(i), base, config, 0.0); }, threads);
    const auto it = std::max_element(g.values.begin(), g.values.end());
    g.best_value = *it;
    g.best_point = point(static_cast<std::size_t>(it - g.values.begin()));
    return g;
}

} // namespace orca::optimizer
