#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "arisim/config.hpp"
#include "arisim/geometry.hpp"
#include "arisim/rng.hpp"

// Max-min rate phase-shift search: rank-based fitness scaling, stochastic
// universal sampling, single-point crossover, uniform mutation, elite
// preservation. One sequential RNG stream drives init/selection/variation so
// a run is reproducible from its seed alone.

namespace arisim {

struct Individual {
    PhaseVector chromosome;
    double raw_fitness = 0.0;
    int rank = 0;
    double expected_fitness = 0.0;
};

struct GaTracePoint {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
};

struct GaResult {
    PhaseVector best;
    double best_fitness = 0.0;
    std::vector<GaTracePoint> trace;
    int generations = 0;
    bool stalled = false;
};

// Sorts descending by raw fitness (stable: ties keep the lower original
// index first), assigns 1-based ranks and the scaled scores
// f_i^e = (1/sqrt(r_i)) / sum_j 1/sqrt(r_j), which sum to one.
inline void fitness_scale(std::vector<Individual>& pop) {
    std::stable_sort(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
        return a.raw_fitness > b.raw_fitness;
    });
    double norm = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) norm += 1.0 / std::sqrt(double(i + 1));
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].rank = int(i) + 1;
        pop[i].expected_fitness = (1.0 / std::sqrt(double(i + 1))) / norm;
    }
}

// Stochastic universal sampling: one random start in [0, 1/n_parents), then
// equally spaced pointers over the cumulative expected-fitness line. Returns
// indices into pop; each individual appears floor or ceil of
// n_parents * f^e times.
inline std::vector<int> sus_select(const std::vector<Individual>& pop, int n_parents,
                                   RngStream& rng) {
    std::vector<int> parents;
    parents.reserve(std::size_t(n_parents));
    const double step = 1.0 / double(n_parents);
    double pointer = rng.uniform() * step;
    double cum = 0.0;
    std::size_t i = 0;
    for (int j = 0; j < n_parents; ++j) {
        while (i < pop.size() && cum + pop[i].expected_fitness < pointer) {
            cum += pop[i].expected_fitness;
            ++i;
        }
        parents.push_back(int(std::min(i, pop.size() - 1)));
        pointer += step;
    }
    return parents;
}

// Single-point crossover: genes 1..n from a, n+1..N from b, n uniform in [1,N].
inline PhaseVector crossover_pair(const PhaseVector& a, const PhaseVector& b,
                                  RngStream& rng) {
    const int N = int(a.theta.size());
    const int cut = std::min(N, 1 + int(rng.uniform() * double(N)));
    PhaseVector child;
    child.theta.resize(std::size_t(N));
    for (int n = 0; n < N; ++n)
        child.theta[std::size_t(n)] = n < cut ? a.theta[std::size_t(n)] : b.theta[std::size_t(n)];
    return child;
}

// Each gene independently redrawn uniform in [0, 2pi) with probability p_m.
inline PhaseVector mutate_one(const PhaseVector& parent, double p_m, RngStream& rng) {
    PhaseVector child = parent;
    for (auto& t : child.theta) {
        const double u = rng.uniform();
        if (u < p_m) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return child;
}

// Generic max-min GA over the phase vector. `objective` must be pure; it is
// typically the closed-form min-user rate.
inline GaResult ga_optimize(const std::function<double(const PhaseVector&)>& objective,
                            int N, const GaParams& params, std::uint64_t seed) {
    GaParams p = params;
    if (p.max_iters <= 0) p.max_iters = 100 * N;
    if (p.elites + p.crossover + p.mutation != p.population)
        throw ConfigError(ConfigErrorKind::BadValue,
                          "GA counts must satisfy N_e + N_c + N_m = N_p");
    if (p.elites < 1)
        throw ConfigError(ConfigErrorKind::BadValue, "GA needs at least one elite");
    if (!(p.mutation_prob > 0.0 && p.mutation_prob <= 1.0))
        throw ConfigError(ConfigErrorKind::BadValue, "GA mutation probability must be in (0,1]");

    RngStream rng(seed, 0, StreamTag::GaInit);
    RngStream sel_rng(seed, 0, StreamTag::GaSelect);

    std::vector<Individual> pop(std::size_t(p.population));
    for (auto& ind : pop) {
        ind.chromosome.theta.resize(std::size_t(N));
        for (auto& t : ind.chromosome.theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        ind.raw_fitness = objective(ind.chromosome);
    }

    GaResult res;
    std::vector<double> best_history;
    for (int gen = 0; gen < p.max_iters; ++gen) {
        fitness_scale(pop); // sorted descending afterwards

        double mean = 0.0;
        for (const auto& ind : pop) mean += ind.raw_fitness;
        mean /= double(pop.size());
        res.trace.push_back({gen, pop[0].raw_fitness, mean});
        best_history.push_back(pop[0].raw_fitness);
        res.generations = gen + 1;

        // stall: average per-generation gain of the best fitness over the
        // window (elitism makes gains nonnegative)
        if (int(best_history.size()) > p.stall_window) {
            const std::size_t last = best_history.size() - 1;
            const double gain = best_history[last] - best_history[last - std::size_t(p.stall_window)];
            if (gain / double(p.stall_window) < p.stall_tol) {
                res.stalled = true;
                break;
            }
        }
        if (gen + 1 == p.max_iters) break;

        std::vector<Individual> next;
        next.reserve(pop.size());
        for (int e = 0; e < p.elites; ++e) next.push_back(pop[std::size_t(e)]);

        const auto cross_parents = sus_select(pop, 2 * p.crossover, sel_rng);
        for (int i = 0; i < p.crossover; ++i) {
            Individual child;
            child.chromosome = crossover_pair(pop[std::size_t(cross_parents[std::size_t(2 * i)])].chromosome,
                                              pop[std::size_t(cross_parents[std::size_t(2 * i + 1)])].chromosome,
                                              sel_rng);
            child.raw_fitness = objective(child.chromosome);
            next.push_back(std::move(child));
        }
        const auto mut_parents = sus_select(pop, p.mutation, sel_rng);
        for (int i = 0; i < p.mutation; ++i) {
            Individual child;
            child.chromosome = mutate_one(pop[std::size_t(mut_parents[std::size_t(i)])].chromosome,
                                          p.mutation_prob, sel_rng);
            child.raw_fitness = objective(child.chromosome);
            next.push_back(std::move(child));
        }
        pop = std::move(next);
    }

    fitness_scale(pop);
    res.best = pop[0].chromosome;
    res.best_fitness = pop[0].raw_fitness;
    return res;
}

} // namespace arisim
