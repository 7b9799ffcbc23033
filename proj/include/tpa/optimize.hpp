#ifndef TPA_OPTIMIZE_HPP
#define TPA_OPTIMIZE_HPP

// QFI maximization over discrete-variable probes sum_j c_j |j> at fixed
// Gamma and fixed mean photon number. The search variable is the population
// vector p_j = c_j^2, for which both constraints are linear; a global
// evolution-strategy stage is refined by projected gradient ascent.

#include "tpa/channel.hpp"
#include "tpa/fock.hpp"
#include "tpa/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tpa {

struct OptConfig {
    double nbar = 2.0;
    int nmax = 10;
    double gamma_cap = 0.5;
    int population = 64;
    int generations = 200;
    double mutation_sigma = 0.3;
    double sigma_decay = 0.985;
    int local_iters = 500;
    double local_step = 1e-2;
    std::uint64_t seed = 0;
    int restarts = 8;
};

struct LocalOptimum {
    std::vector<double> populations;
    double qfi = 0.0;
};

struct OptResult {
    std::vector<double> populations; // length nmax+1
    double qfi = 0.0;
    bool converged = false;
    std::vector<LocalOptimum> local_optima; // distinct runners-up, best first
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double simplex_sum(const std::vector<double>& x, double mu, double nu,
                          double* moment = nullptr) {
    double s = 0.0, m = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        const double v = x[j] - mu - nu * static_cast<double>(j);
        if (v > 0) {
            s += v;
            m += v * static_cast<double>(j);
        }
    }
    if (moment) *moment = m;
    return s;
}

// Inner multiplier: for fixed nu, sum_j max(0, x_j - mu - nu j) is strictly
// decreasing in mu; bisect to pin it at 1.
inline double solve_mu(const std::vector<double>& x, double nu) {
    double lo = 1e300, hi = -1e300;
    for (size_t j = 0; j < x.size(); ++j) {
        const double v = x[j] - nu * static_cast<double>(j);
        lo = std::min(lo, v - 1.0);
        hi = std::max(hi, v);
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (simplex_sum(x, mid, nu) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Euclidean projection onto {p >= 0, sum p = 1, sum j p_j = nbar} by dual
/// bisection on the two KKT multipliers (p_j = max(0, x_j - mu - nu j); the
/// constrained mean is monotone in nu).
inline std::vector<double> project_constraints(const std::vector<double>& p, double nbar) {
    const int nmax = static_cast<int>(p.size()) - 1;
    if (nmax < 0) throw std::invalid_argument("project_constraints: empty vector");
    if (nbar < 0 || nbar > nmax)
        throw std::invalid_argument("project_constraints: mean photon number infeasible");
    std::vector<double> out(p.size(), 0.0);
    if (nmax == 0 || nbar == 0.0) {
        out[0] = 1.0;
        if (nbar == nmax) out.assign(p.size(), 0.0), out[nmax] = 1.0;
        return out;
    }
    if (nbar == nmax) {
        out[nmax] = 1.0;
        return out;
    }

    auto mean_at = [&](double nu) {
        const double mu = detail::solve_mu(p, nu);
        double moment = 0.0;
        detail::simplex_sum(p, mu, nu, &moment);
        return moment;
    };
    // mean_at is non-increasing in nu; expand a bracket then bisect.
    double lo = -1.0, hi = 1.0;
    while (mean_at(lo) < nbar && lo > -1e12) lo *= 2.0;
    while (mean_at(hi) > nbar && hi < 1e12) hi *= 2.0;
    double nu = 0.0, mu = 0.0;
    for (int it = 0; it < 80; ++it) {
        nu = 0.5 * (lo + hi);
        if (mean_at(nu) > nbar)
            lo = nu;
        else
            hi = nu;
    }
    nu = 0.5 * (lo + hi);
    mu = detail::solve_mu(p, nu);
    for (int j = 0; j <= nmax; ++j) out[j] = std::max(0.0, p[j] - mu - nu * j);
    double s = 0.0;
    for (int j = 0; j <= nmax; ++j) s += out[j];
    for (int j = 0; j <= nmax; ++j) out[j] /= s; // sweep rounding residual
    return out;
}

/// Exact QFI of ON(nbar, N) for every feasible N; ties broken toward smaller N.
struct OnScan {
    int n_best = 0;
    std::vector<int> n_values;
    std::vector<double> qfi_by_n;
};

inline OnScan on_scan(double nbar, double gamma, int nmax) {
    if (nbar > nmax) throw std::invalid_argument("on_scan: nbar exceeds nmax");
    OnScan scan;
    const int dim = nmax + 1;
    const ChannelTable table(dim, gamma_to_eps(gamma));
    const int n_lo = std::max(1, static_cast<int>(std::ceil(nbar)));
    double best = -1.0;
    for (int n = n_lo; n <= nmax; ++n) {
        const double f = qfi(table, to_density(make_on(nbar, n, dim)));
        scan.n_values.push_back(n);
        scan.qfi_by_n.push_back(f);
        if (f > best) {
            best = f;
            scan.n_best = n;
        }
    }
    return scan;
}

/// Global (evolution strategy) + local (projected gradient ascent) search for
/// the population vector maximizing the QFI at one channel point. Deterministic
/// for a fixed config: every restart owns a sub-seeded RNG stream.
inline OptResult optimize_probe(const OptConfig& cfg) {
    if (cfg.nbar > cfg.nmax)
        throw std::invalid_argument("optimize_probe: nbar exceeds nmax");
    if (!(cfg.gamma_cap > 0.0 && cfg.gamma_cap < 1.0))
        throw std::invalid_argument("optimize_probe: Gamma must lie in (0,1)");
    const int dim = cfg.nmax + 1;
    const ChannelTable table(dim, gamma_to_eps(cfg.gamma_cap));

    auto objective = [&](const std::vector<double>& pops) {
        std::vector<double> amps(pops.size());
        for (size_t j = 0; j < pops.size(); ++j) amps[j] = std::sqrt(std::max(0.0, pops[j]));
        return qfi(table, to_density(make_dv(amps, dim)));
    };

    struct RestartOutcome {
        std::vector<double> populations;
        double qfi = 0.0;
        bool converged = false;
    };
    std::vector<RestartOutcome> outcomes;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        std::mt19937_64 rng(detail::splitmix64(cfg.seed + 0x100ULL * restart));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::exponential_distribution<double> expo(1.0);

        // --- global stage: elitist ES with projection repair ---
        const int pop_size = cfg.population;
        const int elites = std::max(1, pop_size / 4);
        std::vector<std::vector<double>> pop(pop_size);
        std::vector<double> fitness(pop_size);
        for (int i = 0; i < pop_size; ++i) {
            std::vector<double> x(dim);
            for (double& v : x) v = expo(rng);
            pop[i] = project_constraints(x, cfg.nbar);
            fitness[i] = objective(pop[i]);
        }
        double sigma = cfg.mutation_sigma;
        std::vector<int> order(pop_size);
        for (int gen = 0; gen < cfg.generations; ++gen) {
            for (int i = 0; i < pop_size; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return fitness[a] > fitness[b]; });
            std::vector<std::vector<double>> next(pop_size);
            std::vector<double> next_fit(pop_size);
            for (int i = 0; i < elites; ++i) {
                next[i] = pop[order[i]];
                next_fit[i] = fitness[order[i]];
            }
            std::uniform_int_distribution<int> pick(0, elites - 1);
            for (int i = elites; i < pop_size; ++i) {
                std::vector<double> x = next[pick(rng)];
                for (double& v : x) v += sigma * gauss(rng);
                next[i] = project_constraints(x, cfg.nbar);
                next_fit[i] = objective(next[i]);
            }
            pop = std::move(next);
            fitness = std::move(next_fit);
            sigma *= cfg.sigma_decay;
        }
        int best_i = 0;
        for (int i = 1; i < pop_size; ++i)
            if (fitness[i] > fitness[best_i]) best_i = i;

        // --- local stage: projected gradient ascent, finite differences ---
        std::vector<double> x = pop[best_i];
        double fx = fitness[best_i];
        bool converged = false;
        const double h = 1e-5;
        for (int it = 0; it < cfg.local_iters; ++it) {
            std::vector<double> grad(dim);
            for (int j = 0; j < dim; ++j) {
                std::vector<double> xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                grad[j] = (objective(project_constraints(xp, cfg.nbar)) -
                           objective(project_constraints(xm, cfg.nbar))) /
                          (2.0 * h);
            }
            double step = cfg.local_step;
            double fnew = fx;
            std::vector<double> xnew = x;
            for (int bt = 0; bt < 30; ++bt) {
                std::vector<double> cand(dim);
                for (int j = 0; j < dim; ++j) cand[j] = x[j] + step * grad[j];
                cand = project_constraints(cand, cfg.nbar);
                const double fc = objective(cand);
                if (fc > fx) {
                    fnew = fc;
                    xnew = std::move(cand);
                    break;
                }
                step *= 0.5;
            }
            if (fnew <= fx * (1.0 + 1e-9)) {
                if (fnew > fx) {
                    x = std::move(xnew);
                    fx = fnew;
                }
                converged = true;
                break;
            }
            x = std::move(xnew);
            fx = fnew;
        }
        outcomes.push_back({std::move(x), fx, converged});
    }

    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const RestartOutcome& a, const RestartOutcome& b) {
                         return a.qfi > b.qfi;
                     });

    OptResult result;
    result.seed = cfg.seed;
    result.populations = outcomes.front().populations;
    result.qfi = outcomes.front().qfi;
    result.converged = outcomes.front().converged;
    auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0.0;
        for (size_t j = 0; j < a.size(); ++j) d += std::abs(a[j] - b[j]);
        return d;
    };
    for (size_t i = 1; i < outcomes.size(); ++i) {
        bool distinct = l1(outcomes[i].populations, result.populations) > 0.05;
        for (const LocalOptimum& seen : result.local_optima)
            if (l1(outcomes[i].populations, seen.populations) <= 0.05) distinct = false;
        if (distinct)
            result.local_optima.push_back({outcomes[i].populations, outcomes[i].qfi});
    }
    return result;
}

} // namespace tpa

#endif // TPA_OPTIMIZE_HPP
