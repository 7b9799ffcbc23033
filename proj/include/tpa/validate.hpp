#ifndef TPA_VALIDATE_HPP
#define TPA_VALIDATE_HPP

// Self-contained invariant suites behind the `validate` CLI command.

#include "tpa/channel.hpp"
#include "tpa/fock.hpp"
#include "tpa/metrology.hpp"
#include "tpa/optimize.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace tpa {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline DensityMatrix random_dv_density(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> c(dim);
    for (double& v : c) v = uni(rng);
    return to_density(make_dv(c, dim));
}

} // namespace detail

inline std::vector<CheckResult> run_validation(bool full) {
    std::vector<CheckResult> results;
    auto check = [&](const std::string& name, const std::function<double()>& residual,
                     double tol) {
        CheckResult r;
        r.name = name;
        try {
            const double res = residual();
            r.pass = res <= tol;
            r.detail = "residual " + std::to_string(res) + " (tol " + std::to_string(tol) + ")";
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        results.push_back(std::move(r));
    };

    check("constructor mean photon number", [] {
        double worst = 0.0;
        worst = std::max(worst, std::abs(mean_photon(make_coherent_auto(2.0)) - 2.0));
        worst = std::max(worst, std::abs(mean_photon(make_squeezed_vacuum_auto(2.0)) - 2.0));
        worst = std::max(worst, std::abs(mean_photon(make_on(2.0, 5, 8)) - 2.0));
        worst = std::max(worst, std::abs(mean_photon(make_fock(3, 6)) - 3.0));
        return worst;
    }, 1e-9);

    check("squeezed vacuum odd levels empty", [] {
        const FockState sv = make_squeezed_vacuum_auto(2.0);
        double worst = 0.0;
        for (int n = 1; n < sv.dim; n += 2) worst = std::max(worst, std::abs(sv.amplitudes[n]));
        return worst;
    }, 0.0);

    check("Gamma <-> eps round trip", [] {
        double worst = 0.0;
        for (double g : {1e-6, 0.1, 0.5, 0.99, 1.0 - 1e-9})
            worst = std::max(worst, std::abs(eps_to_gamma(gamma_to_eps(g)) - g));
        return worst;
    }, 1e-14);

    check("two-level closed form |2>", [] {
        double worst = 0.0;
        for (double eps : {0.1, 0.7, 2.0}) {
            const DensityMatrix rho = propagate_exact(to_density(make_fock(2, 3)), eps);
            worst = std::max(worst, std::abs(rho.elements(2, 2).real() - std::exp(-eps)));
            worst = std::max(worst, std::abs(rho.elements(0, 0).real() - (1 - std::exp(-eps))));
        }
        return worst;
    }, 1e-12);

    check("trace / positivity / parity / energy monotone", [] {
        const DensityMatrix rho0 = to_density(make_coherent(2.0, 40, 1e-10));
        double worst = 0.0;
        double prev_energy = mean_photon(rho0);
        double parity0 = 0.0;
        for (int n = 0; n < rho0.dim(); n += 2) parity0 += rho0.elements(n, n).real();
        for (double eps : {0.05, 0.2, 0.8, 2.0, 5.0, 10.0}) {
            const DensityMatrix rho = propagate_exact(rho0, eps);
            worst = std::max(worst, std::abs(rho.elements.trace().real() - 1.0));
            std::string why;
            if (!is_physical(rho, &why)) return 1.0;
            double parity = 0.0;
            for (int n = 0; n < rho.dim(); n += 2) parity += rho.elements(n, n).real();
            worst = std::max(worst, std::abs(parity - parity0));
            const double energy = mean_photon(rho);
            if (energy > prev_energy + 1e-12) return 1.0;
            prev_energy = energy;
        }
        return worst;
    }, 1e-12);

    check("generator consistency", [] {
        const DensityMatrix rho0 = to_density(make_dv({0.5, 0.3, 0.6, 0.2, 0.5}, 5));
        const double h = 1e-6;
        const Matrix fd = (propagate_exact(rho0, h).elements - rho0.elements) / h;
        const Matrix gen = lindblad_apply(rho0.elements);
        return ((fd - gen).cwiseAbs().maxCoeff()) / gen.cwiseAbs().maxCoeff();
    }, 1e-4);

    check("semigroup property", [] {
        const DensityMatrix rho0 = to_density(make_dv({0.2, 0.4, 0.5, 0.1, 0.6, 0.4}, 6));
        const DensityMatrix two_step = propagate_exact(propagate_exact(rho0, 0.4), 0.9);
        const DensityMatrix one_step = propagate_exact(rho0, 1.3);
        return (two_step.elements - one_step.elements).cwiseAbs().maxCoeff();
    }, 1e-10);

    check("exact channel vs RK4 oracle", [&] {
        std::mt19937_64 rng(12345);
        const int samples = full ? 50 : 10;
        const std::vector<double> eps_grid =
            full ? std::vector<double>{0.1, 0.5, 1.0, 3.0} : std::vector<double>{0.5};
        double worst = 0.0;
        std::uniform_int_distribution<int> dims(3, 12);
        for (int s = 0; s < samples; ++s) {
            const DensityMatrix rho0 = detail::random_dv_density(rng, dims(rng));
            for (double eps : eps_grid) {
                const DensityMatrix a = propagate_exact(rho0, eps);
                const DensityMatrix b = propagate_ode(rho0, eps);
                worst = std::max(worst, (a.elements - b.elements).cwiseAbs().maxCoeff());
            }
        }
        return worst;
    }, 1e-8);

    check("QFI closed forms |2>, |3>", [] {
        double worst = 0.0;
        for (double g : {0.1, 0.5, 0.9}) {
            const double f2 = qfi(make_fock(2, 3), g);
            worst = std::max(worst, std::abs(f2 - 1.0 / (g * (1 - g))) / f2);
            const double f3 = qfi(make_fock(3, 4), g);
            const double u = 1 - g;
            const double ref = 9 * u + 9 * std::pow(u, 4) / (1 - u * u * u);
            worst = std::max(worst, std::abs(f3 - ref) / ref);
        }
        return worst;
    }, 1e-10);

    check("diagonal fast path equals SLD route", [&] {
        std::mt19937_64 rng(777);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double worst = 0.0;
        const int samples = full ? 20 : 5;
        for (int s = 0; s < samples; ++s) {
            const int dim = 4 + static_cast<int>(uni(rng) * 8);
            std::vector<double> q(dim);
            double tot = 0.0;
            for (double& v : q) tot += (v = uni(rng));
            for (double& v : q) v /= tot;
            DensityMatrix rho;
            rho.elements = Matrix::Zero(dim, dim);
            for (int n = 0; n < dim; ++n) rho.elements(n, n) = q[n];
            for (double g : {0.2, 0.6}) {
                const double a = qfi_diagonal(q, g);
                const double b = qfi(rho, g);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, b));
            }
        }
        return worst;
    }, 1e-9);

    check("photon counting bounded by QFI", [] {
        double worst = -1.0;
        for (double g : {0.05, 0.3, 0.8}) {
            for (const FockState& probe :
                 {make_coherent(2.0, 48, 1e-10), make_on(2.0, 4, 6), make_fock(3, 4)}) {
                const double f = qfi(probe, g);
                const double fpn = fi_photon_counting(probe, g);
                worst = std::max(worst, (fpn - f) / f);
            }
        }
        return worst;
    }, 1e-6);

    check("phase invariance of QFI", [&] {
        const std::vector<double> gammas = full ? std::vector<double>{0.01, 0.3, 0.9}
                                                : std::vector<double>{0.3};
        double worst = 0.0;
        for (double g : gammas) {
            for (const FockState& probe :
                 {make_coherent_auto(2.0), make_squeezed_vacuum_auto(2.0)}) {
                const double f0 = qfi(probe, g);
                for (double phi : {0.3, 1.0, 2.2}) {
                    const double f = qfi(rotate_probe(to_density(probe), phi), g);
                    worst = std::max(worst, std::abs(f - f0) / f0);
                }
            }
        }
        return worst;
    }, 1e-8);

    if (full) {
        check("optimizer dominates baselines", [] {
            OptConfig cfg;
            cfg.nbar = 2.0;
            cfg.nmax = 10;
            cfg.restarts = 4;
            cfg.generations = 120;
            double worst = 0.0;
            for (double g : {0.05, 0.3, 0.6}) {
                cfg.gamma_cap = g;
                const OptResult res = optimize_probe(cfg);
                double base = qfi(make_coherent_auto(2.0), g);
                base = std::max(base, qfi(make_squeezed_vacuum_auto(2.0), g));
                base = std::max(base, qfi(make_fock(2, 11), g));
                const OnScan scan = on_scan(2.0, g, 10);
                for (double f : scan.qfi_by_n) base = std::max(base, f);
                worst = std::max(worst, (base - res.qfi) / base);
            }
            return worst;
        }, 1e-6);
    }

    return results;
}

} // namespace tpa

#endif // TPA_VALIDATE_HPP
