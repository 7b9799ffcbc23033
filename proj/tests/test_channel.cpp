#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tpa/channel.hpp"

#include <cmath>
#include <random>

using namespace tpa;

TEST_CASE("gamma <-> eps conversion") {
    CHECK(gamma_to_eps(0.0) == 0.0);
    CHECK(eps_to_gamma(0.0) == 0.0);
    CHECK(gamma_to_eps(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    for (double g : {1e-9, 1e-3, 0.3, 0.9, 1.0 - 1e-12})
        CHECK(eps_to_gamma(gamma_to_eps(g)) == doctest::Approx(g).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_to_eps(1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_to_eps(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(eps_to_gamma(-1.0), std::invalid_argument);
}

TEST_CASE("two-photon decay closed forms") {
    // |2>: p_2 = e^{-eps}, p_0 = 1 - e^{-eps}; |3>: p_3 = e^{-3 eps}
    for (double eps : {0.05, 0.4, 1.3, 4.0}) {
        CHECK(klimov_coefficient(2, 2, 0, eps) == doctest::Approx(std::exp(-eps)).epsilon(1e-13));
        CHECK(klimov_coefficient(2, 2, 1, eps) ==
              doctest::Approx(1.0 - std::exp(-eps)).epsilon(1e-12));
        CHECK(klimov_coefficient(3, 3, 0, eps) ==
              doctest::Approx(std::exp(-3.0 * eps)).epsilon(1e-13));
        CHECK(klimov_coefficient(3, 3, 1, eps) ==
              doctest::Approx(1.0 - std::exp(-3.0 * eps)).epsilon(1e-12));
    }
}

TEST_CASE("coefficient sum rule and positivity") {
    for (int n : {4, 7, 12, 25, 60}) {
        for (double eps : {0.01, 0.3, 2.0, 8.0}) {
            double sum = 0.0;
            for (int k = 0; 2 * k <= n; ++k) {
                const double a = klimov_coefficient(n, n, k, eps);
                CHECK(a >= -1e-13);
                sum += a;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("coefficient derivative matches finite differences") {
    const double h = 1e-6;
    for (int n : {3, 6, 11}) {
        for (int k = 0; 2 * k <= n; ++k) {
            for (double eps : {0.2, 1.0}) {
                const double fd = (klimov_coefficient(n, n, k, eps + h) -
                                   klimov_coefficient(n, n, k, eps - h)) /
                                  (2.0 * h);
                const double d = klimov_coefficient_deriv(n, n, k, eps);
                CHECK(d == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("spectral and uniformized routes agree") {
    for (int n : {10, 40, 90, 160}) {
        for (double eps : {1e-3, 0.05, 0.5, 3.0}) {
            const std::vector<double> u = detail::chain_uniformized(n, n, eps);
            const std::vector<double> hybrid = detail::chain_coefficients(n, n, eps);
            for (size_t k = 0; k < u.size(); ++k)
                CHECK(hybrid[k] == doctest::Approx(u[k]).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("fixed points: vacuum and |1>") {
    for (double eps : {0.5, 5.0}) {
        const DensityMatrix v = propagate_exact(to_density(make_fock(0, 4)), eps);
        CHECK(v.elements(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
        const DensityMatrix one = propagate_exact(to_density(make_fock(1, 4)), eps);
        CHECK(one.elements(1, 1).real() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("propagate at eps = 0 is the identity") {
    const DensityMatrix rho = to_density(make_dv({0.3, 0.2, 0.8, 0.1}, 4));
    const DensityMatrix out = propagate_exact(rho, 0.0);
    CHECK((out.elements - rho.elements).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact propagation matches RK4 on random states") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> dims(3, 12);
    for (int s = 0; s < 15; ++s) {
        const int dim = dims(rng);
        std::vector<double> c(dim);
        for (double& v : c) v = uni(rng);
        const DensityMatrix rho0 = to_density(make_dv(c, dim));
        for (double eps : {0.1, 1.0, 3.0}) {
            const DensityMatrix a = propagate_exact(rho0, eps);
            const DensityMatrix b = propagate_ode(rho0, eps);
            CHECK((a.elements - b.elements).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
}

TEST_CASE("semigroup property") {
    const DensityMatrix rho0 = to_density(make_dv({0.4, 0.1, 0.6, 0.3, 0.5, 0.2, 0.1}, 7));
    for (auto [e1, e2] : {std::pair{0.2, 0.7}, std::pair{1.1, 0.4}, std::pair{0.05, 3.0}}) {
        const DensityMatrix split = propagate_exact(propagate_exact(rho0, e1), e2);
        const DensityMatrix joint = propagate_exact(rho0, e1 + e2);
        CHECK((split.elements - joint.elements).cwiseAbs().maxCoeff() <= 1e-11);
    }
}

TEST_CASE("trace preservation, positivity, parity, energy monotone") {
    const DensityMatrix rho0 = to_density(make_coherent(2.0, 48, 1e-11));
    double parity0 = 0.0;
    for (int n = 0; n < rho0.dim(); n += 2) parity0 += rho0.elements(n, n).real();
    double prev_energy = mean_photon(rho0);
    for (double eps : {0.1, 0.5, 1.5, 4.0, 10.0}) {
        const DensityMatrix rho = propagate_exact(rho0, eps);
        CHECK(rho.elements.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
        std::string why;
        CHECK(is_physical(rho, &why));
        double parity = 0.0;
        for (int n = 0; n < rho.dim(); n += 2) parity += rho.elements(n, n).real();
        CHECK(parity == doctest::Approx(parity0).epsilon(1e-11));
        const double energy = mean_photon(rho);
        CHECK(energy <= prev_energy + 1e-12);
        prev_energy = energy;
    }
}

TEST_CASE("channel table matches per-coefficient evaluation") {
    const ChannelTable table(9, 0.8);
    for (int n = 0; n < 9; ++n)
        for (int np = 0; np <= n; ++np)
            for (int k = 0; 2 * k <= np; ++k)
                CHECK(table.coefficient(n, np, k) ==
                      doctest::Approx(klimov_coefficient(n, np, k, 0.8)).epsilon(1e-14));
}

TEST_CASE("generator consistency at short times") {
    const DensityMatrix rho0 = to_density(make_dv({0.5, 0.2, 0.7, 0.1, 0.4}, 5));
    const double h = 1e-7;
    const Matrix fd = (propagate_exact(rho0, h).elements - rho0.elements) / h;
    const Matrix gen = lindblad_apply(rho0.elements);
    CHECK((fd - gen).cwiseAbs().maxCoeff() / gen.cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(klimov_coefficient(3, 3, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(klimov_coefficient(3, 3, 0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(propagate_exact(to_density(make_fock(0, 2)), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ChannelTable(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(propagate_ode(to_density(make_fock(0, 2)), 1.0, 0), std::invalid_argument);
}
