#ifndef TPA_METROLOGY_HPP
#define TPA_METROLOGY_HPP

// Fisher information for estimating the TPA parameter Gamma = 1 - exp(-eps):
// SLD-based quantum Fisher information, photon-counting Fisher information,
// a fast path for Fock-diagonal probes, small-Gamma asymptotics, and the
// derived quantum-advantage / counting-efficiency ratios.

#include "tpa/channel.hpp"
#include "tpa/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tpa {

/// Relative eigenvalue floor for the SLD sum: pairs with
/// lambda_k + lambda_l <= cutoff * max(lambda) are dropped.
inline constexpr double kSldCutoff = 1e-12;

/// Probability floor below which photon-counting terms are skipped.
inline constexpr double kProbFloor = 1e-300;

/// d rho/dGamma of the evolved state, by the chain rule through eps:
/// d rho/dGamma = L(rho_eps) / (1 - Gamma).
inline Matrix drho_dgamma(const DensityMatrix& rho_eps, const ChannelPoint& point) {
    if (point.gamma_cap >= 1.0)
        throw std::invalid_argument("drho_dgamma: Gamma = 1 is the estimand boundary");
    return lindblad_apply(rho_eps.elements) / (1.0 - point.gamma_cap);
}

struct SldDecomposition {
    Eigen::VectorXd eigvals;
    Matrix eigvecs;
    Matrix sld;
    double cutoff = 0.0;
};

/// L = 2 sum_{k,l} <l|drho|k> / (lambda_k + lambda_l) |l><k| over retained pairs.
inline SldDecomposition sld(const DensityMatrix& rho, const Matrix& drho,
                            double cutoff_scale = kSldCutoff) {
    const Matrix sym = 0.5 * (rho.elements + rho.elements.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("sld: eigendecomposition failed");
    SldDecomposition out;
    out.eigvals = es.eigenvalues();
    out.eigvecs = es.eigenvectors();
    out.cutoff = cutoff_scale * out.eigvals.maxCoeff();

    const int dim = rho.dim();
    const Matrix m = out.eigvecs.adjoint() * drho * out.eigvecs;
    Matrix l = Matrix::Zero(dim, dim);
    bool any = false;
    for (int k = 0; k < dim; ++k)
        for (int j = 0; j < dim; ++j) {
            const double denom = out.eigvals[k] + out.eigvals[j];
            if (denom <= out.cutoff) continue;
            l(j, k) = 2.0 * m(j, k) / denom;
            any = true;
        }
    if (!any) throw std::runtime_error("sld: state too degenerate, no eigenvalue pair above cutoff");
    out.sld = out.eigvecs * l * out.eigvecs.adjoint();
    return out;
}

namespace detail {

// F_Q = sum_{k,l} 2 |<l|drho|k>|^2 / (lambda_k + lambda_l), the Tr[rho L^2]
// sum written over the retained eigenpairs directly.
inline double qfi_from_derivative(const DensityMatrix& rho, const Matrix& drho,
                                  double cutoff_scale = kSldCutoff) {
    const Matrix sym = 0.5 * (rho.elements + rho.elements.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("qfi: eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    const double cutoff = cutoff_scale * lam.maxCoeff();
    const Matrix m = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    const int dim = rho.dim();
    double f = 0.0;
    for (int k = 0; k < dim; ++k)
        for (int j = 0; j < dim; ++j) {
            const double denom = lam[k] + lam[j];
            if (denom <= cutoff) continue;
            f += 2.0 * std::norm(m(j, k)) / denom;
        }
    return f;
}

inline void require_interior_gamma(double gamma, const char* who) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument(std::string(who) +
                                    ": Gamma must lie strictly inside (0,1)");
}

} // namespace detail

/// QFI with respect to Gamma, reusing a prebuilt channel table (the hot path
/// for probe optimization, where many states share one channel point).
inline double qfi(const ChannelTable& table, const DensityMatrix& probe) {
    const ChannelPoint point = ChannelPoint::from_eps(table.eps());
    detail::require_interior_gamma(point.gamma_cap, "qfi");
    const DensityMatrix rho_eps = table.apply(probe);
    return detail::qfi_from_derivative(rho_eps, drho_dgamma(rho_eps, point));
}

inline double qfi(const DensityMatrix& probe, double gamma) {
    detail::require_interior_gamma(gamma, "qfi");
    return qfi(ChannelTable(probe.dim(), gamma_to_eps(gamma)), probe);
}

inline double qfi(const FockState& probe, double gamma) {
    return qfi(to_density(probe), gamma);
}

/// QFI of a Fock-diagonal probe from the evolved photon-number distribution
/// and its exact eps-derivative; equals qfi() on the corresponding density
/// matrix but needs only the diagonal ladder coefficients.
inline double qfi_diagonal(const std::vector<double>& populations, double gamma) {
    detail::require_interior_gamma(gamma, "qfi_diagonal");
    const int dim = static_cast<int>(populations.size());
    double total = 0.0;
    for (double q : populations) {
        if (q < 0) throw std::invalid_argument("qfi_diagonal: negative population");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("qfi_diagonal: populations must sum to 1");
    const double eps = gamma_to_eps(gamma);
    std::vector<double> p(dim, 0.0), dp(dim, 0.0);
    for (int n = 0; n < dim; ++n) {
        if (populations[n] == 0.0) continue;
        const std::vector<double> v = detail::chain_coefficients(n, n, eps);
        const detail::ChainRates r = detail::chain_rates(n, n);
        for (int k = 0; k < static_cast<int>(v.size()); ++k) {
            double dv = -r.a[k] * v[k];
            if (k >= 1) dv += r.b[k] * v[k - 1];
            p[n - 2 * k] += populations[n] * v[k];
            dp[n - 2 * k] += populations[n] * dv;
        }
    }
    double f_eps = 0.0;
    for (int m = 0; m < dim; ++m) {
        if (p[m] < kProbFloor) continue;
        f_eps += dp[m] * dp[m] / p[m];
    }
    const double dgamma = 1.0 - gamma; // d eps / d Gamma = 1/(1-Gamma)
    return f_eps / (dgamma * dgamma);
}

/// Classical Fisher information of photon counting, with respect to Gamma:
///   F_PN(eps) = sum_n [(n+1)(n+2) p(n+2) - n(n-1) p(n)]^2 / (4 p(n)),
/// then F_PN(Gamma) = F_PN(eps) / (1-Gamma)^2. Terms with p(n) below the
/// floor are skipped; skipped_weight reports the largest numerator dropped.
inline double fi_photon_counting(const DensityMatrix& probe, double gamma,
                                 double* skipped_weight = nullptr) {
    detail::require_interior_gamma(gamma, "fi_photon_counting");
    const double eps = gamma_to_eps(gamma);
    const DensityMatrix rho_eps = propagate_exact(probe, eps);
    const std::vector<double> p = photon_distribution(rho_eps);
    const int dim = rho_eps.dim();
    double f_eps = 0.0, skipped = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double gain = (n + 2 < dim) ? (n + 1.0) * (n + 2.0) * p[n + 2] : 0.0;
        const double num = gain - n * (n - 1.0) * p[n];
        if (p[n] < kProbFloor) {
            skipped = std::max(skipped, std::abs(num));
            continue;
        }
        f_eps += num * num / (4.0 * p[n]);
    }
    if (skipped_weight) *skipped_weight = skipped;
    const double dgamma = 1.0 - gamma;
    return f_eps / (dgamma * dgamma);
}

inline double fi_photon_counting(const FockState& probe, double gamma,
                                 double* skipped_weight = nullptr) {
    return fi_photon_counting(to_density(probe), gamma, skipped_weight);
}

/// Leading small-Gamma behavior F ~ n(n-1)/(2 Gamma) for the Fock probe |n>.
inline double asymptotic_qfi_fock(int n, double gamma) {
    if (gamma <= 0) throw std::invalid_argument("asymptotic_qfi_fock: Gamma must be positive");
    return n * (n - 1.0) / (2.0 * gamma);
}

/// Leading small-Gamma behavior F ~ nbar(N-1)/(2 Gamma) for the ON probe.
inline double asymptotic_qfi_on(double nbar, int n_occ, double gamma) {
    if (gamma <= 0) throw std::invalid_argument("asymptotic_qfi_on: Gamma must be positive");
    return nbar * (n_occ - 1.0) / (2.0 * gamma);
}

/// QA = (F_probe - F_coherent) / F_coherent.
inline double quantum_advantage(double qfi_probe, double qfi_coherent) {
    if (qfi_coherent <= 0)
        throw std::invalid_argument("quantum_advantage: coherent benchmark QFI must be positive");
    return (qfi_probe - qfi_coherent) / qfi_coherent;
}

/// eta_PN = F_PN / F_Q, clamped to 1 when the ratio exceeds 1 within 1e-6.
inline double pn_efficiency(double fi_pn, double qfi_value) {
    if (qfi_value <= 0) throw std::invalid_argument("pn_efficiency: QFI must be positive");
    const double eta = fi_pn / qfi_value;
    if (eta > 1.0 && eta <= 1.0 + 1e-6) return 1.0;
    return eta;
}

/// Conjugation by exp(-i phi n): the phase-shifted probe of the invariance
/// property. Diagonal entries are untouched.
inline DensityMatrix rotate_probe(const DensityMatrix& rho, double phi) {
    const int dim = rho.dim();
    Vector phase(dim);
    for (int n = 0; n < dim; ++n) phase[n] = std::polar(1.0, -phi * n);
    DensityMatrix out;
    out.elements = phase.asDiagonal() * rho.elements * phase.conjugate().asDiagonal();
    return out;
}

/// One channel point's worth of figures of merit for a probe.
struct FisherReport {
    double gamma_cap = 0.0;
    double qfi = 0.0;
    double fi_pn = 0.0;
    double qa = 0.0;
    double eta_pn = 0.0;
};

inline FisherReport fisher_report(const DensityMatrix& probe, double gamma,
                                  double qfi_coherent) {
    FisherReport rep;
    rep.gamma_cap = gamma;
    rep.qfi = qfi(probe, gamma);
    rep.fi_pn = fi_photon_counting(probe, gamma);
    rep.qa = quantum_advantage(rep.qfi, qfi_coherent);
    rep.eta_pn = pn_efficiency(rep.fi_pn, rep.qfi);
    return rep;
}

} // namespace tpa

#endif // TPA_METROLOGY_HPP
