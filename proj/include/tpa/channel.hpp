#ifndef TPA_CHANNEL_HPP
#define TPA_CHANNEL_HPP

// Exact propagation through the two-photon-absorption channel
//   d rho / d eps = J rho J^+ - (1/2){J^+ J, rho},   J = a^2 / sqrt(2),
// via the finite series solution on each Fock outer product, plus a
// fixed-step RK4 integrator of the same generator as an independent oracle.

#include "tpa/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tpa {

inline double gamma_to_eps(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma_to_eps: gamma must lie in [0,1)");
    return -std::log1p(-gamma);
}

inline double eps_to_gamma(double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps_to_gamma: eps must be nonnegative");
    return -std::expm1(-eps);
}

/// The estimand pair (Gamma, eps) with Gamma = 1 - exp(-eps).
struct ChannelPoint {
    double gamma_cap = 0.0;
    double eps = 0.0;

    static ChannelPoint from_gamma(double gamma) { return {gamma, gamma_to_eps(gamma)}; }
    static ChannelPoint from_eps(double eps) { return {eps_to_gamma(eps), eps}; }
};

/// Action of the TPA Lindbladian in matrix elements:
///   (d rho)_{n,n'} = (1/2) sqrt((n+1)(n+2)(n'+1)(n'+2)) rho_{n+2,n'+2}
///                  - (1/4) [n(n-1) + n'(n'-1)] rho_{n,n'}.
inline Matrix lindblad_apply(const Matrix& rho) {
    const int dim = static_cast<int>(rho.rows());
    Matrix out(dim, dim);
    for (int n = 0; n < dim; ++n) {
        for (int np = 0; np < dim; ++np) {
            Complex v = -0.25 * (n * (n - 1.0) + np * (np - 1.0)) * rho(n, np);
            if (n + 2 < dim && np + 2 < dim) {
                v += 0.5 *
                     std::sqrt((n + 1.0) * (n + 2.0) * (np + 1.0) * (np + 2.0)) *
                     rho(n + 2, np + 2);
            }
            out(n, np) = v;
        }
    }
    return out;
}

inline DensityMatrix lindblad_apply(const DensityMatrix& rho) {
    return DensityMatrix{lindblad_apply(rho.elements)};
}

namespace detail {

// The channel restricted to one ladder {|n-2k><n'-2k|, k = 0..K} is a linear
// ODE with lower-bidiagonal generator: decay rates a_k and gain couplings b_k.
struct ChainRates {
    std::vector<double> a; // a_k = [(n-2k)(n-2k-1) + (n'-2k)(n'-2k-1)] / 4
    std::vector<double> b; // b_k = sqrt((n-2k+1)(n-2k+2)(n'-2k+1)(n'-2k+2)) / 2
};

inline ChainRates chain_rates(int n, int nprime) {
    const int kmax = std::min(n, nprime) / 2;
    ChainRates r;
    r.a.resize(kmax + 1);
    r.b.assign(kmax + 1, 0.0);
    for (int k = 0; k <= kmax; ++k) {
        const double m = n - 2.0 * k, mp = nprime - 2.0 * k;
        r.a[k] = 0.25 * (m * (m - 1.0) + mp * (mp - 1.0));
        if (k >= 1)
            r.b[k] = 0.5 * std::sqrt((n - 2.0 * k + 1.0) * (n - 2.0 * k + 2.0) *
                                     (nprime - 2.0 * k + 1.0) * (nprime - 2.0 * k + 2.0));
    }
    return r;
}

// Series solution on one ladder. Each l-term is assembled in log space (the
// anticommutator denominators are strictly positive) and the alternating sum
// is compensated in extended precision. max_log_term reports the largest
// term magnitude, which bounds the cancellation error of the result.
inline std::vector<double> chain_spectral(int n, int nprime, double eps,
                                          double* max_log_term = nullptr) {
    const int kmax = std::min(n, nprime) / 2;
    std::vector<double> out(kmax + 1);
    double maxlog = -1e300;
    double log_pref = 0.0; // log sqrt(n!/(n-2k)! n'!/(n'-2k)!)
    for (int k = 0; k <= kmax; ++k) {
        if (k >= 1)
            log_pref += 0.5 * std::log((n - 2.0 * k + 1.0) * (n - 2.0 * k + 2.0) *
                                       (nprime - 2.0 * k + 1.0) * (nprime - 2.0 * k + 2.0));
        const int m = n - 2 * k;
        const int mp = nprime - 2 * k;
        long double sum = 0.0L, comp = 0.0L;
        for (int l = 0; l <= k; ++l) {
            const double kappa = (m + 2.0 * l) * (m + 2.0 * l - 1.0) +
                                 (mp + 2.0 * l) * (mp + 2.0 * l - 1.0);
            double log_den = std::lgamma(k - l + 1.0) + std::lgamma(l + 1.0);
            for (int j = 0; j <= k; ++j) {
                if (j == l) continue;
                log_den += std::log(2.0 * (m + mp) + 4.0 * (j + l) - 2.0);
            }
            const double log_mag = log_pref - log_den - eps * kappa / 4.0;
            maxlog = std::max(maxlog, log_mag);
            const long double mag = std::exp(static_cast<long double>(log_mag));
            const long double term = (l % 2 == 0) ? mag : -mag;
            const long double y = term - comp;
            const long double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        out[k] = static_cast<double>(sum);
    }
    if (max_log_term) *max_log_term = maxlog;
    return out;
}

// Uniformization of the same ladder ODE: exp(B eps) e_0 expanded as a Poisson
// mixture of powers of the substochastic matrix P = I + B/theta. All entries
// are nonnegative, so there is no cancellation at any eps; weights are kept
// rescaled to dodge under/overflow of the Poisson factors.
inline std::vector<double> chain_uniformized(int n, int nprime, double eps) {
    const ChainRates r = chain_rates(n, nprime);
    const int kmax = static_cast<int>(r.a.size()) - 1;
    std::vector<double> out(kmax + 1, 0.0);
    const double theta = r.a[0];
    if (theta == 0.0 || eps == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double x = theta * eps;
    std::vector<double> v(kmax + 1, 0.0), pv(kmax + 1);
    v[0] = 1.0;
    double w = 1.0; // true Poisson weight = w * exp(log_scale)
    double log_scale = -x;
    for (int k = 0; k <= kmax; ++k) out[k] += w * v[k];
    const long jmax = static_cast<long>(x + 12.0 * std::sqrt(x + 20.0) + 30.0);
    for (long j = 1; j <= jmax; ++j) {
        for (int k = kmax; k >= 0; --k) {
            double t = (1.0 - r.a[k] / theta) * v[k];
            if (k >= 1) t += (r.b[k] / theta) * v[k - 1];
            pv[k] = t;
        }
        std::swap(v, pv);
        w *= x / j;
        for (int k = 0; k <= kmax; ++k) out[k] += w * v[k];
        if (w > 1e270) {
            for (double& o : out) o /= 1e270;
            w /= 1e270;
            log_scale += std::log(1e270);
        }
    }
    const double scale = std::exp(log_scale);
    for (double& o : out) o *= scale;
    return out;
}

// Max log term beyond which the alternating series loses more than ~1e-13
// absolutely; calibrated against the uniformized route.
inline constexpr double kSpectralLogGuard = 2.3; // term magnitude ~ 10

inline std::vector<double> chain_coefficients(int n, int nprime, double eps) {
    double maxlog = 0.0;
    std::vector<double> out = chain_spectral(n, nprime, eps, &maxlog);
    if (maxlog > kSpectralLogGuard) out = chain_uniformized(n, nprime, eps);
    return out;
}

} // namespace detail

/// Weight A_k(n, n'; eps) of |n-2k><n'-2k| in the channel image of |n><n'|.
inline double klimov_coefficient(int n, int nprime, int k, double eps) {
    if (n < 0 || nprime < 0 || k < 0 || 2 * k > std::min(n, nprime))
        throw std::invalid_argument("klimov_coefficient: need 0 <= 2k <= min(n, n')");
    if (eps < 0) throw std::invalid_argument("klimov_coefficient: eps must be nonnegative");
    return detail::chain_coefficients(n, nprime, eps)[k];
}

/// d/d eps of A_k, obtained from the ladder generator acting on the exact
/// coefficients: dA_k = -a_k A_k + b_k A_{k-1}.
inline double klimov_coefficient_deriv(int n, int nprime, int k, double eps) {
    if (n < 0 || nprime < 0 || k < 0 || 2 * k > std::min(n, nprime))
        throw std::invalid_argument("klimov_coefficient_deriv: need 0 <= 2k <= min(n, n')");
    if (eps < 0)
        throw std::invalid_argument("klimov_coefficient_deriv: eps must be nonnegative");
    const std::vector<double> v = detail::chain_coefficients(n, nprime, eps);
    const detail::ChainRates r = detail::chain_rates(n, nprime);
    double d = -r.a[k] * v[k];
    if (k >= 1) d += r.b[k] * v[k - 1];
    return d;
}

/// All transition weights for one dimension and one eps, built once so a
/// sweep over many input states at the same channel point reuses them.
class ChannelTable {
public:
    ChannelTable(int dim, double eps) : dim_(dim), eps_(eps) {
        if (dim <= 0) throw std::invalid_argument("ChannelTable: dim must be positive");
        if (eps < 0) throw std::invalid_argument("ChannelTable: eps must be nonnegative");
        offsets_.resize(static_cast<size_t>(dim) * dim, 0);
        size_t total = 0;
        for (int n = 0; n < dim; ++n)
            for (int np = 0; np <= n; ++np) {
                offsets_[index(n, np)] = total;
                total += static_cast<size_t>(np / 2) + 1;
            }
        coeff_.resize(total);
        for (int n = 0; n < dim; ++n)
            for (int np = 0; np <= n; ++np) {
                const std::vector<double> a = detail::chain_coefficients(n, np, eps);
                std::copy(a.begin(), a.end(), coeff_.begin() + offsets_[index(n, np)]);
            }
    }

    int dim() const { return dim_; }
    double eps() const { return eps_; }

    double coefficient(int n, int nprime, int k) const {
        const int lo = std::min(n, nprime), hi = std::max(n, nprime);
        return coeff_[offsets_[index(hi, lo)] + k];
    }

    /// rho_eps(n-2k, n'-2k) += A_k(n, n'; eps) rho0(n, n'); lower triangle
    /// computed, upper mirrored.
    Matrix apply(const Matrix& rho0) const {
        if (rho0.rows() != dim_ || rho0.cols() != dim_)
            throw std::invalid_argument("ChannelTable::apply: dimension mismatch");
        Matrix out = Matrix::Zero(dim_, dim_);
        for (int n = 0; n < dim_; ++n)
            for (int np = 0; np <= n; ++np) {
                const Complex r = rho0(n, np);
                if (r == Complex(0.0, 0.0)) continue;
                const double* a = coeff_.data() + offsets_[index(n, np)];
                const int kmax = np / 2;
                for (int k = 0; k <= kmax; ++k) out(n - 2 * k, np - 2 * k) += a[k] * r;
            }
        for (int n = 0; n < dim_; ++n)
            for (int np = n + 1; np < dim_; ++np) out(n, np) = std::conj(out(np, n));
        return out;
    }

    DensityMatrix apply(const DensityMatrix& rho0) const {
        return DensityMatrix{apply(rho0.elements)};
    }

private:
    size_t index(int n, int np) const { return static_cast<size_t>(n) * dim_ + np; }

    int dim_;
    double eps_;
    std::vector<size_t> offsets_;
    std::vector<double> coeff_;
};

inline DensityMatrix propagate_exact(const DensityMatrix& rho0, double eps) {
    if (eps < 0) throw std::invalid_argument("propagate_exact: eps must be nonnegative");
    if (eps == 0.0) return rho0;
    return ChannelTable(rho0.dim(), eps).apply(rho0);
}

inline int default_ode_steps(double eps) {
    return std::max(1000, static_cast<int>(std::ceil(eps * 2000.0)));
}

/// Classical fixed-step RK4 integration of the generator; the independent
/// cross-check for propagate_exact.
inline DensityMatrix propagate_ode(const DensityMatrix& rho0, double eps, int steps) {
    if (eps < 0) throw std::invalid_argument("propagate_ode: eps must be nonnegative");
    if (steps < 1) throw std::invalid_argument("propagate_ode: steps must be >= 1");
    if (eps == 0.0) return rho0;
    const double h = eps / steps;
    Matrix rho = rho0.elements;
    for (int i = 0; i < steps; ++i) {
        const Matrix k1 = lindblad_apply(rho);
        const Matrix k2 = lindblad_apply(rho + (h / 2) * k1);
        const Matrix k3 = lindblad_apply(rho + (h / 2) * k2);
        const Matrix k4 = lindblad_apply(rho + h * k3);
        rho += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return DensityMatrix{std::move(rho)};
}

inline DensityMatrix propagate_ode(const DensityMatrix& rho0, double eps) {
    return propagate_ode(rho0, eps, default_ode_steps(eps));
}

} // namespace tpa

#endif // TPA_CHANNEL_HPP
