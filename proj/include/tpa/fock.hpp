#ifndef TPA_FOCK_HPP
#define TPA_FOCK_HPP

// Single-mode bosonic states in a truncated Fock basis {|0>, ..., |D-1>}.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpa {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Pure state c_0|0> + c_1|1> + ... + c_{D-1}|D-1>.
/// tail_mass is the probability discarded by truncating at dimension D,
/// audited at construction time; amplitudes are renormalized afterwards.
struct FockState {
    int dim = 0;
    Vector amplitudes;
    double tail_mass = 0.0;
};

/// Mixed state <n|rho|n'> on the same truncated basis.
struct DensityMatrix {
    Matrix elements;

    int dim() const { return static_cast<int>(elements.rows()); }
};

/// Default truncation-tail budget for Gaussian state constructors.
inline constexpr double kDefaultTailTol = 1e-12;

inline FockState make_fock(int n, int dim) {
    if (dim <= 0) throw std::invalid_argument("make_fock: dim must be positive");
    if (n < 0 || n >= dim)
        throw std::invalid_argument("make_fock: photon number " + std::to_string(n) +
                                    " outside basis of dimension " + std::to_string(dim));
    FockState psi;
    psi.dim = dim;
    psi.amplitudes = Vector::Zero(dim);
    psi.amplitudes[n] = 1.0;
    psi.tail_mass = 0.0;
    return psi;
}

namespace detail {

inline FockState finalize_truncated(std::vector<double> coeffs, double tail_tol,
                                    const char* who) {
    const int dim = static_cast<int>(coeffs.size());
    double norm2 = 0.0;
    for (double c : coeffs) norm2 += c * c;
    const double tail = std::max(0.0, 1.0 - norm2);
    if (tail > tail_tol)
        throw std::runtime_error(std::string(who) + ": truncation tail " +
                                 std::to_string(tail) + " exceeds tolerance; raise the basis dimension");
    FockState psi;
    psi.dim = dim;
    psi.tail_mass = tail;
    psi.amplitudes = Vector::Zero(dim);
    const double scale = 1.0 / std::sqrt(norm2);
    for (int n = 0; n < dim; ++n) psi.amplitudes[n] = coeffs[n] * scale;
    return psi;
}

} // namespace detail

/// Coherent state |alpha> with real alpha = sqrt(nbar);
/// c_n = exp(-nbar/2) sqrt(nbar^n / n!), built from amplitude ratios.
inline FockState make_coherent(double nbar, int dim, double tail_tol = kDefaultTailTol) {
    if (nbar < 0) throw std::invalid_argument("make_coherent: nbar must be nonnegative");
    if (dim <= 0) throw std::invalid_argument("make_coherent: dim must be positive");
    std::vector<double> c(dim, 0.0);
    c[0] = std::exp(-0.5 * nbar);
    for (int n = 1; n < dim; ++n) c[n] = c[n - 1] * std::sqrt(nbar / n);
    return detail::finalize_truncated(std::move(c), tail_tol, "make_coherent");
}

/// Squeezed vacuum with real squeezing r = asinh(sqrt(nbar)).
/// Populations |c_{2m}|^2 = tanh^{2m}(r) (2m)!/(2^m m!)^2 / cosh(r); odd levels
/// are exactly zero. The amplitude signs alternate as (-1)^m; all Fisher
/// quantities are independent of that convention.
inline FockState make_squeezed_vacuum(double nbar, int dim, double tail_tol = kDefaultTailTol) {
    if (nbar < 0) throw std::invalid_argument("make_squeezed_vacuum: nbar must be nonnegative");
    if (dim <= 0) throw std::invalid_argument("make_squeezed_vacuum: dim must be positive");
    const double r = std::asinh(std::sqrt(nbar));
    const double th = std::tanh(r);
    std::vector<double> c(dim, 0.0);
    double mag = 1.0 / std::sqrt(std::cosh(r)); // |c_0|
    int sign = 1;
    for (int m = 0; 2 * m < dim; ++m) {
        c[2 * m] = sign * mag;
        sign = -sign;
        // |c_{2(m+1)}| / |c_{2m}| = tanh(r) sqrt((2m+1)/(2m+2))
        mag *= th * std::sqrt((2.0 * m + 1.0) / (2.0 * m + 2.0));
    }
    return detail::finalize_truncated(std::move(c), tail_tol, "make_squeezed_vacuum");
}

/// ON state sqrt(1 - nbar/N)|0> + sqrt(nbar/N)|N>.
inline FockState make_on(double nbar, int n_occ, int dim) {
    if (n_occ <= 0 || n_occ >= dim)
        throw std::invalid_argument("make_on: occupation must satisfy 0 < N < dim");
    if (nbar < 0 || nbar > n_occ)
        throw std::invalid_argument("make_on: mean photon number must lie in [0, N]");
    FockState psi;
    psi.dim = dim;
    psi.amplitudes = Vector::Zero(dim);
    const double pN = nbar / n_occ;
    psi.amplitudes[0] = std::sqrt(1.0 - pN);
    psi.amplitudes[n_occ] = std::sqrt(pN);
    psi.tail_mass = 0.0;
    return psi;
}

/// General finite superposition with real nonnegative coefficients,
/// normalized on construction.
inline FockState make_dv(const std::vector<double>& coeffs, int dim) {
    if (coeffs.empty() || static_cast<int>(coeffs.size()) > dim)
        throw std::invalid_argument("make_dv: need 1..dim coefficients");
    double norm2 = 0.0;
    for (double c : coeffs) {
        if (c < 0) throw std::invalid_argument("make_dv: coefficients must be nonnegative");
        norm2 += c * c;
    }
    if (norm2 == 0.0) throw std::invalid_argument("make_dv: zero state");
    FockState psi;
    psi.dim = dim;
    psi.amplitudes = Vector::Zero(dim);
    const double scale = 1.0 / std::sqrt(norm2);
    for (int n = 0; n < static_cast<int>(coeffs.size()); ++n)
        psi.amplitudes[n] = coeffs[n] * scale;
    psi.tail_mass = 0.0;
    return psi;
}

/// Smallest power-of-two dimension whose truncation tail fits the budget.
template <typename Builder>
int auto_dimension(Builder&& build, double tail_tol = kDefaultTailTol, int dim0 = 16,
                   int dim_max = 4096) {
    for (int dim = dim0; dim <= dim_max; dim *= 2) {
        try {
            build(dim, tail_tol);
            return dim;
        } catch (const std::runtime_error&) {
            // tail too heavy at this dimension
        }
    }
    throw std::runtime_error("auto_dimension: tail tolerance unreachable below dim_max");
}

inline FockState make_coherent_auto(double nbar, double tail_tol = kDefaultTailTol) {
    const int dim = auto_dimension(
        [&](int d, double t) { return make_coherent(nbar, d, t); }, tail_tol);
    return make_coherent(nbar, dim, tail_tol);
}

inline FockState make_squeezed_vacuum_auto(double nbar, double tail_tol = kDefaultTailTol) {
    const int dim = auto_dimension(
        [&](int d, double t) { return make_squeezed_vacuum(nbar, d, t); }, tail_tol);
    return make_squeezed_vacuum(nbar, dim, tail_tol);
}

inline DensityMatrix to_density(const FockState& psi) {
    DensityMatrix rho;
    rho.elements = psi.amplitudes * psi.amplitudes.adjoint();
    return rho;
}

inline std::vector<double> photon_distribution(const DensityMatrix& rho) {
    std::vector<double> p(rho.dim());
    for (int n = 0; n < rho.dim(); ++n) p[n] = rho.elements(n, n).real();
    return p;
}

inline double mean_photon(const DensityMatrix& rho) {
    double nbar = 0.0;
    for (int n = 0; n < rho.dim(); ++n) nbar += n * rho.elements(n, n).real();
    return nbar;
}

inline double mean_photon(const FockState& psi) {
    double nbar = 0.0;
    for (int n = 0; n < psi.dim; ++n) nbar += n * std::norm(psi.amplitudes[n]);
    return nbar;
}

/// Sanity checks for a physical density matrix; returns the reason on failure.
inline bool is_physical(const DensityMatrix& rho, std::string* why = nullptr,
                        double herm_tol = 1e-12, double trace_tol = 1e-10,
                        double eig_tol = 1e-10) {
    const Matrix& m = rho.elements;
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) {
        if (why) *why = "not Hermitian (defect " + std::to_string(herm) + ")";
        return false;
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > trace_tol) {
        if (why) *why = "trace " + std::to_string(tr);
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -eig_tol) {
        if (why) *why = "negative eigenvalue " + std::to_string(lmin);
        return false;
    }
    return true;
}

} // namespace tpa

#endif // TPA_FOCK_HPP
