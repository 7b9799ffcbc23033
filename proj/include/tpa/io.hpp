#ifndef TPA_IO_HPP
#define TPA_IO_HPP

// JSON and CSV serialization for states, density matrices, Fisher reports
// and optimization results.

#include "tpa/fock.hpp"
#include "tpa/metrology.hpp"
#include "tpa/optimize.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace tpa {

using nlohmann::json;

/// Fixed-width scientific formatting, 17 significant digits.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

inline json to_json(const FockState& psi) {
    std::vector<double> re(psi.dim), im(psi.dim);
    for (int n = 0; n < psi.dim; ++n) {
        re[n] = psi.amplitudes[n].real();
        im[n] = psi.amplitudes[n].imag();
    }
    return json{{"dim", psi.dim},
                {"amplitudes_re", re},
                {"amplitudes_im", im},
                {"tail_mass", psi.tail_mass}};
}

inline FockState fock_state_from_json(const json& j) {
    FockState psi;
    psi.dim = j.at("dim").get<int>();
    const auto re = j.at("amplitudes_re").get<std::vector<double>>();
    const auto im = j.at("amplitudes_im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != psi.dim || static_cast<int>(im.size()) != psi.dim)
        throw std::invalid_argument("fock_state_from_json: amplitude length mismatch");
    psi.amplitudes = Vector(psi.dim);
    for (int n = 0; n < psi.dim; ++n) psi.amplitudes[n] = Complex(re[n], im[n]);
    psi.tail_mass = j.value("tail_mass", 0.0);
    return psi;
}

inline json to_json(const DensityMatrix& rho) {
    const int dim = rho.dim();
    std::vector<double> re, im;
    re.reserve(dim * dim);
    im.reserve(dim * dim);
    for (int n = 0; n < dim; ++n)
        for (int np = 0; np < dim; ++np) {
            re.push_back(rho.elements(n, np).real());
            im.push_back(rho.elements(n, np).imag());
        }
    return json{{"dim", dim}, {"elements_re", re}, {"elements_im", im}};
}

inline DensityMatrix density_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    const auto re = j.at("elements_re").get<std::vector<double>>();
    const auto im = j.at("elements_im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != dim * dim || static_cast<int>(im.size()) != dim * dim)
        throw std::invalid_argument("density_from_json: element count mismatch");
    DensityMatrix rho;
    rho.elements = Matrix(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int np = 0; np < dim; ++np)
            rho.elements(n, np) = Complex(re[n * dim + np], im[n * dim + np]);
    return rho;
}

inline json to_json(const OptResult& r, double gamma, double nbar, int nmax) {
    json local = json::array();
    for (const LocalOptimum& o : r.local_optima)
        local.push_back(json{{"populations", o.populations}, {"qfi", o.qfi}});
    return json{{"gamma", gamma},         {"nbar", nbar},
                {"nmax", nmax},           {"seed", r.seed},
                {"populations", r.populations}, {"qfi", r.qfi},
                {"converged", r.converged},     {"local_optima", local}};
}

/// CSV row matching the fixed FisherReport schema:
/// gamma, probe_id, nbar, qfi, fi_pn, qa, eta_pn
inline const char* fisher_csv_header() {
    return "gamma,probe_id,nbar,qfi,fi_pn,qa,eta_pn";
}

inline std::string fisher_csv_row(const FisherReport& rep, const std::string& probe_id,
                                  double nbar) {
    return format_number(rep.gamma_cap) + "," + probe_id + "," + format_number(nbar) +
           "," + format_number(rep.qfi) + "," + format_number(rep.fi_pn) + "," +
           format_number(rep.qa) + "," + format_number(rep.eta_pn);
}

} // namespace tpa

#endif // TPA_IO_HPP
