// Command-line front end: QFI / photon-counting sweeps, probe optimization,
// quantum advantage, counting efficiency, mean-energy scaling, state tools
// and the validation suites. Emits CSV (15+ significant digits) or JSON.

#include "tpa/channel.hpp"
#include "tpa/fock.hpp"
#include "tpa/io.hpp"
#include "tpa/metrology.hpp"
#include "tpa/optimize.hpp"
#include "tpa/validate.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace {

using tpa::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- helpers

std::vector<double> make_grid(double lo, double hi, int count, const std::string& spacing) {
    if (count < 1) throw UsageError("grid count must be >= 1");
    if (!(lo > 0.0 && hi < 1.0 && lo <= hi))
        throw UsageError("gamma grid must lie inside (0,1) with min <= max");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    if (spacing == "log") {
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < count; ++i)
            g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    } else if (spacing == "linear") {
        for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    } else {
        throw UsageError("spacing must be 'log' or 'linear'");
    }
    return g;
}

// Evaluate fn(0..n-1) on a worker pool; results land by index, so output
// order never depends on scheduling.
template <typename T>
std::vector<T> parallel_map(int n, const std::function<T(int)>& fn) {
    std::vector<T> out(n);
    const unsigned workers = std::min<unsigned>(
        std::max(1u, std::thread::hardware_concurrency()), static_cast<unsigned>(n));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    out[i] = fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    failed = true;
                    error = e.what();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (failed) throw std::runtime_error(error);
    return out;
}

struct ProbeInstance {
    std::string id;
    tpa::FockState state;
};

ProbeInstance build_probe(const std::string& spec, double nbar, int dim_override) {
    auto sized = [&](int minimum) { return std::max(dim_override, minimum); };
    if (spec == "coherent") {
        tpa::FockState s = dim_override > 0 ? tpa::make_coherent(nbar, dim_override)
                                            : tpa::make_coherent_auto(nbar);
        return {"coherent", std::move(s)};
    }
    if (spec == "sv" || spec == "squeezed") {
        tpa::FockState s = dim_override > 0 ? tpa::make_squeezed_vacuum(nbar, dim_override)
                                            : tpa::make_squeezed_vacuum_auto(nbar);
        return {"sv", std::move(s)};
    }
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "fock") {
        const int n = std::stoi(arg);
        return {spec, tpa::make_fock(n, sized(n + 1))};
    }
    if (kind == "on") {
        const int n = std::stoi(arg);
        return {spec, tpa::make_on(nbar, n, sized(n + 1))};
    }
    if (kind == "dv") {
        std::ifstream in(arg);
        if (!in) throw UsageError("dv probe file not readable: " + arg);
        json j = json::parse(in);
        if (j.is_array()) {
            const auto coeffs = j.get<std::vector<double>>();
            const int dim = sized(static_cast<int>(coeffs.size()));
            return {spec, tpa::make_dv(coeffs, dim)};
        }
        return {spec, tpa::fock_state_from_json(j)};
    }
    throw UsageError("unknown probe spec '" + spec +
                     "' (expected fock:n, coherent, sv, on:N, dv:file)");
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

std::string csv_or_json(const std::string& format, const std::string& header,
                        const std::vector<std::string>& rows, const json& as_json) {
    if (format == "json") return as_json.dump(2) + "\n";
    if (format != "csv") throw UsageError("format must be 'csv' or 'json'");
    std::string out = header + "\n";
    for (const std::string& r : rows) out += r + "\n";
    return out;
}

// Shared flag bundle. A JSON config file mirrors every flag by its long name
// (without dashes, '-' -> '_'); explicit flags win.
struct CommonOpts {
    double nbar = 2.0;
    double gamma_min = 1e-3;
    double gamma_max = 1.0 - 1e-3;
    int gamma_count = 60;
    std::string gamma_spacing = "log";
    int nmax = 10;
    int dim = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string config;
    std::vector<std::string> probes;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_probes) {
    cmd->add_option("--nbar", o.nbar, "mean photon number constraint");
    cmd->add_option("--gamma-min", o.gamma_min, "grid lower edge, in (0,1)");
    cmd->add_option("--gamma-max", o.gamma_max, "grid upper edge, in (0,1)");
    cmd->add_option("--gamma-count", o.gamma_count, "number of grid points");
    cmd->add_option("--gamma-spacing", o.gamma_spacing, "log or linear");
    cmd->add_option("--nmax", o.nmax, "maximum occupation for DV probes");
    cmd->add_option("--dim", o.dim, "Fock-basis dimension override (0 = auto)");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--config", o.config, "JSON config file mirroring the flags");
    if (with_probes)
        cmd->add_option("--probes", o.probes,
                        "probe specs: fock:n, coherent, sv, on:N, dv:file")
            ->delimiter(',');
}

void apply_config(const CLI::App* cmd, CommonOpts& o) {
    if (o.config.empty()) return;
    std::ifstream in(o.config);
    if (!in) throw UsageError("config file not readable: " + o.config);
    const json j = json::parse(in);
    auto load = [&](const char* flag, const char* key, auto& field) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        if (opt && opt->count() > 0) return; // explicit flag wins
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    load("--nbar", "nbar", o.nbar);
    load("--gamma-min", "gamma_min", o.gamma_min);
    load("--gamma-max", "gamma_max", o.gamma_max);
    load("--gamma-count", "gamma_count", o.gamma_count);
    load("--gamma-spacing", "gamma_spacing", o.gamma_spacing);
    load("--nmax", "nmax", o.nmax);
    load("--dim", "dim", o.dim);
    load("--seed", "seed", o.seed);
    load("--out", "out", o.out);
    load("--format", "format", o.format);
    if (cmd->get_option_no_throw("--probes") &&
        cmd->get_option_no_throw("--probes")->count() == 0 && j.contains("probes"))
        o.probes = j.at("probes").get<std::vector<std::string>>();
}

// -------------------------------------------------------------- commands

int run_fisher_sweep(const CommonOpts& o) {
    if (o.probes.empty()) throw UsageError("at least one --probes entry is required");
    const std::vector<double> grid =
        make_grid(o.gamma_min, o.gamma_max, o.gamma_count, o.gamma_spacing);

    struct Row {
        double gamma;
        std::string probe_id;
        tpa::FisherReport rep;
    };
    const int npoints = static_cast<int>(grid.size());
    std::vector<std::vector<Row>> per_point = parallel_map<std::vector<Row>>(
        npoints, [&](int i) {
            const double gamma = grid[i];
            const double f_coh = tpa::qfi(build_probe("coherent", o.nbar, o.dim).state, gamma);
            std::vector<Row> rows;
            for (const std::string& spec : o.probes) {
                const ProbeInstance probe = build_probe(spec, o.nbar, o.dim);
                rows.push_back(
                    {gamma, probe.id,
                     tpa::fisher_report(tpa::to_density(probe.state), gamma, f_coh)});
            }
            return rows;
        });

    std::vector<std::string> rows;
    json jrows = json::array();
    for (const std::vector<Row>& point : per_point)
        for (const Row& r : point) {
            rows.push_back(tpa::fisher_csv_row(r.rep, r.probe_id, o.nbar));
            jrows.push_back(json{{"gamma", r.gamma},
                                 {"probe_id", r.probe_id},
                                 {"nbar", o.nbar},
                                 {"qfi", r.rep.qfi},
                                 {"fi_pn", r.rep.fi_pn},
                                 {"qa", r.rep.qa},
                                 {"eta_pn", r.rep.eta_pn}});
        }
    write_output(o.out, csv_or_json(o.format, tpa::fisher_csv_header(), rows, jrows));
    return 0;
}

int run_optimize(const CommonOpts& o) {
    if (o.nbar > o.nmax) throw UsageError("nbar must not exceed nmax");
    const std::vector<double> grid =
        make_grid(o.gamma_min, o.gamma_max, o.gamma_count, o.gamma_spacing);
    const int npoints = static_cast<int>(grid.size());

    std::vector<tpa::OptResult> results = parallel_map<tpa::OptResult>(npoints, [&](int i) {
        tpa::OptConfig cfg;
        cfg.nbar = o.nbar;
        cfg.nmax = o.nmax;
        cfg.gamma_cap = grid[i];
        cfg.seed = tpa::detail::splitmix64(o.seed ^ (0x5151ULL + i));
        return tpa::optimize_probe(cfg);
    });

    std::string csv = "gamma,j,p_j\n";
    json archive = json::array();
    for (int i = 0; i < npoints; ++i) {
        for (int j = 0; j <= o.nmax; ++j)
            csv += tpa::format_number(grid[i]) + "," + std::to_string(j) + "," +
                   tpa::format_number(results[i].populations[j]) + "\n";
        archive.push_back(tpa::to_json(results[i], grid[i], o.nbar, o.nmax));
    }
    write_output(o.out, csv);
    const std::string json_path = o.out.empty() ? "" : o.out + ".json";
    if (json_path.empty())
        std::cout << archive.dump(2) << "\n";
    else
        write_output(json_path, archive.dump(2) + "\n");
    return 0;
}

int run_scaling(const CommonOpts& o, double gamma, double nbar_min, double nbar_max,
                int nbar_count) {
    if (o.probes.empty()) throw UsageError("at least one --probes entry is required");
    if (!(gamma > 0 && gamma < 1)) throw UsageError("gamma must lie in (0,1)");
    if (nbar_count < 1 || nbar_min < 0 || nbar_max < nbar_min)
        throw UsageError("invalid nbar grid");
    std::vector<double> nbars(nbar_count);
    for (int i = 0; i < nbar_count; ++i)
        nbars[i] = nbar_count == 1
                       ? nbar_min
                       : nbar_min + (nbar_max - nbar_min) * i / (nbar_count - 1);

    struct Row {
        double nbar;
        std::string probe_id;
        double qfi, fi_pn;
    };
    std::vector<std::vector<Row>> per_point = parallel_map<std::vector<Row>>(
        nbar_count, [&](int i) {
            std::vector<Row> rows;
            for (const std::string& spec : o.probes) {
                const ProbeInstance probe = build_probe(spec, nbars[i], o.dim);
                const tpa::DensityMatrix rho = tpa::to_density(probe.state);
                rows.push_back({nbars[i], probe.id, tpa::qfi(rho, gamma),
                                tpa::fi_photon_counting(rho, gamma)});
            }
            return rows;
        });

    std::string csv = "nbar,probe_id,gamma,qfi,fi_pn\n";
    json jrows = json::array();
    for (const std::vector<Row>& point : per_point)
        for (const Row& r : point) {
            csv += tpa::format_number(r.nbar) + "," + r.probe_id + "," +
                   tpa::format_number(gamma) + "," + tpa::format_number(r.qfi) + "," +
                   tpa::format_number(r.fi_pn) + "\n";
            jrows.push_back(json{{"nbar", r.nbar},
                                 {"probe_id", r.probe_id},
                                 {"gamma", gamma},
                                 {"qfi", r.qfi},
                                 {"fi_pn", r.fi_pn}});
        }
    write_output(o.out, o.format == "json" ? jrows.dump(2) + "\n" : csv);
    return 0;
}

int run_probe(const CommonOpts& o, const std::string& spec) {
    const ProbeInstance probe = build_probe(spec, o.nbar, o.dim);
    write_output(o.out, tpa::to_json(probe.state).dump(2) + "\n");
    return 0;
}

int run_evolve(const CommonOpts& o, const std::string& spec, double gamma, double eps) {
    if (gamma >= 0 && eps >= 0) throw UsageError("give either --gamma or --eps, not both");
    const double e = eps >= 0 ? eps : tpa::gamma_to_eps(gamma);
    const ProbeInstance probe = build_probe(spec, o.nbar, o.dim);
    const tpa::DensityMatrix rho = tpa::propagate_exact(tpa::to_density(probe.state), e);
    write_output(o.out, tpa::to_json(rho).dump(2) + "\n");
    return 0;
}

int run_validate(const std::string& level) {
    if (level != "quick" && level != "full") throw UsageError("level must be quick or full");
    const std::vector<tpa::CheckResult> results = tpa::run_validation(level == "full");
    bool all = true;
    for (const tpa::CheckResult& r : results) {
        std::printf("%-45s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "all checks passed" : "VALIDATION FAILED");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-photon-absorption metrology toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string probe_spec = "coherent";
    std::string level = "quick";
    double scaling_gamma = 0.01, nbar_min = 1.0, nbar_max = 10.0, evolve_gamma = -1.0,
           evolve_eps = -1.0;
    int nbar_count = 10;

    CLI::App* c_qfi = app.add_subcommand("qfi", "QFI and photon-counting FI over a Gamma grid");
    add_common(c_qfi, o, true);
    CLI::App* c_adv = app.add_subcommand("advantage", "quantum advantage vs the coherent benchmark");
    add_common(c_adv, o, true);
    CLI::App* c_eff = app.add_subcommand("efficiency", "photon-counting efficiency eta_PN");
    add_common(c_eff, o, true);
    CLI::App* c_opt = app.add_subcommand("optimize", "optimal DV probe per grid point");
    add_common(c_opt, o, false);
    CLI::App* c_scal = app.add_subcommand("scaling", "Fisher information vs mean photon number");
    add_common(c_scal, o, true);
    c_scal->add_option("--gamma", scaling_gamma, "fixed TPA parameter");
    c_scal->add_option("--nbar-min", nbar_min, "nbar grid lower edge");
    c_scal->add_option("--nbar-max", nbar_max, "nbar grid upper edge");
    c_scal->add_option("--nbar-count", nbar_count, "nbar grid points");
    CLI::App* c_probe = app.add_subcommand("probe", "emit a probe state as JSON");
    add_common(c_probe, o, false);
    c_probe->add_option("--probe", probe_spec, "probe spec");
    CLI::App* c_evolve = app.add_subcommand("evolve", "propagate a probe and emit the density matrix");
    add_common(c_evolve, o, false);
    c_evolve->add_option("--probe", probe_spec, "probe spec");
    c_evolve->add_option("--gamma", evolve_gamma, "TPA parameter Gamma");
    c_evolve->add_option("--eps", evolve_eps, "dimensionless time eps");
    CLI::App* c_val = app.add_subcommand("validate", "run the invariant suites");
    c_val->add_option("--level", level, "quick or full");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(cmd, o);
        if (cmd == c_qfi || cmd == c_adv || cmd == c_eff) return run_fisher_sweep(o);
        if (cmd == c_opt) return run_optimize(o);
        if (cmd == c_scal) return run_scaling(o, scaling_gamma, nbar_min, nbar_max, nbar_count);
        if (cmd == c_probe) return run_probe(o, probe_spec);
        if (cmd == c_evolve) return run_evolve(o, probe_spec, evolve_gamma, evolve_eps);
        if (cmd == c_val) return run_validate(level);
        throw UsageError("unknown subcommand");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
