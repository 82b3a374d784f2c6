// zfrate: convergence-rate certificates for discrete-time Lur'e systems with FIR
// Zames-Falb multipliers.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "zfrate/config.hpp"
#include "zfrate/search.hpp"
#include "zfrate/table.hpp"
#include "zfrate/verify.hpp"

using namespace zfrate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoCertificate = 2;
constexpr int kExitTableFailure = 3;

std::string f6(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string e6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string list6(const std::vector<double>& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f6(v[i]);
    return out + "]";
}

struct Common {
    std::string config;
    int jobs = 1;
    double tol = -1.0;
    int grid = -1;
    bool full_scale = false;
    std::string csv;
};

// Solver tolerance precedence: --tol, then ZFRATE_SOLVER_TOL, then the built-in default.
double solver_tol(const Common& c) {
    if (c.tol > 0.0) return c.tol;
    if (const char* env = std::getenv("ZFRATE_SOLVER_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(v > 0.0))
            throw std::invalid_argument(std::string("ZFRATE_SOLVER_TOL is not a positive number: ") + env);
        return v;
    }
    return SdpOptions{}.tol;
}

Query make_query(const RunConfig& cfg, const Common& c) {
    Query q = to_query(cfg);
    q.sdp.tol = solver_tol(c);
    if (c.grid > 0) q.grid_n = c.grid;
    q.jobs = c.jobs;
    return q;
}

void print_header(const RunConfig& cfg, const Query& q, std::ostream& os) {
    os << "example:    " << (cfg.name.empty() ? "-" : cfg.name) << "\n";
    os << "plant:      num=" << list6(cfg.num) << " den=" << list6(cfg.den) << "\n";
    os << "slope K:    " << f6(q.K) << "\n";
    os << "multiplier: " << to_string(q.cls.causality) << ", " << to_string(q.cls.framework) << ", "
       << to_string(q.scheme) << ", n_b=" << q.n_b << ", n_f=" << q.n_f << ", " << (q.odd ? "odd" : "non-odd")
       << "\n";
}

void print_oracles(const OracleReport& o, std::ostream& os) {
    os << "oracle fdi:        max " << e6(o.fdi.max_real) << " on " << o.fdi.grid_used << " points  "
       << (o.fdi.max_real < 0.0 ? "PASS" : "FAIL") << "\n";
    os << "oracle matrix fdi: max " << e6(o.matrix_fdi.max_real) << " on " << o.matrix_fdi.grid_used << " points  "
       << (o.matrix_fdi.max_real < 0.0 ? "PASS" : "FAIL") << "\n";
    os << "oracle battery:    " << o.battery.cases.size() << " runs, horizon " << o.battery.horizon
       << ", worst fitted rate " << f6(o.battery.worst_rate()) << "  " << (o.battery.passed() ? "PASS" : "FAIL")
       << "\n";
}

int report_certificate(const RunConfig& cfg, const Query& q, const Certificate& cert, std::ostream& os) {
    print_header(cfg, q, os);
    os << "lower bound (linear): " << f6(cert.lower_bound) << (cert.past_nyquist ? "  (K past Nyquist value)" : "")
       << "\n";
    if (!cert.certified) {
        os << "no certificate (cf. paper: invalid)\n";
        return kExitNoCertificate;
    }
    os << "certified rate:       " << f6(cert.rho_upper) << "\n";
    os << "margin t:             " << e6(cert.margin) << "\n";
    os << "LMI size / variables: " << cert.dims.lmi_size << " / " << cert.dims.num_vars << "\n";
    os << "taps (" << to_string(cert.multiplier.form) << " form): h0=" << f6(cert.multiplier.h0)
       << " causal=" << list6(cert.multiplier.causal) << " anticausal=" << list6(cert.multiplier.anticausal) << "\n";
    if (!cert.bracket_ok) os << "warning: rho - bisect_tol also certified (non-monotone feasibility)\n";
    if (cert.oracle.ran) {
        print_oracles(cert.oracle, os);
        if (!cert.oracle.passed()) {
            os << "error: certificate failed an independent oracle\n";
            return kExitError;
        }
    }
    return kExitOk;
}

int cmd_certify(const Common& c) {
    const RunConfig cfg = load_config(c.config);
    const Query q = make_query(cfg, c);
    return report_certificate(cfg, q, certify(q), std::cout);
}

int cmd_lower_bound(const Common& c) {
    const RunConfig cfg = load_config(c.config);
    const Query q = make_query(cfg, c);
    const StateSpace ss = realize(q.plant);
    const RateBounds rb = rate_bounds(ss, q.K, q.tau_grid);
    print_header(cfg, q, std::cout);
    std::cout << "open-loop spectral radius: " << f6(spectral_radius(ss)) << "\n";
    std::cout << "Nyquist value K_N:         " << (rb.nyquist.infinite ? "inf" : f6(rb.nyquist.value)) << "\n";
    std::cout << "lower bound:               " << f6(rb.lower) << " (at tau=" << f6(rb.tau_at_max) << ")\n";
    if (rb.past_nyquist) std::cout << "warning: K is at or past the Nyquist value; the lower bound is not meaningful\n";
    return kExitOk;
}

int cmd_sweep(const Common& c, double k_min, double k_max, int steps) {
    const RunConfig cfg = load_config(c.config);
    Query q = make_query(cfg, c);
    q.run_oracles = false;
    if (k_max <= 0.0) k_max = cfg.K;
    if (k_min <= 0.0) k_min = k_max / steps;
    const auto rows = sweep_k(q, k_min, k_max, steps, c.jobs);
    for (const auto& r : rows)
        if (r.past_nyquist) std::cerr << "warning: K=" << f6(r.K) << " is past the Nyquist value\n";
    const std::string path = !c.csv.empty() ? c.csv : cfg.csv;
    if (path.empty()) {
        write_sweep_csv(rows, std::cout);
    } else {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        write_sweep_csv(rows, out);
        std::cout << "wrote " << rows.size() << " rows to " << path << "\n";
    }
    return kExitOk;
}

int cmd_verify(const Common& c) {
    const RunConfig cfg = load_config(c.config);
    Query q = make_query(cfg, c);
    q.run_oracles = true;
    const Certificate cert = certify(q);
    const int code = report_certificate(cfg, q, cert, std::cout);
    if (!cert.certified) return code;
    for (const auto& bc : cert.oracle.battery.cases)
        std::cout << "  " << bc.label << ": rate " << f6(bc.check.fitted_rate) << (bc.check.ok ? "" : "  FAIL") << "\n";
    const std::string path = !c.csv.empty() ? c.csv : cfg.csv;
    if (!path.empty()) {
        const StateSpace ss = realize(q.plant);
        const Vector x0 = Vector::Constant(ss.states(), 10.0);
        const Trajectory tr = simulate(ss, Nonlinearity::saturation(q.K, 1.0), x0, battery_horizon(cert.rho_upper));
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        write_trajectory_csv(tr, out);
        std::cout << "trajectory (saturation, level 1) written to " << path << "\n";
    }
    return code;
}

int cmd_table2(const Common& c, const std::string& corpus) {
    TableOptions opts;
    opts.full_scale = c.full_scale;
    opts.jobs = c.jobs;
    opts.sdp.tol = solver_tol(c);
    const auto configs = load_corpus(corpus);
    const auto rows = run_table2(configs, opts);
    bool reduced = false;
    for (const auto& r : rows) reduced = reduced || r.n_z_used < r.n_z_nominal;
    const int failures = print_table2(rows, reduced, std::cout);
    return failures == 0 ? kExitOk : kExitTableFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zfrate: exponential convergence-rate certificates for Lur'e systems via FIR Zames-Falb multipliers"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 certified (and verified), 1 error (parse, unstable plant, invalid combination, oracle "
        "failure), 2 no certificate, 3 table2 rows outside tolerance.\n"
        "Solver tolerance: --tol, else ZFRATE_SOLVER_TOL, else 1e-9.");

    Common common;
    double k_min = 0.0;
    double k_max = 0.0;
    int steps = 20;
    std::string corpus = "corpus";

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", common.config, "run configuration file");
        if (needs_config) opt->required();
        sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--tol", common.tol, "SDP solver tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--grid", common.grid, "frequency grid points for the FDI oracles")->check(CLI::Range(64, 1 << 22));
        sub->add_flag("--full-scale", common.full_scale, "use the nominal multiplier orders (table2)");
        sub->add_option("--csv", common.csv, "CSV output path");
    };

    auto* certify_cmd = app.add_subcommand("certify", "bisect for the smallest certified rate");
    add_common(certify_cmd, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "certify every method across a range of K");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--k-min", k_min, "smallest K (default k-max/steps)");
    sweep_cmd->add_option("--k-max", k_max, "largest K (default: config K)");
    sweep_cmd->add_option("--steps", steps, "number of K points")->check(CLI::PositiveNumber);
    auto* table_cmd = app.add_subcommand("table2", "reproduce the comparison table from the shipped corpus");
    add_common(table_cmd, false);
    table_cmd->add_option("--corpus", corpus, "corpus directory");
    auto* lower_cmd = app.add_subcommand("lower-bound", "linear lower bound and Nyquist value");
    add_common(lower_cmd, true);
    auto* verify_cmd = app.add_subcommand("verify", "certify, then report every oracle run");
    add_common(verify_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*certify_cmd) return cmd_certify(common);
        if (*sweep_cmd) return cmd_sweep(common, k_min, k_max, steps);
        if (*table_cmd) return cmd_table2(common, corpus);
        if (*lower_cmd) return cmd_lower_bound(common);
        if (*verify_cmd) return cmd_verify(common);
    } catch (const ConfigError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
    } catch (const UnstablePlant& e) {
        std::cerr << "error: unstable plant: " << e.what() << "\n";
    } catch (const InvalidScheme& e) {
        std::cerr << "error: invalid combination: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitError;
}
