#include "zfrate/table.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace zfrate {

namespace {

std::string ref_key(Method m, bool odd) {
    std::string k = odd ? "ref.odd." : "ref.nonodd.";
    switch (m) {
        case Method::Causal: return k + "causal";
        case Method::Anticausal: return k + "anticausal";
        case Method::NoncausalPlain: return k + "noncausal_plain";
        case Method::NoncausalRho: return k + "noncausal_rho";
    }
    return k;
}

std::string f6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

double table_tolerance(const std::string& example) { return example == "ex1" ? 1e-3 : 2e-3; }

std::vector<RunConfig> load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir);
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".cfg") paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<RunConfig> out;
    for (const auto& p : paths) {
        RunConfig c = load_config(p);
        if (c.n_z > 0 && !c.refs.empty()) out.push_back(std::move(c));
    }
    if (out.empty()) throw std::runtime_error("corpus has no table entries: " + dir);
    return out;
}

std::vector<TableRow> run_table2(const std::vector<RunConfig>& configs, const TableOptions& opts) {
    std::vector<TableRow> rows;
    for (const auto& c : configs)
        for (bool odd : {true, false}) {
            TableRow r;
            r.example = c.name;
            r.odd = odd;
            r.n_z_nominal = c.n_z;
            r.n_z_used = opts.full_scale ? c.n_z : std::min(c.n_z, opts.n_z_cap);
            r.lower_ref = reference(c, "ref.lower").value_or(std::numeric_limits<double>::quiet_NaN());
            rows.push_back(r);
        }

    struct Task {
        size_t row;
        size_t col;
        Query q;
    };
    std::vector<Task> tasks;
    for (size_t i = 0; i < rows.size(); ++i) {
        Query base = to_query(configs[i / 2]);
        base.odd = rows[i].odd;
        base.sdp = opts.sdp;
        base.run_oracles = opts.run_oracles;
        for (size_t j = 0; j < kAllMethods.size(); ++j)
            tasks.push_back({i, j, method_query(base, kAllMethods[j], rows[i].n_z_used)});
    }

    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (size_t k = next++; k < tasks.size(); k = next++) {
            try {
                const Task& t = tasks[k];
                const auto t0 = std::chrono::steady_clock::now();
                Certificate cert = certify(t.q);
                TableCell& cell = rows[t.row].cells[t.col];
                cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                cell.method = kAllMethods[t.col];
                cell.cert = std::move(cert);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    for (size_t i = 0; i < rows.size(); ++i) {
        TableRow& r = rows[i];
        const RunConfig& c = configs[i / 2];
        const double tol = table_tolerance(r.example);
        r.lower_computed = r.cells[0].cert.lower_bound;
        const bool reduced = r.n_z_used < r.n_z_nominal;
        for (auto& cell : r.cells) {
            const auto ref = reference(c, ref_key(cell.method, r.odd));
            cell.has_ref = ref.has_value();
            cell.reference = ref.value_or(std::numeric_limits<double>::quiet_NaN());
            const bool computed = cell.cert.certified;
            cell.deviation = (computed && cell.has_ref && !std::isnan(cell.reference))
                                 ? cell.cert.rho_upper - cell.reference
                                 : std::numeric_limits<double>::quiet_NaN();
            // Every certificate must sit above the linear lower bound (up to bisection noise).
            const bool valid = !computed || cell.cert.rho_upper >= r.lower_computed - 2.0 * c.bisect_tol;
            bool match = true;
            if (cell.has_ref) {
                if (std::isnan(cell.reference))
                    match = !computed;
                else
                    match = computed && std::abs(cell.deviation) <= tol;
            }
            if (opts.run_oracles && computed && !cell.cert.oracle.passed()) match = false;
            cell.informational = reduced && !match && valid;
            cell.ok = valid && (match || cell.informational);
        }
    }
    return rows;
}

int print_table2(const std::vector<TableRow>& rows, bool reduced, std::ostream& os) {
    if (reduced) os << "REDUCED-SCALE TABLE (n_z capped; '~' marks deviations reported but not enforced)\n";
    os << "ex    odd  n_z  lower(ref/computed)     method            ref       computed  deviation  status\n";
    int failures = 0;
    for (const auto& r : rows) {
        for (const auto& cell : r.cells) {
            char line[256];
            const std::string ref = !cell.has_ref ? "-" : std::isnan(cell.reference) ? "invalid" : f6(cell.reference);
            const std::string comp = cell.cert.certified ? f6(cell.cert.rho_upper) : "none";
            const std::string dev = std::isnan(cell.deviation) ? "-" : f6(cell.deviation);
            const char* status = !cell.ok ? "FAIL" : cell.informational ? "~" : "ok";
            std::snprintf(line, sizeof line, "%-5s %-4s %-4d %s/%s  %-16s  %-8s  %-8s  %-9s  %s\n",
                          r.example.c_str(), r.odd ? "yes" : "no", r.n_z_used, f6(r.lower_ref).c_str(),
                          f6(r.lower_computed).c_str(), to_string(cell.method).c_str(), ref.c_str(), comp.c_str(),
                          dev.c_str(), status);
            os << line;
            if (!cell.ok) ++failures;
        }
    }
    os << (failures == 0 ? "table2: all cells within tolerance\n"
                         : "table2: " + std::to_string(failures) + " cell(s) outside tolerance\n");
    return failures;
}

}  // namespace zfrate
