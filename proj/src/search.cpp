#include "zfrate/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace zfrate {

Pipeline resolve_pipeline(const MultiplierClass& cls, Scheme scheme, int n_b, int n_f) {
    if (n_b < 0 || n_f < 0) throw std::invalid_argument("multiplier orders must be nonnegative");
    if (n_b + n_f > 0 && causality_of(n_b, n_f) != cls.causality)
        throw InvalidScheme("multiplier orders (n_b=" + std::to_string(n_b) + ", n_f=" + std::to_string(n_f) +
                            ") do not match the " + to_string(cls.causality) + " class");
    Pipeline pl;
    if (cls.framework == Framework::Iqc) {
        if (scheme == Scheme::Psi3Rho) throw InvalidScheme("psi3rho belongs to the rho-IQC framework");
        if (scheme == Scheme::Psi1 && cls.causality != Causality::Causal)
            throw InvalidScheme("psi1 requires a causal multiplier");
        return pl;
    }
    pl.form = Form::Rho;
    if (scheme == Scheme::Psi3Rho) return pl;
    switch (cls.causality) {
        case Causality::Causal:
            pl.substitution = Substitution::RhoZ;
            pl.variant = LmiVariant::CausalRhoForm;
            return pl;
        case Causality::Anticausal:
            if (scheme == Scheme::Psi1) throw InvalidScheme("psi1 is invalid for anticausal multipliers");
            pl.substitution = Substitution::ZOverRho;
            pl.variant = LmiVariant::AnticausalRhoForm;
            return pl;
        case Causality::Noncausal:
            throw InvalidScheme("noncausal multipliers in the rho-IQC framework need the psi3rho factorization");
    }
    return pl;
}

bool OracleReport::passed() const {
    return ran && fdi.max_real < 0.0 && matrix_fdi.max_real < 0.0 && battery.passed();
}

RateProbe probe(const Query& q, double rho, bool early_stop) {
    const Pipeline pl = resolve_pipeline(q.cls, q.scheme, q.n_b, q.n_f);
    const StateSpace ss = realize(q.plant);
    FirMultiplier m;
    m.causal.assign(q.n_b, 0.0);
    m.anticausal.assign(q.n_f, 0.0);
    m.form = pl.form;
    m.rho = pl.form == Form::Rho ? rho : 1.0;
    m.odd_nonlinearity = q.odd;
    RateProbe out;
    out.factorization = q.scheme == Scheme::Psi3Rho ? build_psi3_rho(m, q.K, rho)
                                                    : build_factorization(q.scheme, m, q.K, pl.substitution);
    out.problem = assemble(out.factorization, ss, q.K, rho, pl.variant, q.odd, q.lmi);
    SdpOptions opts = q.sdp;
    opts.stop_at_threshold = early_stop;
    out.solution = solve(out.problem, opts);
    return out;
}

Certificate certify(const Query& q) {
    if (!(q.K > 0.0)) throw std::invalid_argument("certify: K must be positive");
    if (!(q.bisect_tol > 0.0)) throw std::invalid_argument("certify: bisect_tol must be positive");
    resolve_pipeline(q.cls, q.scheme, q.n_b, q.n_f);
    const StateSpace ss = realize(q.plant);
    if (!is_stable(ss)) throw UnstablePlant("certify: plant is not stable");

    Certificate cert;
    const RateBounds rb = rate_bounds(ss, q.K, q.tau_grid);
    cert.lower_bound = rb.lower;
    cert.past_nyquist = rb.past_nyquist;

    const double sr = spectral_radius(ss);
    double lo = sr + 1e-9;
    double hi = 1.0;
    bool found = false;
    RateProbe best;
    while (hi - lo > q.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        RateProbe pr = probe(q, mid, true);
        ++cert.solves;
        if (pr.solution.status == SdpStatus::Feasible) {
            hi = mid;
            found = true;
            best = std::move(pr);
        } else {
            lo = mid;
        }
    }
    if (!found) {
        cert.certified = false;
        cert.rho_upper = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }

    // Maximize the margin at the final rate; keep the early answer if that solve stalls.
    RateProbe full = probe(q, hi, false);
    ++cert.solves;
    if (full.solution.status == SdpStatus::Feasible) best = std::move(full);
    if (hi - q.bisect_tol > sr) {
        const RateProbe below = probe(q, hi - q.bisect_tol, true);
        ++cert.solves;
        cert.bracket_ok = below.solution.status != SdpStatus::Feasible;
    }

    const LmiDecoded dec = decode(best.problem, best.solution.x);
    cert.certified = true;
    cert.rho_upper = hi;
    cert.multiplier = dec.multiplier;
    cert.margin = best.solution.t;
    cert.dims = dimensions(best.problem);

    if (q.run_oracles) {
        cert.oracle.ran = true;
        cert.oracle.fdi = fdi_sweep(cert.multiplier, ss, q.K, hi, q.grid_n);
        cert.oracle.matrix_fdi = matrix_fdi_sweep(with_taps(best.factorization, cert.multiplier), ss, hi, q.grid_n);
        cert.oracle.battery = battery(ss, q.K, hi, 1, q.jobs);
    }
    return cert;
}

Query method_query(const Query& base, Method m, int n_z) {
    Query q = base;
    switch (m) {
        case Method::Causal:
            q.cls = {Causality::Causal, Framework::RhoIqc};
            q.n_b = n_z;
            q.n_f = 0;
            q.scheme = Scheme::Psi2;
            break;
        case Method::Anticausal:
            q.cls = {Causality::Anticausal, Framework::RhoIqc};
            q.n_b = 0;
            q.n_f = n_z;
            q.scheme = Scheme::Psi2;
            break;
        case Method::NoncausalPlain:
            q.cls = {Causality::Noncausal, Framework::Iqc};
            q.n_b = n_z;
            q.n_f = n_z;
            q.scheme = Scheme::Psi2;
            break;
        case Method::NoncausalRho:
            q.cls = {Causality::Noncausal, Framework::RhoIqc};
            q.n_b = n_z;
            q.n_f = n_z;
            q.scheme = Scheme::Psi3Rho;
            break;
    }
    return q;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Causal: return "causal";
        case Method::Anticausal: return "anticausal";
        case Method::NoncausalPlain: return "noncausal-plain";
        case Method::NoncausalRho: return "noncausal-rho";
    }
    return "?";
}

std::vector<SweepRow> sweep_k(const Query& q, double k_min, double k_max, int steps, int jobs) {
    if (steps < 1) throw std::invalid_argument("sweep: steps must be at least 1");
    if (!(k_min > 0.0) || !(k_max >= k_min)) throw std::invalid_argument("sweep: need 0 < k_min <= k_max");
    if (steps > 1 && !(k_min < k_max)) throw std::invalid_argument("sweep: need k_min < k_max");
    const StateSpace ss = realize(q.plant);
    if (!is_stable(ss)) throw UnstablePlant("sweep: plant is not stable");
    const int nz = std::max(q.n_b, q.n_f);

    std::vector<SweepRow> rows(steps);
    for (int i = 0; i < steps; ++i)
        rows[i].K = steps == 1 ? k_max : k_min + (k_max - k_min) * i / (steps - 1);

    auto rate = [](const Certificate& c) {
        return c.certified ? c.rho_upper : std::numeric_limits<double>::quiet_NaN();
    };
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < steps; i = next++) {
            try {
                SweepRow& r = rows[i];
                Query base = q;
                base.K = r.K;
                const RateBounds rb = rate_bounds(ss, r.K, q.tau_grid);
                r.rho_lower = rb.lower;
                r.past_nyquist = rb.past_nyquist;
                r.rho_causal = rate(certify(method_query(base, Method::Causal, nz)));
                r.rho_anticausal = rate(certify(method_query(base, Method::Anticausal, nz)));
                r.rho_noncausal = rate(certify(method_query(base, Method::NoncausalPlain, nz)));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int nthreads = std::max(1, std::min(jobs, steps));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

namespace {

std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "K,rho_lower,rho_causal,rho_anticausal,rho_noncausal\n";
    for (const auto& r : rows)
        os << fmt6(r.K) << ',' << fmt6(r.rho_lower) << ',' << fmt6(r.rho_causal) << ',' << fmt6(r.rho_anticausal)
           << ',' << fmt6(r.rho_noncausal) << '\n';
}

ClassComparison class_comparison(const Query& q) {
    const int nz = std::max(q.n_b, q.n_f);
    ClassComparison out;
    for (Method m : kAllMethods) out.results.push_back({m, certify(method_query(q, m, nz))});
    std::stable_sort(out.results.begin(), out.results.end(), [](const ClassResult& a, const ClassResult& b) {
        if (a.certificate.certified != b.certificate.certified) return a.certificate.certified;
        if (!a.certificate.certified) return false;
        return a.certificate.rho_upper < b.certificate.rho_upper;
    });
    out.any_certified = out.results.front().certificate.certified;
    out.best = out.results.front().method;
    return out;
}

}  // namespace zfrate
