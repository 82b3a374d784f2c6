#include "doctest.h"

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "plants.hpp"
#include "zfrate/search.hpp"

using namespace zfrate;
using doctest::Approx;

namespace {

Query base(const plants::Example& e, bool odd) {
    Query q;
    q.plant = TransferFunction(e.num, e.den);
    q.K = e.K;
    q.odd = odd;
    return q;
}

}  // namespace

TEST_CASE("pipelines") {
    using enum Causality;
    CHECK(resolve_pipeline({Noncausal, Framework::Iqc}, Scheme::Psi2, 1, 1).form == Form::Plain);
    const Pipeline c = resolve_pipeline({Causal, Framework::RhoIqc}, Scheme::Psi2, 2, 0);
    CHECK(c.variant == LmiVariant::CausalRhoForm);
    CHECK(c.substitution == Substitution::RhoZ);
    const Pipeline a = resolve_pipeline({Anticausal, Framework::RhoIqc}, Scheme::Psi3, 0, 2);
    CHECK(a.variant == LmiVariant::AnticausalRhoForm);
    CHECK(a.substitution == Substitution::ZOverRho);
    CHECK(resolve_pipeline({Noncausal, Framework::RhoIqc}, Scheme::Psi3Rho, 1, 2).form == Form::Rho);
    CHECK_THROWS_AS(resolve_pipeline({Noncausal, Framework::RhoIqc}, Scheme::Psi2, 1, 1), InvalidScheme);
    CHECK_THROWS_AS(resolve_pipeline({Anticausal, Framework::Iqc}, Scheme::Psi1, 0, 1), InvalidScheme);
    CHECK_THROWS_AS(resolve_pipeline({Causal, Framework::Iqc}, Scheme::Psi3Rho, 1, 0), InvalidScheme);
    CHECK_THROWS_AS(resolve_pipeline({Causal, Framework::Iqc}, Scheme::Psi2, 1, 1), InvalidScheme);
}

TEST_CASE("first-order plant certificates") {
    for (bool odd : {true, false}) {
        for (Method m : kAllMethods) {
            CAPTURE(to_string(m));
            CAPTURE(odd);
            const Certificate c = certify(method_query(base(plants::ex1, odd), m, 1));
            REQUIRE(c.certified);
            const double ref = m == Method::Causal ? (odd ? 0.600037 : 0.600281) : 0.600024;
            CHECK(std::abs(c.rho_upper - ref) <= 1e-3);
            CHECK(c.rho_upper >= c.lower_bound - 2e-6);
            CHECK(c.rho_upper > 0.4);
            CHECK(c.bracket_ok);
            CHECK(c.oracle.passed());
            CHECK(l1_condition(c.multiplier, c.rho_upper).satisfied);
            if (!odd) CHECK(sign_condition(c.multiplier, 1e-9));
        }
    }
}

TEST_CASE("double-pole plant: anticausal multipliers certify nothing") {
    Query q = method_query(base(plants::ex4, true), Method::Anticausal, 8);
    q.run_oracles = false;
    const Certificate c = certify(q);
    CHECK_FALSE(c.certified);
    CHECK(c.lower_bound == Approx(0.9).epsilon(1e-6));
    Query nc = method_query(base(plants::ex4, true), Method::NoncausalPlain, 8);
    const Certificate cn = certify(nc);
    REQUIRE(cn.certified);
    CHECK(cn.rho_upper < 1.0);
    CHECK(cn.oracle.passed());
}

TEST_CASE("errors") {
    Query q = base(plants::ex1, true);
    q.plant = TransferFunction({1.0}, {1.0, -1.1});
    CHECK_THROWS_AS(certify(q), UnstablePlant);
    Query r = base(plants::ex1, true);
    r.cls = {Causality::Noncausal, Framework::RhoIqc};
    r.n_b = r.n_f = 1;
    r.scheme = Scheme::Psi2;
    CHECK_THROWS_AS(certify(r), InvalidScheme);
}

TEST_CASE("sweep") {
    SUBCASE("single step equals certify") {
        Query q = base(plants::ex1, true);
        q.n_b = q.n_f = 1;
        q.run_oracles = false;
        const auto rows = sweep_k(q, 0.5, 1.0, 1);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].K == 1.0);
        CHECK(rows[0].rho_noncausal == certify(method_query(q, Method::NoncausalPlain, 1)).rho_upper);
        CHECK(rows[0].rho_causal == certify(method_query(q, Method::Causal, 1)).rho_upper);
    }
    SUBCASE("tiny K approaches the open-loop rate") {
        // The best margin shrinks like (rho - 0.4)^2, so the relative acceptance threshold
        // leaves the certificate about 5e-5 above the open-loop rate.
        Query q = base(plants::ex1, true);
        q.n_b = q.n_f = 1;
        q.run_oracles = false;
        const auto rows = sweep_k(q, 1e-7, 1e-7, 1);
        CHECK(rows[0].rho_noncausal > 0.4);
        CHECK(rows[0].rho_noncausal - 0.4 <= 1e-4);
        const double gap = rows[0].rho_noncausal - 0.4;
        const RateProbe below = probe(method_query(q, Method::NoncausalPlain, 1), 0.4 + 0.9 * gap, false);
        CHECK(below.solution.t < feasibility_threshold(below.problem));
        CHECK(below.solution.status != SdpStatus::Feasible);
    }
    SUBCASE("second-order plant: causal above noncausal above the linear bound") {
        Query q = base(plants::ex2, true);
        q.n_b = q.n_f = 3;
        q.run_oracles = false;
        const auto rows = sweep_k(q, 2.0, 9.0, 4, 4);
        REQUIRE(rows.size() == 4);
        double prev = 0.0;
        for (const auto& r : rows) {
            CAPTURE(r.K);
            CHECK(r.rho_noncausal >= r.rho_lower - 2e-6);
            CHECK(r.rho_causal >= r.rho_noncausal - 2e-6);
            CHECK(r.rho_noncausal >= prev - 2e-6);
            prev = r.rho_noncausal;
        }
        std::ostringstream os;
        write_sweep_csv(rows, os);
        CHECK(os.str().rfind("K,rho_lower,rho_causal,rho_anticausal,rho_noncausal\n", 0) == 0);
    }
    SUBCASE("no certificate prints nan") {
        SweepRow r;
        r.K = 12.0;
        r.rho_lower = 0.9;
        r.rho_causal = 0.99;
        r.rho_anticausal = std::nan("");
        r.rho_noncausal = 0.98;
        std::ostringstream os;
        write_sweep_csv({r}, os);
        CHECK(os.str().find("12.000000,0.900000,0.990000,nan,0.980000") != std::string::npos);
    }
    SUBCASE("rows past the Nyquist value are flagged") {
        Query q = base(plants::ex1, true);
        q.n_b = q.n_f = 1;
        const auto rows = sweep_k(q, 1.0, 2.0, 2);
        CHECK_FALSE(rows[0].past_nyquist);
        CHECK(rows[1].past_nyquist);
    }
}

TEST_CASE("class comparison") {
    SUBCASE("second-order plant, odd") {
        Query q = base(plants::ex2, true);
        q.n_b = q.n_f = 6;
        q.run_oracles = false;
        const ClassComparison cc = class_comparison(q);
        REQUIRE(cc.any_certified);
        double rate[4] = {};
        for (const auto& r : cc.results) rate[static_cast<int>(r.method)] = r.certificate.rho_upper;
        const double slack = 2.0 * q.bisect_tol;
        CHECK(rate[2] <= rate[1] + slack);
        CHECK(rate[1] <= rate[0] + slack);
        for (size_t i = 1; i < cc.results.size(); ++i)
            CHECK(cc.results[i - 1].certificate.rho_upper <= cc.results[i].certificate.rho_upper);
    }
    SUBCASE("static multiplier: every class coincides") {
        Query q = base(plants::ex1, true);
        q.n_b = q.n_f = 0;
        q.run_oracles = false;
        const ClassComparison cc = class_comparison(q);
        for (const auto& r : cc.results)
            CHECK(r.certificate.rho_upper == Approx(cc.results[0].certificate.rho_upper).epsilon(2e-6));
    }
}

TEST_CASE("richer multipliers do not hurt") {
    Query q = base(plants::ex2, true);
    q.run_oracles = false;
    double prev = 1.0;
    for (int nz = 1; nz <= 4; ++nz) {
        const double r = certify(method_query(q, Method::NoncausalPlain, nz)).rho_upper;
        CHECK(r <= prev + 2.0 * q.bisect_tol);
        prev = r;
    }
}
