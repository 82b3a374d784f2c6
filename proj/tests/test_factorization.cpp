#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "plants.hpp"
#include "properties.hpp"
#include "zfrate/factorization.hpp"

using namespace zfrate;
using doctest::Approx;

namespace {

FirMultiplier taps(std::vector<double> causal, std::vector<double> anticausal, Form form = Form::Plain,
                   double rho = 1.0) {
    FirMultiplier m;
    m.causal = std::move(causal);
    m.anticausal = std::move(anticausal);
    m.form = form;
    m.rho = rho;
    return m;
}

double identity_error(const Factorization& f, const FirMultiplier& m, double K, int n) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = oracle::sample(i, n);
        const Eigen::Matrix2cd ref = oracle::pi(m, K, z);
        worst = std::max(worst, (factored_pi(f, z) - ref).norm() / (1.0 + ref.norm()));
    }
    return worst;
}

bool is_valid(Scheme s, Causality c, Form f, Substitution sub) {
    for (const auto& cb : props::valid_combos())
        if (cb.scheme == s && cb.causality == c && cb.form == f && cb.sub == sub) return true;
    return false;
}

}  // namespace

TEST_CASE("build_pi") {
    SUBCASE("static multiplier") {
        const ComplexMatrix p = build_pi(FirMultiplier::identity(), 2.0, oracle::unit(0.9));
        CHECK(std::abs(p(0, 0)) < 1e-15);
        CHECK(std::abs(p(0, 1) - 2.0) < 1e-15);
        CHECK(std::abs(p(1, 0) - 2.0) < 1e-15);
        CHECK(std::abs(p(1, 1) + 2.0) < 1e-15);
    }
    SUBCASE("one causal tap at z = 1") {
        const ComplexMatrix p = build_pi(taps({0.3}, {}), 1.0, 1.0);
        CHECK(p(0, 1).real() == Approx(0.7));
        CHECK(p(1, 0).real() == Approx(0.7));
        CHECK(p(1, 1).real() == Approx(-1.4));
    }
    SUBCASE("Hermitian and equal to the oracle") {
        std::mt19937_64 rng(5);
        for (int k = 0; k < 20; ++k) {
            const FirMultiplier m = props::random_multiplier(rng, Causality::Noncausal, Form::Plain, 1.0, 4);
            const auto z = oracle::unit(0.1 + 0.3 * k);
            const ComplexMatrix p = build_pi(m, 3.0, z);
            CHECK((p - p.adjoint()).norm() < 1e-14);
            CHECK((p - oracle::pi(m, 3.0, z)).norm() < 1e-13);
        }
    }
    SUBCASE("off the unit circle") { CHECK_THROWS(build_pi(taps({0.3}, {}), 1.0, 0.5)); }
}

TEST_CASE("psi1") {
    SUBCASE("static multiplier") {
        const Factorization f = build_psi1(FirMultiplier::identity(), 2.0);
        CHECK(f.psi.is_static());
        Matrix expect(2, 2);
        expect << 2.0, -1.0, 0.0, 1.0;
        CHECK((f.psi.D - expect).norm() < 1e-15);
        CHECK(identity_error(f, FirMultiplier::identity(), 2.0, 8) < 1e-15);
    }
    SUBCASE("causal multiplier") {
        const FirMultiplier m = taps({0.3, -0.1, 0.05}, {});
        CHECK(identity_error(build_psi1(m, 4.0), m, 4.0, 32) < 1e-11);
    }
    SUBCASE("anticausal multiplier is rejected") {
        CHECK_THROWS_AS(build_psi1(taps({}, {0.2}), 1.0), InvalidScheme);
        CHECK_THROWS_AS(build_psi1(taps({0.1}, {0.2}), 1.0), InvalidScheme);
    }
}

TEST_CASE("psi2") {
    SUBCASE("one causal tap") {
        const FirMultiplier m = taps({0.3}, {0.0});
        CHECK(identity_error(build_psi2(m, 1.0), m, 1.0, 32) < 1e-11);
    }
    SUBCASE("zero taps give the static Pi") {
        const FirMultiplier m = taps({0.0}, {0.0});
        const Factorization f = build_psi2(m, 2.0);
        for (int i = 0; i < 8; ++i) {
            const ComplexMatrix p = factored_pi(f, oracle::sample(i, 8));
            CHECK(std::abs(p(0, 1) - 2.0) < 1e-14);
            CHECK(std::abs(p(1, 1) + 2.0) < 1e-14);
        }
    }
    SUBCASE("unequal sides are zero padded") {
        const FirMultiplier m = taps({0.3, 0.1, 0.05}, {0.2});
        CHECK(identity_error(build_psi2(m, 3.0), m, 3.0, 32) < 1e-11);
    }
    SUBCASE("noncausal with a rho substitution") {
        CHECK_THROWS_AS(build_psi2(taps({0.1}, {0.1}, Form::Rho, 0.8), 1.0, Substitution::RhoZ), InvalidScheme);
        CHECK_THROWS_AS(build_psi2(taps({0.1}, {0.1}, Form::Rho, 0.8), 1.0, Substitution::ZOverRho),
                        InvalidScheme);
    }
    SUBCASE("substituted forms factor the rho-form multiplier") {
        const FirMultiplier c = taps({0.3, 0.1}, {}, Form::Rho, 0.8);
        CHECK(identity_error(build_psi2(c, 2.0, Substitution::RhoZ), c, 2.0, 32) < 1e-11);
        const FirMultiplier a = taps({}, {0.3, 0.1}, Form::Rho, 0.8);
        CHECK(identity_error(build_psi2(a, 2.0, Substitution::ZOverRho), a, 2.0, 32) < 1e-11);
    }
}

TEST_CASE("psi3") {
    SUBCASE("causal taps reproduce the psi2 Pi") {
        const FirMultiplier m = taps({0.3, -0.2}, {});
        const Factorization f2 = build_psi2(m, 2.0), f3 = build_psi3(m, 2.0), f1 = build_psi1(m, 2.0);
        for (int i = 0; i < 32; ++i) {
            const auto z = oracle::sample(i, 32);
            CHECK((factored_pi(f3, z) - factored_pi(f2, z)).norm() < 1e-11);
            CHECK((factored_pi(f1, z) - factored_pi(f2, z)).norm() < 1e-11);
        }
    }
    SUBCASE("asymmetric orders") {
        const FirMultiplier m = taps({0.3, 0.1}, {0.25});
        CHECK(identity_error(build_psi3(m, 5.0), m, 5.0, 32) < 1e-11);
    }
    SUBCASE("h0 split across the two sides") {
        const Factorization f = build_psi3(taps({0.0}, {0.0}), 3.0);
        CHECK(std::abs(factored_pi(f, oracle::unit(0.4))(1, 0) - 3.0) < 1e-14);
    }
}

TEST_CASE("psi3 rho") {
    SUBCASE("zero taps") {
        const Factorization f = build_psi3_rho(taps({0.0}, {0.0}, Form::Rho, 0.8), 2.0, 0.8);
        for (int i = 0; i < 8; ++i) {
            const ComplexMatrix p = factored_pi(f, oracle::sample(i, 8));
            CHECK(std::abs(p(0, 1) - 2.0) < 1e-14);
            CHECK(std::abs(p(1, 1) + 2.0) < 1e-14);
        }
    }
    SUBCASE("random noncausal multipliers") {
        std::mt19937_64 rng(17);
        for (int k = 0; k < 20; ++k) {
            const FirMultiplier m = props::random_multiplier(rng, Causality::Noncausal, Form::Rho, 0.85, 4);
            const Factorization f = build_psi3_rho(m, 7.0, 0.85);
            CHECK(identity_error(f, m, 7.0, 32) < 1e-10);
            CHECK(spectral_radius(f.psi) < 1.0);
        }
    }
    SUBCASE("equal orders") {
        const FirMultiplier m = taps({0.2, 0.1}, {0.3, -0.1}, Form::Rho, 0.9);
        CHECK(identity_error(build_psi3_rho(m, 2.0, 0.9), m, 2.0, 32) < 1e-10);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(build_psi3_rho(taps({0.1}, {0.1}), 1.0, 0.8), InvalidScheme);
        CHECK_THROWS(build_psi3_rho(taps({0.1}, {0.1}, Form::Rho, 1.0), 1.0, 1.0));
    }
}

TEST_CASE("realization matches the symbolic lifting matrix") {
    std::mt19937_64 rng(23);
    for (const auto& cb : props::valid_combos()) {
        CAPTURE(to_string(cb.scheme));
        const FirMultiplier m = props::random_multiplier(rng, cb.causality, cb.form, 0.75, 4);
        const Factorization f =
            cb.scheme == Scheme::Psi3Rho ? build_psi3_rho(m, 2.0, 0.75) : build_factorization(cb.scheme, m, 2.0, cb.sub);
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
            const auto z = oracle::sample(i, 64);
            const ComplexMatrix ss = psi_response(f, z);
            worst = std::max(worst, (ss - symbolic_psi(f, z)).norm() / (1.0 + ss.norm()));
        }
        CHECK(worst < 1e-10);
        CHECK((f.kp - f.kp.transpose()).norm() == 0.0);
        CHECK(spectral_radius(f.psi) < 1.0);
    }
}

TEST_CASE("validity matrix") {
    int valid = 0;
    for (Scheme s : {Scheme::Psi1, Scheme::Psi2, Scheme::Psi3, Scheme::Psi3Rho})
        for (Causality c : {Causality::Causal, Causality::Anticausal, Causality::Noncausal})
            for (Form fm : {Form::Plain, Form::Rho})
                for (Substitution sub : {Substitution::None, Substitution::RhoZ, Substitution::ZOverRho}) {
                    FirMultiplier m = taps(c == Causality::Anticausal ? std::vector<double>{} : std::vector{0.1},
                                           c == Causality::Causal ? std::vector<double>{} : std::vector{0.1}, fm,
                                           fm == Form::Rho ? 0.8 : 1.0);
                    CAPTURE(to_string(s));
                    CAPTURE(to_string(c));
                    CAPTURE(to_string(sub));
                    if (is_valid(s, c, fm, sub)) {
                        ++valid;
                        CHECK_NOTHROW(check_validity(s, sub, m));
                    } else {
                        CHECK_THROWS_AS(check_validity(s, sub, m), InvalidScheme);
                    }
                }
    CHECK(valid == static_cast<int>(props::valid_combos().size()));
}

TEST_CASE("Kp is affine in the taps") {
    const std::vector<double> c1{0.3, -0.1}, a1{0.2}, c2{-0.05, 0.4}, a2{0.1};
    for (Scheme s : {Scheme::Psi2, Scheme::Psi3, Scheme::Psi3Rho}) {
        const Matrix k1 = kp_matrix(s, 2, 1, 3.0, 1.0, c1, a1);
        const Matrix k2 = kp_matrix(s, 2, 1, 3.0, 1.0, c2, a2);
        const Matrix k0 = kp_matrix(s, 2, 1, 3.0, 1.0, {0.0, 0.0}, {0.0});
        const Matrix k12 = kp_matrix(s, 2, 1, 3.0, 1.0, {c1[0] + c2[0], c1[1] + c2[1]}, {a1[0] + a2[0]});
        CHECK((k1 + k2 - k0 - k12).norm() < 1e-15);
    }
    const Matrix k1 = kp_matrix(Scheme::Psi1, 2, 0, 3.0, 1.0, c1, {});
    CHECK((k1 - kp_matrix(Scheme::Psi1, 2, 0, 3.0, 1.0, c2, {})).norm() == 0.0);
}

TEST_CASE("with_taps swaps values and keeps the structure") {
    const FirMultiplier m0 = taps({0.0, 0.0}, {0.0});
    const FirMultiplier m1 = taps({0.3, 0.1}, {-0.2});
    const Factorization f = with_taps(build_psi2(m0, 2.0), m1);
    CHECK(identity_error(f, m1, 2.0, 32) < 1e-11);
    CHECK_THROWS(with_taps(f, taps({0.1}, {0.1})));
}

TEST_CASE("augment") {
    SUBCASE("static pieces") {
        const Factorization f = build_psi1(FirMultiplier::identity(), 2.0);
        const StateSpace g = StateSpace::gain(Matrix::Constant(1, 1, 0.5));
        const StateSpace a = augment(f, g);
        CHECK(a.is_static());
        Matrix expect = f.psi.D.col(1) + f.psi.D.col(0) * 0.5;
        CHECK((a.D - expect).norm() < 1e-15);
    }
    SUBCASE("order adds up") {
        const StateSpace g = realize(TransferFunction(plants::ex1.num, plants::ex1.den));
        const Factorization f = build_psi2(taps({0.0}, {0.0}), 1.0);
        CHECK(augment(f, g).states() == 1 + f.psi.states());
        CHECK(f.psi.states() == 2);
    }
    SUBCASE("response equals Psi [G; 1]") {
        const auto& e = plants::ex3;
        const StateSpace g = realize(TransferFunction(e.num, e.den));
        const FirMultiplier m = taps({0.3, 0.1}, {0.2, 0.05});
        const Factorization f = build_psi3(m, e.K);
        const StateSpace a = augment(f, g);
        for (int i = 0; i < 32; ++i) {
            const auto z = oracle::sample(i, 32);
            ComplexVector gi(2);
            gi << oracle::rational(e.num, e.den, z), 1.0;
            const ComplexVector ref = psi_response(f, z) * gi;
            CHECK((freq_response(a, z).col(0) - ref).norm() < 1e-10 * (1.0 + ref.norm()));
        }
    }
}

TEST_CASE("factorization identity on random multipliers") {
    const props::IdentityReport rep = props::factorization_identity_suite(200, 128, 424242);
    CAPTURE(rep.worst_label);
    CHECK(rep.cases == 200);
    CHECK(rep.worst_identity < 1e-9);
    CHECK(rep.worst_realization < 1e-10);
}
