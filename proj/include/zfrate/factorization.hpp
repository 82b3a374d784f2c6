#pragma once

#include <string>

#include "zfrate/lti.hpp"
#include "zfrate/multiplier.hpp"
#include "zfrate/types.hpp"

namespace zfrate {

// Psi1: [[K M, -M], [0, 1]] with Kp = [[0,1],[1,0]] (causal multipliers only).
// Psi2: coupled lifting, causal and anticausal taps share one delay basis of length n_z.
// Psi3: decoupled lifting, separate causal (n_b) and anticausal (n_f) bases.
// Psi3Rho: decoupled lifting with rho^{-i} / rho^{i} weighted bases, valid for every class
//          in the rho-IQC framework.
enum class Scheme { Psi1, Psi2, Psi3, Psi3Rho };

// Frequency substitution applied to a Psi(z): RhoZ gives Psi(rho z) (A, B scaled by 1/rho),
// ZOverRho gives Psi(z / rho) (A, B scaled by rho).
enum class Substitution { None, RhoZ, ZOverRho };

struct Factorization {
    StateSpace psi;  // inputs (v, w); outputs per scheme
    Matrix kp;       // constant symmetric; affine in the multiplier taps
    Scheme scheme = Scheme::Psi2;
    Substitution substitution = Substitution::None;
    double rho = 1.0;
    double K = 1.0;
    FirMultiplier multiplier;
};

// Zames-Falb Pi(z) = [[0, K M*(z)], [K M(z), -(M(z) + M*(z))]] on |z| = 1, with
// M*(z) = M(1/z) for real taps. Rho-form multipliers give Pi(rho, z).
ComplexMatrix build_pi(const FirMultiplier& m, double K, Complex z);

// Substitutions other than None take rho from a Rho-form multiplier.
Factorization build_psi1(const FirMultiplier& m, double K, Substitution sub = Substitution::None);
Factorization build_psi2(const FirMultiplier& m, double K, Substitution sub = Substitution::None);
Factorization build_psi3(const FirMultiplier& m, double K, Substitution sub = Substitution::None);
Factorization build_psi3_rho(const FirMultiplier& m, double K, double rho);

Factorization build_factorization(Scheme scheme, const FirMultiplier& m, double K,
                                  Substitution sub = Substitution::None);

// Throws InvalidScheme when (scheme, substitution, causality, form) is not a valid pairing.
void check_validity(Scheme scheme, Substitution sub, const FirMultiplier& m);

// Same factorization with different tap values (n_b, n_f unchanged).
Factorization with_taps(const Factorization& f, const FirMultiplier& m);

// Psi(z) evaluated from its realization, and Psi*(z) Kp Psi(z).
ComplexMatrix psi_response(const Factorization& f, Complex z);
ComplexMatrix factored_pi(const Factorization& f, Complex z);

// Psi(z) assembled directly from the lifting-matrix definition (delay vectors with
// their rho weights), independent of the state-space realization.
ComplexMatrix symbolic_psi(const Factorization& f, Complex z);

// Series interconnection Psi * [G; I]; the plant is used as given (scale it first
// where the framework calls for G(rho z)).
StateSpace augment(const Factorization& f, const StateSpace& plant);

// Kp built from explicit tap vectors; used by the LMI assembly to expose its affine structure.
Matrix kp_matrix(Scheme scheme, int n_b, int n_f, double K, double h0, const std::vector<double>& causal,
                 const std::vector<double>& anticausal);

std::string to_string(Scheme s);
std::string to_string(Substitution s);

}  // namespace zfrate
