#pragma once

#include <string>
#include <vector>

#include "zfrate/types.hpp"

namespace zfrate {

// Plain: M(z) = h0 - sum h_{-i} z^{-i} - sum h_i z^i (IQC framework, rho-penalized l1 norm).
// Rho:   M(rho, z) = h0 - sum h_{-i} rho^{-i} z^{-i} - sum h_i rho^i z^i (rho-IQC framework).
enum class Form { Plain, Rho };

enum class Causality { Causal, Anticausal, Noncausal };

enum class Framework { Iqc, RhoIqc };

// Strict l1 inequality is encoded as a margin of at least this much.
inline constexpr double kL1Margin = 1e-6;

struct FirMultiplier {
    double h0 = 1.0;
    std::vector<double> causal;      // h_{-1} ... h_{-n_b}, taps on z^{-1} ... z^{-n_b}
    std::vector<double> anticausal;  // h_1 ... h_{n_f}, taps on z^1 ... z^{n_f}
    bool odd_nonlinearity = false;
    Form form = Form::Plain;
    double rho = 1.0;  // only meaningful for Form::Rho

    int n_b() const { return static_cast<int>(causal.size()); }
    int n_f() const { return static_cast<int>(anticausal.size()); }
    bool is_static() const { return causal.empty() && anticausal.empty(); }

    static FirMultiplier identity(Form form = Form::Plain, double rho = 1.0);
};

// n_f == 0 (including the static multiplier) is causal; n_b == 0 < n_f is anticausal.
Causality causality_of(int n_b, int n_f);
Causality causality_of(const FirMultiplier& m);

struct MultiplierClass {
    Causality causality = Causality::Noncausal;
    Framework framework = Framework::Iqc;
};

Complex eval(const FirMultiplier& m, Complex z);

struct L1Check {
    bool satisfied = false;
    double margin = 0.0;  // h0 minus the weighted tap sum
};

// Weights w_i in sum w_i |h_i| < h0 for each tap side.
std::vector<double> l1_causal_weights(Form form, int n_b, double rho);
std::vector<double> l1_anticausal_weights(Form form, int n_f, double rho);

L1Check l1_condition(const FirMultiplier& m, double rho);

// Sign constraint for non-odd nonlinearities: every tap nonnegative.
bool sign_condition(const FirMultiplier& m, double tol = 0.0);

// Plain <-> Rho with h_{-i} = h~_{-i} rho^{i}, h_i = h~_i rho^{-i}; the converted
// multiplier satisfies eval(converted, z) == eval(original, z) on the unit circle.
FirMultiplier convert(const FirMultiplier& m, double rho, Form target);

std::string to_string(Form f);
std::string to_string(Causality c);
std::string to_string(Framework f);

}  // namespace zfrate
