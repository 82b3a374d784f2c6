#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "zfrate/factorization.hpp"
#include "zfrate/lmi.hpp"
#include "zfrate/lti.hpp"
#include "zfrate/multiplier.hpp"
#include "zfrate/sdp.hpp"
#include "zfrate/verify.hpp"

namespace zfrate {

struct Query {
    TransferFunction plant;
    double K = 1.0;
    MultiplierClass cls;
    bool odd = false;
    int n_b = 0;
    int n_f = 0;
    Scheme scheme = Scheme::Psi2;
    double bisect_tol = 1e-6;
    SdpOptions sdp;
    AssembleOptions lmi;
    bool run_oracles = true;
    int grid_n = 2048;
    int tau_grid = kDefaultTauGrid;
    int jobs = 1;  // battery threads
};

// How a (class, framework, scheme) triple is carried out: multiplier form, frequency
// substitution on Psi, and LMI variant. Throws InvalidScheme for invalid pairings.
struct Pipeline {
    Form form = Form::Plain;
    Substitution substitution = Substitution::None;
    LmiVariant variant = LmiVariant::IqcForm;
};

Pipeline resolve_pipeline(const MultiplierClass& cls, Scheme scheme, int n_b, int n_f);

struct OracleReport {
    bool ran = false;
    FdiResult fdi;
    FdiResult matrix_fdi;
    BatteryReport battery;
    bool passed() const;
};

struct Certificate {
    bool certified = false;
    double rho_upper = 1.0;
    FirMultiplier multiplier;
    double margin = 0.0;
    double lower_bound = 0.0;
    bool past_nyquist = false;
    // The final re-solve at rho_upper - bisect_tol came back without a certificate.
    bool bracket_ok = true;
    int solves = 0;
    LmiDimensions dims;
    OracleReport oracle;
};

// One bisection step: assemble and solve at a fixed rho (margin maximized unless early).
struct RateProbe {
    SdpSolution solution;
    LmiProblem problem;
    Factorization factorization;
};

RateProbe probe(const Query& q, double rho, bool early_stop);

Certificate certify(const Query& q);

// The four columns of the comparison table: causal and anticausal in the rho-IQC framework
// with the coupled lifting, noncausal in the IQC framework with the coupled lifting, and
// noncausal rho-form with the rho-weighted decoupled lifting.
enum class Method { Causal, Anticausal, NoncausalPlain, NoncausalRho };

inline constexpr std::array<Method, 4> kAllMethods = {Method::Causal, Method::Anticausal, Method::NoncausalPlain,
                                                      Method::NoncausalRho};

Query method_query(const Query& base, Method m, int n_z);

std::string to_string(Method m);

struct SweepRow {
    double K = 0.0;
    double rho_lower = 0.0;
    double rho_causal = 0.0;  // NaN: no certificate
    double rho_anticausal = 0.0;
    double rho_noncausal = 0.0;
    bool past_nyquist = false;
};

// Steps points from k_min to k_max inclusive (steps == 1 gives k_max). K points run on
// `jobs` threads; the noncausal column uses the IQC-framework pipeline.
std::vector<SweepRow> sweep_k(const Query& q, double k_min, double k_max, int steps, int jobs = 1);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

struct ClassResult {
    Method method;
    Certificate certificate;
};

struct ClassComparison {
    std::vector<ClassResult> results;  // sorted by rho_upper, uncertified last
    Method best = Method::NoncausalPlain;
    bool any_certified = false;
};

// Runs every method at n_z = max(n_b, n_f); reports but does not enforce an ordering.
ClassComparison class_comparison(const Query& q);

}  // namespace zfrate
