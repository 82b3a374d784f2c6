#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "zfrate/factorization.hpp"
#include "zfrate/lti.hpp"
#include "zfrate/multiplier.hpp"
#include "zfrate/types.hpp"

namespace zfrate {

// IqcForm: rho-scaled plant, sigma = 1 (IQC framework, Psi3Rho, and substituted Psi).
// CausalRhoForm: unscaled plant and unscaled Psi, sigma = rho^2 (causal rho-IQC).
// AnticausalRhoForm: rho-scaled plant with the z/rho substituted Psi, sigma = 1.
enum class LmiVariant { IqcForm, CausalRhoForm, AnticausalRhoForm };

// One term coef * M^T P M of the KYP block, P symmetric of size n_state.
struct KypTerm {
    double coef = 1.0;
    Matrix M;
};

// sum_i a_i x_i <= rhs, sparse over the full variable vector.
struct LinearConstraint {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
};

// F(x) = F0 + sum_i x_i F_i, required F(x) <= 0 with x[margin_var] = t maximized.
// The first p_vars() variables are the upper triangle of P (row-major) and enter through
// the structured KYP terms; every later variable carries an explicit dense matrix.
struct LmiProblem {
    int n_state = 0;
    int block = 0;
    std::vector<KypTerm> kyp;
    Matrix f0;
    std::vector<Matrix> f_dense;
    std::vector<std::string> var_names;
    std::vector<LinearConstraint> linear;
    int margin_var = -1;

    // Bookkeeping for decode.
    LmiVariant variant = LmiVariant::IqcForm;
    double rho = 1.0;
    double sigma = 1.0;
    int n_b = 0;
    int n_f = 0;
    bool odd = false;
    Form form = Form::Plain;
    int full_states = 0;  // augmented order before controllable-subspace reduction

    int p_vars() const { return n_state * (n_state + 1) / 2; }
    int num_vars() const { return p_vars() + static_cast<int>(f_dense.size()); }
    int tap_offset() const { return p_vars(); }
    int eta_offset() const { return p_vars() + n_b + n_f; }
};

struct AssembleOptions {
    // Restrict the KYP certificate to the reachable subspace of (A_hat, B_hat).
    bool reduce = true;
    double reduce_tol = 1e-9;
};

LmiProblem assemble(const Factorization& fact, const StateSpace& plant, double K, double rho,
                    LmiVariant variant, bool odd, const AssembleOptions& opts = {});

struct LmiDimensions {
    int lmi_size = 0;
    int num_vars = 0;
    int p_vars = 0;
};

LmiDimensions dimensions(const LmiProblem& p);

// Index of P(a, b), a <= b, in the variable vector.
int p_index(int n, int a, int b);

// Dense F_i for any variable index (P variables expanded through the KYP terms).
Matrix basis_matrix(const LmiProblem& p, int i);

// F0 + sum x_i F_i; with include_margin = false the margin variable is left out.
Matrix lmi_value(const LmiProblem& p, const Vector& x, bool include_margin = true);

double max_linear_violation(const LmiProblem& p, const Vector& x);

// 1e-9 (1 + ||F0||_F).
double feasibility_threshold(const LmiProblem& p);

struct LmiDecoded {
    Matrix P;
    FirMultiplier multiplier;
    double t = 0.0;
};

LmiDecoded decode(const LmiProblem& p, const Vector& x);

// Sparse text dump: header line "# zfrate-lmi block=<n> vars=<q>", then one line per
// nonzero "var_index row col value" with var_index 0 standing for F0 and i+1 for x_i.
void dump(const LmiProblem& p, std::ostream& os);

std::string to_string(LmiVariant v);

}  // namespace zfrate
