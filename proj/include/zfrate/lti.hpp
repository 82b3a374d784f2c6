#pragma once

#include <complex>
#include <vector>

#include "zfrate/types.hpp"

namespace zfrate {

// Rational transfer function in z, coefficients in descending powers.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    TransferFunction() : num{0.0}, den{1.0} {}
    TransferFunction(std::vector<double> numerator, std::vector<double> denominator);

    int order() const { return static_cast<int>(den.size()) - 1; }
    Complex eval(Complex z) const;
};

// Discrete-time realization G(z) = C (zI - A)^{-1} B + D.
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

    // Static gain with no states.
    static StateSpace gain(const Matrix& d);

    Index states() const { return A.rows(); }
    Index inputs() const { return D.cols(); }
    Index outputs() const { return D.rows(); }
    bool is_static() const { return A.rows() == 0; }
};

struct NyquistValue {
    double value = 0.0;
    bool infinite = false;
};

struct RateBounds {
    double lower = 0.0;
    double tau_at_max = 0.0;
    NyquistValue nyquist;
    // K is at or beyond the Nyquist value; the linear bound carries no meaning then.
    bool past_nyquist = false;
};

inline constexpr int kDefaultTauGrid = 1001;

// Controllable canonical form, leading denominator coefficient normalized to one.
StateSpace realize(const TransferFunction& tf);

// G(rho z): (A/rho, B/rho, C, D).
StateSpace scale_rho(const StateSpace& sys, double rho);

double spectral_radius(const Matrix& A);
double spectral_radius(const StateSpace& sys);
bool is_stable(const StateSpace& sys);

ComplexMatrix freq_response(const StateSpace& sys, Complex z);

// Positive-feedback closed loop w = gain * v for a SISO plant; the characteristic
// polynomial is that of 1 - gain * G(z).
Matrix closed_loop_matrix(const StateSpace& sys, double gain);

NyquistValue nyquist_value(const StateSpace& sys, int tau_grid = kDefaultTauGrid, double rel_tol = 1e-6);

// max over tau in [0,1] of the closed-loop spectral radius at gain tau*K.
double linear_lower_bound(const StateSpace& sys, double K, int tau_grid = kDefaultTauGrid);

RateBounds rate_bounds(const StateSpace& sys, double K, int tau_grid = kDefaultTauGrid);

// Orthonormal basis of the reachable subspace of (A, B) via block Arnoldi
// with reorthogonalization; columns are dropped once the residual falls below tol.
Matrix controllable_basis(const Matrix& A, const Matrix& B, double tol = 1e-9);

}  // namespace zfrate
