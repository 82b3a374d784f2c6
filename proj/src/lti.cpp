#include "zfrate/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zfrate {

namespace {

void strip_leading_zeros(std::vector<double>& p) {
    while (p.size() > 1 && p.front() == 0.0) p.erase(p.begin());
}

Complex polyval(const std::vector<double>& p, Complex z) {
    Complex acc = 0.0;
    for (double c : p) acc = acc * z + c;
    return acc;
}

}  // namespace

TransferFunction::TransferFunction(std::vector<double> numerator, std::vector<double> denominator)
    : num(std::move(numerator)), den(std::move(denominator)) {
    if (den.empty()) throw std::invalid_argument("transfer function: empty denominator");
    if (num.empty()) num = {0.0};
    strip_leading_zeros(num);
    strip_leading_zeros(den);
    if (den.front() == 0.0) throw std::invalid_argument("transfer function: zero denominator");
    const bool zero_num = num.size() == 1 && num.front() == 0.0;
    if (!zero_num && num.size() > den.size())
        throw std::invalid_argument("transfer function: not proper (numerator degree exceeds denominator degree)");
}

Complex TransferFunction::eval(Complex z) const {
    return polyval(num, z) / polyval(den, z);
}

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    const Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("state space: A must be square");
    if (B.rows() != n) throw std::invalid_argument("state space: B row count must match A");
    if (C.cols() != n) throw std::invalid_argument("state space: C column count must match A");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw std::invalid_argument("state space: D dimensions inconsistent with B and C");
}

StateSpace StateSpace::gain(const Matrix& d) {
    return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

StateSpace realize(const TransferFunction& tf) {
    const int n = tf.order();
    const double lead = tf.den.front();
    std::vector<double> den(tf.den.size());
    std::transform(tf.den.begin(), tf.den.end(), den.begin(), [&](double c) { return c / lead; });
    std::vector<double> num(n + 1, 0.0);
    const bool zero_num = tf.num.size() == 1 && tf.num.front() == 0.0;
    if (!zero_num) {
        const size_t off = num.size() - tf.num.size();
        for (size_t i = 0; i < tf.num.size(); ++i) num[off + i] = tf.num[i] / lead;
    }

    Matrix D(1, 1);
    D(0, 0) = num[0];
    if (n == 0) return StateSpace::gain(D);

    Matrix A = Matrix::Zero(n, n);
    Matrix B = Matrix::Zero(n, 1);
    Matrix C = Matrix::Zero(1, n);
    for (int j = 0; j < n; ++j) {
        A(0, j) = -den[j + 1];
        C(0, j) = num[j + 1] - num[0] * den[j + 1];
    }
    for (int i = 1; i < n; ++i) A(i, i - 1) = 1.0;
    B(0, 0) = 1.0;
    return StateSpace(A, B, C, D);
}

StateSpace scale_rho(const StateSpace& sys, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("scale_rho: rho must be positive");
    return StateSpace(sys.A / rho, sys.B / rho, sys.C, sys.D);
}

double spectral_radius(const Matrix& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const StateSpace& sys) { return spectral_radius(sys.A); }

bool is_stable(const StateSpace& sys) { return spectral_radius(sys) < 1.0; }

ComplexMatrix freq_response(const StateSpace& sys, Complex z) {
    ComplexMatrix D = sys.D.cast<Complex>();
    if (sys.is_static()) return D;
    const Index n = sys.states();
    ComplexMatrix M = z * ComplexMatrix::Identity(n, n) - sys.A.cast<Complex>();
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw std::domain_error("freq_response: zI - A is singular at the evaluation point");
    return sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>()) + D;
}

Matrix closed_loop_matrix(const StateSpace& sys, double gain) {
    if (sys.inputs() != 1 || sys.outputs() != 1)
        throw std::invalid_argument("closed_loop_matrix: SISO plant required");
    const double s = 1.0 - gain * sys.D(0, 0);
    if (std::abs(s) < 1e-12) throw std::domain_error("closed loop ill-posed: 1 - gain*D is singular");
    return sys.A + sys.B * (gain / s) * sys.C;
}

namespace {

double closed_loop_radius(const StateSpace& sys, double gain) {
    return spectral_radius(closed_loop_matrix(sys, gain));
}

bool homotopy_stable(const StateSpace& sys, double K, int tau_grid) {
    for (int i = 0; i < tau_grid; ++i) {
        const double tau = tau_grid == 1 ? 1.0 : static_cast<double>(i) / (tau_grid - 1);
        const double s = 1.0 - tau * K * sys.D(0, 0);
        if (std::abs(s) < 1e-12) return false;
        if (closed_loop_radius(sys, tau * K) >= 1.0) return false;
    }
    return true;
}

}  // namespace

NyquistValue nyquist_value(const StateSpace& sys, int tau_grid, double rel_tol) {
    if (!is_stable(sys)) throw UnstablePlant("nyquist_value: plant is not stable");
    if (tau_grid < 2) throw std::invalid_argument("nyquist_value: tau grid needs at least two points");
    NyquistValue out;
    const bool zero_gain = sys.D.isZero(0.0) && (sys.is_static() || sys.C.isZero(0.0) || sys.B.isZero(0.0));
    if (zero_gain) {
        out.infinite = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (homotopy_stable(sys, hi, tau_grid)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            out.infinite = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (homotopy_stable(sys, mid, tau_grid))
            lo = mid;
        else
            hi = mid;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

namespace {

std::pair<double, double> lower_bound_with_argmax(const StateSpace& sys, double K, int tau_grid) {
    if (tau_grid < 2) throw std::invalid_argument("linear_lower_bound: tau grid needs at least two points");
    if (K < 0.0) throw std::invalid_argument("linear_lower_bound: K must be nonnegative");
    const double step = 1.0 / (tau_grid - 1);
    double best = -1.0;
    int arg = 0;
    for (int i = 0; i < tau_grid; ++i) {
        const double r = closed_loop_radius(sys, i * step * K);
        if (r > best) {
            best = r;
            arg = i;
        }
    }
    // One refinement pass, ten times finer, around the coarse argmax.
    const double a = std::max(0.0, (arg - 1) * step);
    const double b = std::min(1.0, (arg + 1) * step);
    const int fine = 20;
    double best_tau = arg * step;
    for (int j = 0; j <= fine; ++j) {
        const double tau = a + (b - a) * j / fine;
        const double r = closed_loop_radius(sys, tau * K);
        if (r > best) {
            best = r;
            best_tau = tau;
        }
    }
    return {best, best_tau};
}

}  // namespace

double linear_lower_bound(const StateSpace& sys, double K, int tau_grid) {
    return lower_bound_with_argmax(sys, K, tau_grid).first;
}

RateBounds rate_bounds(const StateSpace& sys, double K, int tau_grid) {
    RateBounds rb;
    rb.nyquist = nyquist_value(sys, tau_grid);
    const auto [lower, tau] = lower_bound_with_argmax(sys, K, tau_grid);
    rb.lower = lower;
    rb.tau_at_max = tau;
    rb.past_nyquist = !rb.nyquist.infinite && K >= rb.nyquist.value;
    return rb;
}

Matrix controllable_basis(const Matrix& A, const Matrix& B, double tol) {
    const Index n = A.rows();
    if (n == 0) return Matrix(0, 0);
    const double scale = std::max({1.0, A.norm(), B.norm()});
    Matrix Q(n, 0);
    std::vector<Vector> pending;
    for (Index j = 0; j < B.cols(); ++j) pending.push_back(B.col(j));
    size_t next = 0;
    while (next < pending.size() && Q.cols() < n) {
        Vector v = pending[next++];
        for (int pass = 0; pass < 2; ++pass)
            if (Q.cols() > 0) v -= Q * (Q.transpose() * v);
        const double nv = v.norm();
        if (nv <= tol * scale) continue;
        v /= nv;
        Q.conservativeResize(n, Q.cols() + 1);
        Q.col(Q.cols() - 1) = v;
        pending.push_back(A * v);
    }
    return Q;
}

}  // namespace zfrate
