#include "zfrate/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zfrate {

namespace {

// Down-shift register: x1' = u, x_{j+1}' = x_j.
Matrix shift_a(int n) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    return a;
}

Matrix shift_b(int n) {
    Matrix b = Matrix::Zero(n, 1);
    if (n > 0) b(0, 0) = 1.0;
    return b;
}

Matrix blkdiag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

double substitution_gain(Substitution sub, double rho) {
    switch (sub) {
        case Substitution::None: return 1.0;
        case Substitution::RhoZ: return 1.0 / rho;
        case Substitution::ZOverRho: return rho;
    }
    return 1.0;
}

std::vector<double> padded(const std::vector<double>& v, int n) {
    std::vector<double> out(v);
    out.resize(n, 0.0);
    return out;
}

// Output selector for one lifted group: row 0 passes the input through, row j reads
// register j-1 scaled by weights[j-1].
void group_output(int n_group, int n_reg, const std::vector<double>& weights, Matrix& c, Matrix& d) {
    c = Matrix::Zero(n_group + 1, n_reg);
    d = Matrix::Zero(n_group + 1, 1);
    d(0, 0) = 1.0;
    for (int j = 1; j <= n_group; ++j) c(j, j - 1) = weights[j - 1];
}

// Two shared registers (v, w) of length n_reg, outputs grouped [v; Zv; w; Zw] per group.
StateSpace lifting_realization(double a_gain, double b_gain, int n_reg,
                               const std::vector<std::pair<int, std::vector<double>>>& groups) {
    const Matrix as = shift_a(n_reg) * a_gain;
    const Matrix bs = shift_b(n_reg) * b_gain;
    Matrix A = blkdiag(as, as);
    Matrix B = blkdiag(bs, bs);
    int rows = 0;
    for (const auto& g : groups) rows += 2 * (g.first + 1);
    Matrix C = Matrix::Zero(rows, 2 * n_reg);
    Matrix D = Matrix::Zero(rows, 2);
    int r = 0;
    for (const auto& [n_group, weights] : groups) {
        Matrix cs;
        Matrix ds;
        group_output(n_group, n_reg, weights, cs, ds);
        const Index h = cs.rows();
        C.block(r, 0, h, n_reg) = cs;
        D.block(r, 0, h, 1) = ds;
        C.block(r + h, n_reg, h, n_reg) = cs;
        D.block(r + h, 1, h, 1) = ds;
        r += 2 * static_cast<int>(h);
    }
    return StateSpace(A, B, C, D);
}

// Lifted Kp for one group (coupled scheme or one half of the decoupled scheme). Layout
// [v0, v_1..v_n, w0, w_1..w_n] starting at offset o. Taps enter with the sign that makes
// Psi* Kp Psi reproduce Pi for M = h0 - sum h z^{-i} - sum h z^{i}.
void add_group_kp(Matrix& kp, int o, int n, double K, double h0_share, double pi22_diag,
                  const std::vector<double>& causal, const std::vector<double>& anticausal) {
    const int v0 = o;
    const int w0 = o + n + 1;
    auto put = [&](int i, int j, double v) {
        kp(i, j) += v;
        if (i != j) kp(j, i) += v;
    };
    put(v0, w0, K * h0_share);
    put(w0, w0, pi22_diag);
    for (int i = 0; i < n; ++i) {
        const double hc = i < static_cast<int>(causal.size()) ? causal[i] : 0.0;
        const double ha = i < static_cast<int>(anticausal.size()) ? anticausal[i] : 0.0;
        if (hc != 0.0) put(v0 + 1 + i, w0, -K * hc);
        if (ha != 0.0) put(v0, w0 + 1 + i, -K * ha);
        if (hc + ha != 0.0) put(w0, w0 + 1 + i, hc + ha);
    }
}

void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("factorization: rho must lie in (0, 1]");
}

Factorization make(StateSpace psi, Matrix kp, Scheme scheme, Substitution sub, double rho, double K,
                   const FirMultiplier& m) {
    Factorization f;
    f.psi = std::move(psi);
    f.kp = std::move(kp);
    f.scheme = scheme;
    f.substitution = sub;
    f.rho = rho;
    f.K = K;
    f.multiplier = m;
    return f;
}

}  // namespace

ComplexMatrix build_pi(const FirMultiplier& m, double K, Complex z) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) throw std::domain_error("build_pi: z must lie on the unit circle");
    const Complex mz = eval(m, z);
    const Complex mstar = std::conj(eval(m, 1.0 / std::conj(z)));  // M(1/z) for real taps on |z| = 1
    ComplexMatrix pi(2, 2);
    pi(0, 0) = 0.0;
    pi(0, 1) = K * mstar;
    pi(1, 0) = K * mz;
    pi(1, 1) = -(mz + mstar);
    return pi;
}

void check_validity(Scheme scheme, Substitution sub, const FirMultiplier& m) {
    const bool causal_only = m.n_f() == 0;
    const bool anticausal_only = m.n_b() == 0;
    if (scheme == Scheme::Psi3Rho) {
        if (sub != Substitution::None)
            throw InvalidScheme("Psi3(rho,z) carries its own rho weighting; no substitution applies");
        if (m.form != Form::Rho) throw InvalidScheme("Psi3(rho,z) requires a rho-form multiplier (convert first)");
        return;
    }
    if (scheme == Scheme::Psi1) {
        if (!causal_only) throw InvalidScheme("Psi1 requires a causal multiplier (n_f = 0)");
        if (sub == Substitution::ZOverRho) throw InvalidScheme("Psi1 is invalid for anticausal multipliers");
    }
    if (sub == Substitution::RhoZ && !causal_only)
        throw InvalidScheme("substitution z -> rho z is only valid for causal multipliers");
    if (sub == Substitution::ZOverRho && !anticausal_only)
        throw InvalidScheme("substitution z -> z/rho is only valid for anticausal multipliers");
    if (sub == Substitution::None && m.form != Form::Plain)
        throw InvalidScheme("unsubstituted lifting factorizes the plain multiplier M(z)");
    if (sub != Substitution::None && m.form != Form::Rho)
        throw InvalidScheme("rho substitution factorizes the rho-form multiplier M(rho,z)");
}

Factorization build_psi1(const FirMultiplier& m, double K, Substitution sub) {
    check_validity(Scheme::Psi1, sub, m);
    const double rho = sub == Substitution::None ? 1.0 : m.rho;
    check_rho(rho);
    const double s = substitution_gain(sub, rho);
    const int n = m.n_b();
    Matrix bu(1, 2);
    bu << K, -1.0;
    Matrix A = shift_a(n) * s;
    Matrix B = shift_b(n) * bu * s;
    Matrix C = Matrix::Zero(2, n);
    for (int i = 0; i < n; ++i) C(0, i) = -m.causal[i];
    Matrix D(2, 2);
    D << K * m.h0, -m.h0, 0.0, 1.0;
    Matrix kp(2, 2);
    kp << 0.0, 1.0, 1.0, 0.0;
    return make(StateSpace(A, B, C, D), kp, Scheme::Psi1, sub, rho, K, m);
}

Factorization build_psi2(const FirMultiplier& m, double K, Substitution sub) {
    check_validity(Scheme::Psi2, sub, m);
    const double rho = sub == Substitution::None ? 1.0 : m.rho;
    check_rho(rho);
    const double s = substitution_gain(sub, rho);
    const int nz = std::max(m.n_b(), m.n_f());
    StateSpace psi = lifting_realization(s, s, nz, {{nz, std::vector<double>(nz, 1.0)}});
    Matrix kp = kp_matrix(Scheme::Psi2, m.n_b(), m.n_f(), K, m.h0, m.causal, m.anticausal);
    return make(std::move(psi), std::move(kp), Scheme::Psi2, sub, rho, K, m);
}

Factorization build_psi3(const FirMultiplier& m, double K, Substitution sub) {
    check_validity(Scheme::Psi3, sub, m);
    const double rho = sub == Substitution::None ? 1.0 : m.rho;
    check_rho(rho);
    const double s = substitution_gain(sub, rho);
    const int nb = m.n_b();
    const int nf = m.n_f();
    const int nh = std::max(nb, nf);
    StateSpace psi = lifting_realization(s, s, nh, {{nb, std::vector<double>(nb, 1.0)}, {nf, std::vector<double>(nf, 1.0)}});
    Matrix kp = kp_matrix(Scheme::Psi3, nb, nf, K, m.h0, m.causal, m.anticausal);
    return make(std::move(psi), std::move(kp), Scheme::Psi3, sub, rho, K, m);
}

Factorization build_psi3_rho(const FirMultiplier& m, double K, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("Psi3(rho,z): rho must lie in (0, 1)");
    check_validity(Scheme::Psi3Rho, Substitution::None, m);
    if (std::abs(m.rho - rho) > 1e-14 * std::max(1.0, rho))
        throw std::invalid_argument("Psi3(rho,z): multiplier rho differs from factorization rho");
    const int nb = m.n_b();
    const int nf = m.n_f();
    const int nh = std::max(nb, nf);
    // Registers hold rho^{-(j-1)} z^{-j} u; the causal selector scales by 1/rho and the
    // anticausal selector by rho^{2j-1}.
    std::vector<double> wb(nb, 1.0 / rho);
    std::vector<double> wf(nf);
    for (int j = 1; j <= nf; ++j) wf[j - 1] = std::pow(rho, 2 * j - 1);
    StateSpace psi = lifting_realization(1.0 / rho, 1.0, nh, {{nb, wb}, {nf, wf}});
    Matrix kp = kp_matrix(Scheme::Psi3, nb, nf, K, m.h0, m.causal, m.anticausal);
    return make(std::move(psi), std::move(kp), Scheme::Psi3Rho, Substitution::None, rho, K, m);
}

Factorization build_factorization(Scheme scheme, const FirMultiplier& m, double K, Substitution sub) {
    switch (scheme) {
        case Scheme::Psi1: return build_psi1(m, K, sub);
        case Scheme::Psi2: return build_psi2(m, K, sub);
        case Scheme::Psi3: return build_psi3(m, K, sub);
        case Scheme::Psi3Rho:
            if (sub != Substitution::None) throw InvalidScheme("Psi3(rho,z) takes no substitution");
            return build_psi3_rho(m, K, m.rho);
    }
    throw std::invalid_argument("unknown scheme");
}

Factorization with_taps(const Factorization& f, const FirMultiplier& m) {
    if (m.n_b() != f.multiplier.n_b() || m.n_f() != f.multiplier.n_f())
        throw std::invalid_argument("with_taps: tap counts differ");
    if (f.scheme == Scheme::Psi3Rho) return build_psi3_rho(m, f.K, f.rho);
    return build_factorization(f.scheme, m, f.K, f.substitution);
}

Matrix kp_matrix(Scheme scheme, int n_b, int n_f, double K, double h0, const std::vector<double>& causal,
                 const std::vector<double>& anticausal) {
    switch (scheme) {
        case Scheme::Psi1: {
            Matrix kp(2, 2);
            kp << 0.0, 1.0, 1.0, 0.0;
            return kp;
        }
        case Scheme::Psi2: {
            const int nz = std::max(n_b, n_f);
            Matrix kp = Matrix::Zero(2 * nz + 2, 2 * nz + 2);
            add_group_kp(kp, 0, nz, K, h0, -2.0 * h0, padded(causal, nz), padded(anticausal, nz));
            return kp;
        }
        case Scheme::Psi3:
        case Scheme::Psi3Rho: {
            const int size = 2 * (n_b + 1) + 2 * (n_f + 1);
            Matrix kp = Matrix::Zero(size, size);
            add_group_kp(kp, 0, n_b, K, 0.5 * h0, -h0, padded(causal, n_b), {});
            add_group_kp(kp, 2 * (n_b + 1), n_f, K, 0.5 * h0, -h0, {}, padded(anticausal, n_f));
            return kp;
        }
    }
    throw std::invalid_argument("unknown scheme");
}

ComplexMatrix psi_response(const Factorization& f, Complex z) { return freq_response(f.psi, z); }

ComplexMatrix factored_pi(const Factorization& f, Complex z) {
    const ComplexMatrix psi = psi_response(f, z);
    return psi.adjoint() * f.kp.cast<Complex>() * psi;
}

ComplexMatrix symbolic_psi(const Factorization& f, Complex z) {
    const FirMultiplier& m = f.multiplier;
    const double rho = f.rho;
    if (f.scheme == Scheme::Psi1) {
        const Complex mz = eval(m, z);
        ComplexMatrix psi(2, 2);
        psi << f.K * mz, -mz, 0.0, 1.0;
        return psi;
    }
    auto delay_weight = [&](int j, bool anticausal_group) -> Complex {
        double w = 1.0;
        if (f.scheme == Scheme::Psi3Rho)
            w = anticausal_group ? std::pow(rho, j) : std::pow(rho, -j);
        else if (f.substitution == Substitution::RhoZ)
            w = std::pow(rho, -j);
        else if (f.substitution == Substitution::ZOverRho)
            w = std::pow(rho, j);
        return w * std::pow(z, -j);
    };
    std::vector<std::pair<int, bool>> groups;
    if (f.scheme == Scheme::Psi2)
        groups = {{std::max(m.n_b(), m.n_f()), false}};
    else
        groups = {{m.n_b(), false}, {m.n_f(), true}};
    int rows = 0;
    for (const auto& g : groups) rows += 2 * (g.first + 1);
    ComplexMatrix psi = ComplexMatrix::Zero(rows, 2);
    int r = 0;
    for (const auto& [n, anti] : groups) {
        for (int col = 0; col < 2; ++col) {
            psi(r, col) = 1.0;
            for (int j = 1; j <= n; ++j) psi(r + j, col) = delay_weight(j, anti);
            r += n + 1;
        }
    }
    return psi;
}

StateSpace augment(const Factorization& f, const StateSpace& plant) {
    const StateSpace& p = f.psi;
    if (p.inputs() != 2 * plant.outputs() && !(p.inputs() == 2 && plant.outputs() == 1))
        throw std::invalid_argument("augment: Psi input count must equal twice the plant output count");
    if (plant.inputs() != plant.outputs()) throw std::invalid_argument("augment: square plant required");
    const Index n = plant.states();
    const Index np = p.states();
    const Index m = plant.inputs();
    const Matrix B1 = p.B.leftCols(m);
    const Matrix B2 = p.B.rightCols(m);
    const Matrix D1 = p.D.leftCols(m);
    const Matrix D2 = p.D.rightCols(m);

    Matrix A = Matrix::Zero(n + np, n + np);
    A.topLeftCorner(n, n) = plant.A;
    A.bottomLeftCorner(np, n) = B1 * plant.C;
    A.bottomRightCorner(np, np) = p.A;
    Matrix B(n + np, m);
    B.topRows(n) = plant.B;
    B.bottomRows(np) = B2 + B1 * plant.D;
    Matrix C(p.outputs(), n + np);
    C.leftCols(n) = D1 * plant.C;
    C.rightCols(np) = p.C;
    Matrix D = D2 + D1 * plant.D;
    return StateSpace(A, B, C, D);
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Psi1: return "psi1";
        case Scheme::Psi2: return "psi2";
        case Scheme::Psi3: return "psi3";
        case Scheme::Psi3Rho: return "psi3rho";
    }
    return "?";
}

std::string to_string(Substitution s) {
    switch (s) {
        case Substitution::None: return "none";
        case Substitution::RhoZ: return "rho-z";
        case Substitution::ZOverRho: return "z-over-rho";
    }
    return "?";
}

}  // namespace zfrate
