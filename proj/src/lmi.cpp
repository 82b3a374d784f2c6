#include "zfrate/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace zfrate {

namespace {

// Psi with the rho z substitution undone, for the sigma = rho^2 form.
Factorization unsubstituted(const Factorization& f) {
    Factorization g = f;
    g.psi = StateSpace(f.psi.A * f.rho, f.psi.B * f.rho, f.psi.C, f.psi.D);
    return g;
}

struct Augmented {
    Matrix A;
    Matrix B;
    Matrix W;  // [C D]
    Matrix kp;
};

Augmented build_augmented(const Factorization& f, const StateSpace& plant, LmiVariant variant) {
    const Factorization g = variant == LmiVariant::CausalRhoForm ? unsubstituted(f) : f;
    const StateSpace aug = augment(g, plant);
    Augmented out;
    out.A = aug.A;
    out.B = aug.B;
    out.W.resize(aug.C.rows(), aug.C.cols() + aug.D.cols());
    out.W << aug.C, aug.D;
    out.kp = g.kp;
    return out;
}

void check_variant(const Factorization& f, LmiVariant variant, double rho) {
    const bool rho_bound = f.substitution != Substitution::None || f.scheme == Scheme::Psi3Rho;
    if (rho_bound && std::abs(f.rho - rho) > 1e-12 * std::max(1.0, rho))
        throw std::invalid_argument("assemble: factorization was built for a different rho");
    switch (variant) {
        case LmiVariant::IqcForm:
            if (f.substitution == Substitution::ZOverRho)
                throw InvalidScheme("z/rho substituted factorization requires the anticausal rho form");
            break;
        case LmiVariant::CausalRhoForm:
            if (f.substitution != Substitution::RhoZ)
                throw InvalidScheme("causal rho form requires the rho z substituted factorization");
            break;
        case LmiVariant::AnticausalRhoForm:
            if (f.substitution != Substitution::ZOverRho)
                throw InvalidScheme("anticausal rho form requires the z/rho substituted factorization");
            break;
    }
}

std::pair<int, int> p_entry(int n, int idx) {
    int a = 0;
    int row_len = n;
    while (idx >= row_len) {
        idx -= row_len;
        ++a;
        --row_len;
    }
    return {a, a + idx};
}

Matrix p_from_x(const LmiProblem& p, const Vector& x) {
    const int n = p.n_state;
    Matrix P(n, n);
    int k = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            P(a, b) = x[k];
            P(b, a) = x[k];
            ++k;
        }
    return P;
}

}  // namespace

int p_index(int n, int a, int b) {
    if (a > b) std::swap(a, b);
    return a * n - a * (a - 1) / 2 + (b - a);
}

LmiProblem assemble(const Factorization& fact, const StateSpace& plant, double K, double rho, LmiVariant variant,
                    bool odd, const AssembleOptions& opts) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("assemble: rho must lie in (0, 1]");
    if (!(K >= 0.0)) throw std::invalid_argument("assemble: K must be nonnegative");
    if (plant.inputs() != 1 || plant.outputs() != 1) throw std::invalid_argument("assemble: SISO plant required");
    if (spectral_radius(plant) >= rho) throw UnstablePlant("assemble: rho does not exceed the plant spectral radius");
    check_variant(fact, variant, rho);

    const StateSpace g = variant == LmiVariant::CausalRhoForm ? plant : scale_rho(plant, rho);
    const double sigma = variant == LmiVariant::CausalRhoForm ? rho * rho : 1.0;

    const FirMultiplier& m0 = fact.multiplier;
    const int nb = m0.n_b();
    const int nf = m0.n_f();
    const int ntap = nb + nf;

    FirMultiplier zero = m0;
    std::fill(zero.causal.begin(), zero.causal.end(), 0.0);
    std::fill(zero.anticausal.begin(), zero.anticausal.end(), 0.0);
    const Augmented base = build_augmented(with_taps(fact, zero), g, variant);

    const Index full = base.A.rows();
    Matrix Q = opts.reduce ? controllable_basis(base.A, base.B, opts.reduce_tol) : Matrix::Identity(full, full);
    const Index n = Q.cols();
    const Matrix Ar = Q.transpose() * base.A * Q;
    const Matrix Br = Q.transpose() * base.B;
    Matrix T = Matrix::Zero(full + 1, n + 1);
    T.topLeftCorner(full, n) = Q;
    T(full, n) = 1.0;

    auto quad = [&](const Augmented& a) -> Matrix {
        const Matrix W = a.W * T;
        Matrix q = W.transpose() * a.kp * W;
        return 0.5 * (q + q.transpose());
    };

    LmiProblem p;
    p.n_state = static_cast<int>(n);
    p.block = static_cast<int>(n + 1);
    p.variant = variant;
    p.rho = rho;
    p.sigma = sigma;
    p.n_b = nb;
    p.n_f = nf;
    p.odd = odd;
    p.form = m0.form;
    p.full_states = static_cast<int>(full);

    KypTerm t1;
    t1.coef = 1.0;
    t1.M.resize(n, n + 1);
    t1.M << Ar, Br;
    KypTerm t2;
    t2.coef = -sigma;
    t2.M = Matrix::Zero(n, n + 1);
    t2.M.leftCols(n).setIdentity();
    p.kyp = {t1, t2};

    p.f0 = quad(base);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) p.var_names.push_back("P[" + std::to_string(a) + "," + std::to_string(b) + "]");

    // Tap directions: F_i = T(e_i) - T(0); exact for any scheme whose Kp and output map are affine in h.
    for (int i = 0; i < ntap; ++i) {
        FirMultiplier mi = zero;
        if (i < nb)
            mi.causal[i] = 1.0;
        else
            mi.anticausal[i - nb] = 1.0;
        const Augmented ai = build_augmented(with_taps(fact, mi), g, variant);
        if (!(ai.A - base.A).isZero(0.0) || !(ai.B - base.B).isZero(0.0))
            throw std::logic_error("assemble: tap values leaked into the state dynamics");
        p.f_dense.push_back(quad(ai) - p.f0);
        p.var_names.push_back(i < nb ? "h[-" + std::to_string(i + 1) + "]" : "h[+" + std::to_string(i - nb + 1) + "]");
    }
    if (odd) {
        for (int i = 0; i < ntap; ++i) {
            p.f_dense.push_back(Matrix::Zero(p.block, p.block));
            p.var_names.push_back(i < nb ? "eta[-" + std::to_string(i + 1) + "]"
                                         : "eta[+" + std::to_string(i - nb + 1) + "]");
        }
    }
    p.f_dense.push_back(Matrix::Identity(p.block, p.block));
    p.var_names.push_back("t");
    p.margin_var = p.num_vars() - 1;

    // Sign / l1 constraints in the multiplier's own form, weights at the current rho.
    const auto wb = l1_causal_weights(m0.form, nb, rho);
    const auto wf = l1_anticausal_weights(m0.form, nf, rho);
    auto weight = [&](int i) { return i < nb ? wb[i] : wf[i - nb]; };
    const int off = p.tap_offset();
    LinearConstraint l1;
    l1.rhs = m0.h0 - kL1Margin;
    for (int i = 0; i < ntap; ++i) {
        if (odd) {
            const int eta = p.eta_offset() + i;
            p.linear.push_back({{{off + i, 1.0}, {eta, -1.0}}, 0.0});
            p.linear.push_back({{{off + i, -1.0}, {eta, -1.0}}, 0.0});
            l1.terms.push_back({eta, weight(i)});
        } else {
            p.linear.push_back({{{off + i, -1.0}}, 0.0});
            l1.terms.push_back({off + i, weight(i)});
        }
    }
    if (ntap > 0) p.linear.push_back(l1);
    // The margin is bounded anyway; the cap keeps the IPM away from an unbounded ray.
    p.linear.push_back({{{p.margin_var, 1.0}}, std::max(1.0, p.f0.norm())});
    return p;
}

LmiDimensions dimensions(const LmiProblem& p) {
    LmiDimensions d;
    d.lmi_size = p.block;
    d.num_vars = p.num_vars();
    d.p_vars = p.p_vars();
    return d;
}

Matrix basis_matrix(const LmiProblem& p, int i) {
    if (i < 0 || i >= p.num_vars()) throw std::out_of_range("basis_matrix: variable index out of range");
    if (i >= p.p_vars()) return p.f_dense[i - p.p_vars()];
    const auto [a, b] = p_entry(p.n_state, i);
    Matrix E = Matrix::Zero(p.n_state, p.n_state);
    E(a, b) = 1.0;
    E(b, a) = 1.0;
    Matrix out = Matrix::Zero(p.block, p.block);
    for (const auto& term : p.kyp) out += term.coef * term.M.transpose() * E * term.M;
    return out;
}

Matrix lmi_value(const LmiProblem& p, const Vector& x, bool include_margin) {
    if (x.size() != p.num_vars()) throw std::invalid_argument("lmi_value: variable vector has wrong length");
    Matrix F = p.f0;
    if (p.n_state > 0) {
        const Matrix P = p_from_x(p, x);
        for (const auto& term : p.kyp) F += term.coef * term.M.transpose() * P * term.M;
    }
    for (size_t j = 0; j < p.f_dense.size(); ++j) {
        const int idx = p.p_vars() + static_cast<int>(j);
        if (!include_margin && idx == p.margin_var) continue;
        if (x[idx] != 0.0) F += x[idx] * p.f_dense[j];
    }
    return 0.5 * (F + F.transpose());
}

double max_linear_violation(const LmiProblem& p, const Vector& x) {
    double worst = 0.0;
    for (const auto& c : p.linear) {
        double lhs = 0.0;
        for (const auto& [i, a] : c.terms) lhs += a * x[i];
        worst = std::max(worst, lhs - c.rhs);
    }
    return worst;
}

double feasibility_threshold(const LmiProblem& p) { return 1e-9 * (1.0 + p.f0.norm()); }

LmiDecoded decode(const LmiProblem& p, const Vector& x) {
    if (x.size() != p.num_vars()) throw std::invalid_argument("decode: variable vector has wrong length");
    LmiDecoded d;
    d.P = p_from_x(p, x);
    d.multiplier.h0 = 1.0;
    d.multiplier.form = p.form;
    d.multiplier.rho = p.form == Form::Rho ? p.rho : 1.0;
    d.multiplier.odd_nonlinearity = p.odd;
    const int off = p.tap_offset();
    for (int i = 0; i < p.n_b; ++i) d.multiplier.causal.push_back(x[off + i]);
    for (int i = 0; i < p.n_f; ++i) d.multiplier.anticausal.push_back(x[off + p.n_b + i]);
    d.t = p.margin_var >= 0 ? x[p.margin_var] : 0.0;
    return d;
}

void dump(const LmiProblem& p, std::ostream& os) {
    os << "# zfrate-lmi block=" << p.block << " vars=" << p.num_vars() << "\n";
    os.precision(17);
    auto emit = [&](int idx, const Matrix& F) {
        for (Index r = 0; r < F.rows(); ++r)
            for (Index c = r; c < F.cols(); ++c)
                if (F(r, c) != 0.0) os << idx << ' ' << r << ' ' << c << ' ' << F(r, c) << '\n';
    };
    emit(0, p.f0);
    for (int i = 0; i < p.num_vars(); ++i) emit(i + 1, basis_matrix(p, i));
}

std::string to_string(LmiVariant v) {
    switch (v) {
        case LmiVariant::IqcForm: return "iqc";
        case LmiVariant::CausalRhoForm: return "causal-rho";
        case LmiVariant::AnticausalRhoForm: return "anticausal-rho";
    }
    return "?";
}

}  // namespace zfrate
