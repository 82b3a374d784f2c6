#include "zfrate/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zfrate {

namespace {

Matrix sym(const Matrix& A) { return 0.5 * (A + A.transpose()); }

double inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

// Linear maps between the variable vector and symmetric block matrices, exploiting the
// KYP structure of the P variables.
class Operators {
public:
    explicit Operators(const LmiProblem& p) : p_(p) {
        n_ = p.n_state;
        m_ = p.block;
        np_ = p.p_vars();
        nd_ = static_cast<int>(p.f_dense.size());
        for (int a = 0; a < n_; ++a)
            for (int b = a; b < n_; ++b) pairs_.push_back({a, b});
        for (const auto& F : p.f_dense) zero_.push_back(F.isZero(0.0));
        L_ = static_cast<int>(p.linear.size());
        G_ = Matrix::Zero(L_, np_ + nd_);
        d_ = Vector::Zero(L_);
        for (int r = 0; r < L_; ++r) {
            for (const auto& [i, a] : p.linear[r].terms) G_(r, i) += a;
            d_[r] = p.linear[r].rhs;
        }
    }

    int vars() const { return np_ + nd_; }
    int rows() const { return L_; }
    const Matrix& G() const { return G_; }
    const Vector& d() const { return d_; }

    // sum_i y_i F_i (no F0).
    Matrix adjoint(const Vector& y) const {
        Matrix out = Matrix::Zero(m_, m_);
        if (n_ > 0) {
            Matrix P(n_, n_);
            for (int k = 0; k < np_; ++k) {
                const auto [a, b] = pairs_[k];
                P(a, b) = y[k];
                P(b, a) = y[k];
            }
            for (const auto& t : p_.kyp) out += t.coef * t.M.transpose() * P * t.M;
        }
        for (int j = 0; j < nd_; ++j)
            if (!zero_[j] && y[np_ + j] != 0.0) out += y[np_ + j] * p_.f_dense[j];
        return sym(out);
    }

    // (tr(F_i W))_i for symmetric W.
    Vector forward(const Matrix& W) const {
        Vector out = Vector::Zero(vars());
        for (const auto& t : p_.kyp) {
            const Matrix H = t.M * W * t.M.transpose();
            for (int k = 0; k < np_; ++k) {
                const auto [a, b] = pairs_[k];
                out[k] += t.coef * (a == b ? H(a, a) : H(a, b) + H(b, a));
            }
        }
        for (int j = 0; j < nd_; ++j)
            if (!zero_[j]) out[np_ + j] = inner(p_.f_dense[j], W);
        return out;
    }

    // M_ij = tr(F_i X F_j Z^{-1}) + (G^T diag(lam/s) G)_ij.
    Matrix schur(const Matrix& X, const Matrix& Zinv, const Vector& lp_scale) const {
        const int q = vars();
        Matrix M = Matrix::Zero(q, q);
        const size_t nk = p_.kyp.size();
        if (np_ > 0) {
            std::vector<std::vector<Matrix>> R(nk, std::vector<Matrix>(nk));
            std::vector<std::vector<Matrix>> S(nk, std::vector<Matrix>(nk));
            for (size_t k = 0; k < nk; ++k)
                for (size_t l = 0; l < nk; ++l) {
                    R[k][l] = p_.kyp[k].M * X * p_.kyp[l].M.transpose();
                    S[l][k] = p_.kyp[l].M * Zinv * p_.kyp[k].M.transpose();
                }
            for (size_t k = 0; k < nk; ++k)
                for (size_t l = 0; l < nk; ++l) {
                    const double c = p_.kyp[k].coef * p_.kyp[l].coef;
                    const Matrix& Rk = R[k][l];
                    const Matrix& Sk = S[l][k];
                    for (int i = 0; i < np_; ++i) {
                        const auto [a, b] = pairs_[i];
                        const double hi = a == b ? 0.5 : 1.0;
                        for (int j = i; j < np_; ++j) {
                            const auto [cc, dd] = pairs_[j];
                            const double hj = cc == dd ? 0.5 : 1.0;
                            const double v = Rk(b, cc) * Sk(dd, a) + Rk(b, dd) * Sk(cc, a) + Rk(a, cc) * Sk(dd, b) +
                                             Rk(a, dd) * Sk(cc, b);
                            M(i, j) += c * hi * hj * v;
                        }
                    }
                }
        }
        std::vector<Matrix> U(nd_);
        std::vector<Matrix> V(nd_);
        for (int j = 0; j < nd_; ++j) {
            if (zero_[j]) continue;
            U[j] = p_.f_dense[j] * X;
            V[j] = (p_.f_dense[j] * Zinv).transpose();
        }
        for (int j = 0; j < nd_; ++j) {
            if (zero_[j]) continue;
            if (np_ > 0) {
                const Matrix Y = X * p_.f_dense[j] * Zinv;
                for (const auto& t : p_.kyp) {
                    const Matrix H = t.M * Y * t.M.transpose();
                    for (int i = 0; i < np_; ++i) {
                        const auto [a, b] = pairs_[i];
                        M(i, np_ + j) += t.coef * (a == b ? H(a, a) : H(a, b) + H(b, a));
                    }
                }
            }
            for (int i = 0; i <= j; ++i) {
                if (zero_[i]) continue;
                M(np_ + i, np_ + j) = (U[i].array() * V[j].array()).sum();
            }
        }
        M = M.selfadjointView<Eigen::Upper>();
        if (L_ > 0) M += G_.transpose() * lp_scale.asDiagonal() * G_;
        return M;
    }

private:
    const LmiProblem& p_;
    int n_ = 0;
    int m_ = 0;
    int np_ = 0;
    int nd_ = 0;
    int L_ = 0;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<bool> zero_;
    Matrix G_;
    Vector d_;
};

// Largest alpha in (0, inf] with X + alpha dX >= 0, given the Cholesky factor of X.
double max_step_psd(const Eigen::LLT<Matrix>& chol, const Matrix& dX) {
    const Matrix Linv_dX = chol.matrixL().solve(dX);
    const Matrix T = chol.matrixL().solve(Linv_dX.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(T), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const Vector& v, const Vector& dv) {
    double a = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

class SchurSolver {
public:
    bool factor(const Matrix& M) {
        const Index q = M.rows();
        scale_.resize(q);
        const double dmax = q > 0 ? M.diagonal().cwiseAbs().maxCoeff() : 1.0;
        for (Index i = 0; i < q; ++i) {
            const double di = M(i, i) > 1e-30 * dmax ? M(i, i) : std::max(1e-30 * dmax, 1e-300);
            scale_[i] = 1.0 / std::sqrt(di);
        }
        const Matrix Ms = scale_.asDiagonal() * M * scale_.asDiagonal();
        llt_.compute(Ms);
        use_ldlt_ = llt_.info() != Eigen::Success;
        if (use_ldlt_) {
            ldlt_.compute(Ms);
            if (ldlt_.info() != Eigen::Success) return false;
        }
        return true;
    }

    Vector solve(const Vector& rhs) const {
        const Vector r = scale_.asDiagonal() * rhs;
        const Vector z = use_ldlt_ ? Vector(ldlt_.solve(r)) : Vector(llt_.solve(r));
        return scale_.asDiagonal() * z;
    }

private:
    Vector scale_;
    Eigen::LLT<Matrix> llt_;
    Eigen::LDLT<Matrix> ldlt_;
    bool use_ldlt_ = false;
};

bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace

double eig_max(const Matrix& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("eig_max: matrix must be square");
    if (!M.allFinite()) throw std::domain_error("eig_max: non-finite entries");
    if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

SdpSolution solve(const LmiProblem& p, const SdpOptions& opts) {
    const int m = p.block;
    if (p.f0.rows() != m || p.f0.cols() != m) throw std::invalid_argument("sdp: F0 has wrong size");
    if (!p.f0.allFinite()) throw std::invalid_argument("sdp: non-finite basis matrix");
    if ((p.f0 - p.f0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + p.f0.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("sdp: F0 is not symmetric");
    for (const auto& F : p.f_dense) {
        if (F.rows() != m || F.cols() != m) throw std::invalid_argument("sdp: basis matrix has wrong size");
        if (!F.allFinite()) throw std::invalid_argument("sdp: non-finite basis matrix");
        if ((F - F.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + F.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("sdp: basis matrix is not symmetric");
    }
    if (p.margin_var < p.p_vars() || p.margin_var >= p.num_vars())
        throw std::invalid_argument("sdp: margin variable must be a dense variable");
    const Matrix& Fm = p.f_dense[p.margin_var - p.p_vars()];
    if (!(Fm - Matrix::Identity(m, m)).isZero(0.0))
        throw std::invalid_argument("sdp: margin variable must enter with the identity");

    const Operators ops(p);
    const int q = ops.vars();
    const int L = ops.rows();
    const Matrix& G = ops.G();
    const Vector& d = ops.d();
    const double thr = opts.threshold >= 0.0 ? opts.threshold : feasibility_threshold(p);

    Vector c = Vector::Zero(q);
    c[p.margin_var] = 1.0;
    const Matrix C = -p.f0;
    const double normC = C.norm();
    const double normd = d.norm();

    // Starting point scaled from the data.
    double max_fnorm = 0.0;
    for (const auto& F : p.f_dense) max_fnorm = std::max(max_fnorm, F.norm());
    for (const auto& t : p.kyp) max_fnorm = std::max(max_fnorm, std::abs(t.coef) * t.M.squaredNorm());
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(m)), m * 2.0 / (1.0 + max_fnorm)});
    const double eta = std::max({10.0, std::sqrt(static_cast<double>(m)), max_fnorm, normC});
    Matrix X = xi * Matrix::Identity(m, m);
    Matrix Z = eta * Matrix::Identity(m, m);
    Vector y = Vector::Zero(q);
    Vector lam = Vector::Constant(L, xi);
    Vector s = Vector::Constant(L, std::max(eta, 1.0 + normd));

    SdpSolution sol;
    sol.x = Vector::Zero(q);
    double best_t = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    // Validated margin of y: -lambda_max of F(y) without t, then clipped by rows that bound t.
    auto validate = [&](const Vector& yv) {
        Vector xv = yv;
        xv[p.margin_var] = 0.0;
        const Matrix Fn = p.f0 + ops.adjoint(xv);
        if (!Fn.allFinite()) return;
        double tv = -eig_max(Fn);
        for (int r = 0; r < L; ++r) {
            const double a = G(r, p.margin_var);
            if (a > 0.0) {
                const double rest = G.row(r).dot(xv);
                tv = std::min(tv, (d[r] - rest) / a);
            }
        }
        xv[p.margin_var] = tv;
        double viol = 0.0;
        for (int r = 0; r < L; ++r) viol = std::max(viol, G.row(r).dot(xv) - d[r]);
        if (viol > 1e-9 || !std::isfinite(tv)) return;
        if (!have_best || tv > best_t) {
            best_t = tv;
            sol.x = xv;
            have_best = true;
        }
    };

    auto finish = [&](SdpStatus st, const std::string& msg) {
        sol.status = st;
        sol.t = have_best ? best_t : -std::numeric_limits<double>::infinity();
        sol.message = msg;
        return sol;
    };

    for (int it = 0; it <= opts.max_iter; ++it) {
        sol.iterations = it;
        const Matrix Fy = p.f0 + ops.adjoint(y);
        const Matrix Rd = -Fy - Z;
        const Vector rp = c - ops.forward(X) - (L > 0 ? Vector(G.transpose() * lam) : Vector::Zero(q));
        const Vector rs = L > 0 ? Vector(d - G * y - s) : Vector();
        const double pobj = inner(C, X) + (L > 0 ? d.dot(lam) : 0.0);
        const double dobj = y[p.margin_var];
        const double gap = inner(X, Z) + (L > 0 ? lam.dot(s) : 0.0);
        const double pinf = rp.norm() / (1.0 + c.norm());
        const double dinf = (Rd.norm() + (L > 0 ? rs.norm() : 0.0)) / (1.0 + normC + normd);
        const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
        sol.primal_residual = pinf;
        sol.dual_residual = dinf;
        sol.gap = gap;
        sol.upper_bound = pobj;

        if (!all_finite(X) || !all_finite(Z) || !y.allFinite()) return finish(have_best && best_t >= thr ? SdpStatus::Feasible : SdpStatus::Numerical, "non-finite iterate");
        validate(y);

        if (opts.stop_at_threshold && have_best && best_t >= thr) return finish(SdpStatus::Feasible, "margin reached threshold");
        if (std::abs(dobj) > 1e12 * (1.0 + normC) || y.norm() > 1e14 * (1.0 + normC)) {
            if (have_best && best_t >= thr) return finish(SdpStatus::Feasible, "margin unbounded");
            return finish(SdpStatus::Numerical, "iterates diverged");
        }
        const double bound = pobj + 10.0 * (1.0 + y.norm()) * rp.norm();
        if (pinf < opts.tol && dinf < opts.tol && relgap < opts.tol) {
            if (have_best && best_t >= thr) return finish(SdpStatus::Feasible, "converged");
            if (dobj < thr && pobj < thr) return finish(SdpStatus::Infeasible, "converged below threshold");
            return finish(SdpStatus::Numerical, "converged but margin failed validation");
        }
        if (opts.stop_at_threshold && pinf <= 1e-8 && bound < 0.0)
            return finish(SdpStatus::Infeasible, "primal bound below zero");
        if (it == opts.max_iter) break;

        Eigen::LLT<Matrix> cholZ(Z);
        Eigen::LLT<Matrix> cholX(X);
        if (cholZ.info() != Eigen::Success || cholX.info() != Eigen::Success) break;
        const Matrix Zinv = cholZ.solve(Matrix::Identity(m, m));
        const double mu = gap / (m + L);

        Vector lp_scale = L > 0 ? Vector(lam.cwiseQuotient(s)) : Vector();
        const Matrix M = ops.schur(X, Zinv, lp_scale);
        SchurSolver schur;
        if (!M.allFinite() || !schur.factor(M)) break;

        const Matrix XRdZ = sym(X * Rd * Zinv);
        struct Direction {
            Vector dy;
            Matrix dX;
            Matrix dZ;
            Vector dlam;
            Vector ds;
        };
        auto direction = [&](double sigma_mu, const Matrix* corr, const Vector* corr_l) {
            Matrix Rc = sigma_mu * Zinv - X;
            if (corr) Rc -= sym(*corr * Zinv);
            Vector lp_vec;
            Vector rhs = rp - ops.forward(Rc - XRdZ);
            if (L > 0) {
                Vector target = Vector::Constant(L, sigma_mu);
                if (corr_l) target -= *corr_l;
                lp_vec = target.cwiseQuotient(s) - lam - lp_scale.cwiseProduct(rs);
                rhs -= G.transpose() * lp_vec;
            }
            Direction dir;
            dir.dy = schur.solve(rhs);
            dir.dZ = Rd - ops.adjoint(dir.dy);
            dir.dX = Rc - sym(X * dir.dZ * Zinv);
            if (L > 0) {
                dir.ds = rs - G * dir.dy;
                Vector target = Vector::Constant(L, sigma_mu);
                if (corr_l) target -= *corr_l;
                dir.dlam = target.cwiseQuotient(s) - lam - lp_scale.cwiseProduct(dir.ds);
            }
            return dir;
        };
        auto steps = [&](const Direction& dir, double gamma) {
            double ap = max_step_psd(cholX, dir.dX);
            double ad = max_step_psd(cholZ, dir.dZ);
            if (L > 0) {
                ap = std::min(ap, max_step_lp(lam, dir.dlam));
                ad = std::min(ad, max_step_lp(s, dir.ds));
            }
            return std::pair<double, double>{std::min(1.0, gamma * ap), std::min(1.0, gamma * ad)};
        };

        const Direction pred = direction(0.0, nullptr, nullptr);
        const auto [ap0, ad0] = steps(pred, 1.0);
        double gap_aff = inner(X + ap0 * pred.dX, Z + ad0 * pred.dZ);
        if (L > 0) gap_aff += (lam + ap0 * pred.dlam).dot(s + ad0 * pred.ds);
        const double ratio = std::max(0.0, gap_aff) / std::max(gap, 1e-300);
        const double sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);

        const Matrix corr = pred.dX * pred.dZ;
        Vector corr_l;
        if (L > 0) corr_l = pred.dlam.cwiseProduct(pred.ds);
        const Direction dir = direction(sigma * mu, &corr, L > 0 ? &corr_l : nullptr);
        if (!dir.dy.allFinite() || !dir.dX.allFinite()) break;
        const auto [a0, b0] = steps(dir, 1.0);
        const double gamma = 0.9 + 0.09 * std::min(a0, b0);
        const double ap = std::min(1.0, gamma * a0);
        const double ad = std::min(1.0, gamma * b0);
        if (ap < 1e-12 && ad < 1e-12) break;

        X = sym(X + ap * dir.dX);
        Z = sym(Z + ad * dir.dZ);
        y += ad * dir.dy;
        if (L > 0) {
            lam += ap * dir.dlam;
            s += ad * dir.ds;
        }
    }

    if (have_best && best_t >= thr) return finish(SdpStatus::Feasible, "stopped with validated margin");
    const Vector rp_final = c - ops.forward(X) - (L > 0 ? Vector(G.transpose() * lam) : Vector::Zero(q));
    if (sol.primal_residual <= 1e-8 && sol.upper_bound + 10.0 * (1.0 + y.norm()) * rp_final.norm() < thr)
        return finish(SdpStatus::Infeasible, "stopped; primal bound below threshold");
    return finish(SdpStatus::Numerical, sol.iterations >= opts.max_iter ? "iteration limit" : "numerical breakdown");
}

std::string to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Feasible: return "feasible";
        case SdpStatus::Infeasible: return "infeasible";
        case SdpStatus::Numerical: return "numerical";
    }
    return "?";
}

}  // namespace zfrate
