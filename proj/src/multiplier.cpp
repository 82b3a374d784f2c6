#include "zfrate/multiplier.hpp"

#include <cmath>
#include <stdexcept>

namespace zfrate {

FirMultiplier FirMultiplier::identity(Form form, double rho) {
    FirMultiplier m;
    m.form = form;
    m.rho = rho;
    return m;
}

Causality causality_of(int n_b, int n_f) {
    if (n_f == 0) return Causality::Causal;
    if (n_b == 0) return Causality::Anticausal;
    return Causality::Noncausal;
}

Causality causality_of(const FirMultiplier& m) { return causality_of(m.n_b(), m.n_f()); }

Complex eval(const FirMultiplier& m, Complex z) {
    if (z == Complex(0.0) && m.n_b() > 0) throw std::domain_error("multiplier eval: z = 0 with causal taps");
    const double r = m.form == Form::Rho ? m.rho : 1.0;
    Complex out = m.h0;
    Complex zinv_pow = 1.0;
    for (int i = 0; i < m.n_b(); ++i) {
        zinv_pow /= (r * z);
        out -= m.causal[i] * zinv_pow;
    }
    Complex z_pow = 1.0;
    for (int i = 0; i < m.n_f(); ++i) {
        z_pow *= (r * z);
        out -= m.anticausal[i] * z_pow;
    }
    return out;
}

std::vector<double> l1_causal_weights(Form form, int n_b, double rho) {
    std::vector<double> w(n_b);
    for (int i = 1; i <= n_b; ++i)
        w[i - 1] = form == Form::Plain ? std::pow(rho, -i) : std::pow(rho, -2 * i);
    return w;
}

std::vector<double> l1_anticausal_weights(Form form, int n_f, double rho) {
    std::vector<double> w(n_f);
    for (int i = 1; i <= n_f; ++i) w[i - 1] = form == Form::Plain ? std::pow(rho, -i) : 1.0;
    return w;
}

L1Check l1_condition(const FirMultiplier& m, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("l1_condition: rho must be positive");
    const auto wb = l1_causal_weights(m.form, m.n_b(), rho);
    const auto wf = l1_anticausal_weights(m.form, m.n_f(), rho);
    double sum = 0.0;
    for (int i = 0; i < m.n_b(); ++i) sum += wb[i] * std::abs(m.causal[i]);
    for (int i = 0; i < m.n_f(); ++i) sum += wf[i] * std::abs(m.anticausal[i]);
    L1Check out;
    out.margin = m.h0 - sum;
    out.satisfied = out.margin > 0.0;
    return out;
}

bool sign_condition(const FirMultiplier& m, double tol) {
    for (double h : m.causal)
        if (h < -tol) return false;
    for (double h : m.anticausal)
        if (h < -tol) return false;
    return true;
}

FirMultiplier convert(const FirMultiplier& m, double rho, Form target) {
    if (!(rho > 0.0)) throw std::invalid_argument("convert: rho must be positive");
    if (rho > 1.0) throw std::invalid_argument("convert: rho must not exceed one");
    FirMultiplier out = m;
    out.form = target;
    out.rho = target == Form::Rho ? rho : 1.0;
    if (m.form == target) return out;
    // Plain -> Rho multiplies causal taps by rho^i and divides anticausal taps by rho^i.
    const double dir = target == Form::Rho ? 1.0 : -1.0;
    for (int i = 1; i <= m.n_b(); ++i) out.causal[i - 1] = m.causal[i - 1] * std::pow(rho, dir * i);
    for (int i = 1; i <= m.n_f(); ++i) out.anticausal[i - 1] = m.anticausal[i - 1] * std::pow(rho, -dir * i);
    return out;
}

std::string to_string(Form f) { return f == Form::Plain ? "plain" : "rho"; }

std::string to_string(Causality c) {
    switch (c) {
        case Causality::Causal: return "causal";
        case Causality::Anticausal: return "anticausal";
        case Causality::Noncausal: return "noncausal";
    }
    return "?";
}

std::string to_string(Framework f) { return f == Framework::Iqc ? "iqc" : "rho-iqc"; }

}  // namespace zfrate
