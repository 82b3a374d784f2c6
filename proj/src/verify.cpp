#include "zfrate/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace zfrate {

Nonlinearity Nonlinearity::linear(double gain) {
    if (!(gain >= 0.0)) throw std::invalid_argument("linear nonlinearity: gain must be nonnegative");
    Nonlinearity n;
    n.kind_ = Kind::Linear;
    n.slope_ = gain;
    return n;
}

Nonlinearity Nonlinearity::saturation(double slope, double level) {
    if (!(slope >= 0.0) || !(level > 0.0)) throw std::invalid_argument("saturation: need slope >= 0 and level > 0");
    Nonlinearity n;
    n.kind_ = Kind::Saturation;
    n.slope_ = slope;
    n.param_ = level;
    return n;
}

Nonlinearity Nonlinearity::deadzone(double slope, double width) {
    if (!(slope >= 0.0) || !(width >= 0.0)) throw std::invalid_argument("deadzone: need slope >= 0 and width >= 0");
    Nonlinearity n;
    n.kind_ = Kind::Deadzone;
    n.slope_ = slope;
    n.param_ = width;
    return n;
}

Nonlinearity Nonlinearity::piecewise_odd(std::vector<std::pair<double, double>> samples) {
    if (samples.empty()) throw std::invalid_argument("piecewise nonlinearity: no samples");
    double px = 0.0;
    double py = 0.0;
    for (const auto& [x, y] : samples) {
        if (!(x > px)) throw std::invalid_argument("piecewise nonlinearity: x must be positive and increasing");
        if (!(y >= py)) throw std::invalid_argument("piecewise nonlinearity: y must be nondecreasing from 0");
        px = x;
        py = y;
    }
    Nonlinearity n;
    n.kind_ = Kind::PiecewiseOdd;
    n.samples_ = std::move(samples);
    return n;
}

double Nonlinearity::operator()(double v) const {
    switch (kind_) {
        case Kind::Linear: return slope_ * v;
        case Kind::Saturation: return slope_ * std::clamp(v, -param_, param_);
        case Kind::Deadzone: return slope_ * (v - std::clamp(v, -param_, param_));
        case Kind::PiecewiseOdd: {
            const double a = std::abs(v);
            double out = samples_.back().second;
            double px = 0.0;
            double py = 0.0;
            for (const auto& [x, y] : samples_) {
                if (a <= x) {
                    out = py + (y - py) * (a - px) / (x - px);
                    break;
                }
                px = x;
                py = y;
            }
            return v < 0.0 ? -out : out;
        }
    }
    return 0.0;
}

double Nonlinearity::max_slope() const {
    if (kind_ != Kind::PiecewiseOdd) return slope_;
    double best = 0.0;
    double px = 0.0;
    double py = 0.0;
    for (const auto& [x, y] : samples_) {
        best = std::max(best, (y - py) / (x - px));
        px = x;
        py = y;
    }
    return best;
}

std::string Nonlinearity::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Linear: os << "linear(" << slope_ << ")"; break;
        case Kind::Saturation: os << "saturation(" << slope_ << ", " << param_ << ")"; break;
        case Kind::Deadzone: os << "deadzone(" << slope_ << ", " << param_ << ")"; break;
        case Kind::PiecewiseOdd: os << "piecewise(" << samples_.size() << " samples)"; break;
    }
    return os.str();
}

namespace {

void check_grid(const StateSpace& plant, double rho, int grid_n) {
    if (grid_n < 64) throw std::invalid_argument("fdi sweep: grid_n must be at least 64");
    if (!(rho > 0.0)) throw std::invalid_argument("fdi sweep: rho must be positive");
    if (spectral_radius(plant) >= rho) throw UnstablePlant("fdi sweep: G(rho z) has a pole on or outside the unit circle");
}

template <class F>
FdiResult grid_max(int grid_n, F&& value) {
    FdiResult r;
    r.max_real = -std::numeric_limits<double>::infinity();
    r.grid_used = grid_n;
    for (int k = 0; k < grid_n; ++k) {
        const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / grid_n);
        const double v = value(z);
        if (v > r.max_real) {
            r.max_real = v;
            r.worst_z = z;
        }
    }
    return r;
}

// Doubles the grid once when the maximum sits within 1e-7 of zero.
template <class F>
FdiResult refined_max(int grid_n, F&& value) {
    FdiResult r = grid_max(grid_n, value);
    if (std::abs(r.max_real) < 1e-7) {
        FdiResult fine = grid_max(2 * grid_n, value);
        if (fine.max_real >= r.max_real) r = fine;
        r.grid_used = 2 * grid_n;
    }
    return r;
}

}  // namespace

FdiResult fdi_sweep(const FirMultiplier& m, const StateSpace& plant, double K, double rho, int grid_n) {
    check_grid(plant, rho, grid_n);
    return refined_max(grid_n, [&](Complex z) {
        const Complex g = freq_response(plant, rho * z)(0, 0);
        return std::real(eval(m, z) * (K * g - 1.0));
    });
}

FdiResult matrix_fdi_sweep(const Factorization& fact, const StateSpace& plant, double rho, int grid_n) {
    check_grid(plant, rho, grid_n);
    const ComplexMatrix kp = fact.kp.cast<Complex>();
    return refined_max(grid_n, [&](Complex z) {
        ComplexMatrix gi(2, 1);
        gi(0, 0) = freq_response(plant, rho * z)(0, 0);
        gi(1, 0) = 1.0;
        const ComplexMatrix u = psi_response(fact, z) * gi;
        const ComplexMatrix h = u.adjoint() * kp * u;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().maxCoeff();
    });
}

Trajectory simulate(const StateSpace& plant, const Nonlinearity& delta, const Vector& x0, int horizon) {
    if (horizon < 1) throw std::invalid_argument("simulate: horizon must be at least 1");
    if (plant.inputs() != 1 || plant.outputs() != 1) throw std::invalid_argument("simulate: SISO plant required");
    if (x0.size() != plant.states()) throw std::invalid_argument("simulate: x0 has wrong dimension");
    const double d = plant.D(0, 0);
    Trajectory tr;
    tr.states.reserve(horizon + 1);
    Vector x = x0;
    tr.states.push_back(x);
    for (int k = 0; k < horizon; ++k) {
        const double cx = plant.is_static() ? 0.0 : (plant.C * x)(0, 0);
        double v = cx;
        if (d != 0.0 && cx != 0.0) {
            // v = Cx + D Delta(v): bracket, then bisect on the monotone residual. The
            // tolerance is relative so decaying trajectories keep full precision.
            auto f = [&](double vv) { return vv - cx - d * delta(vv); };
            const double step = std::abs(cx);
            double lo = cx - step;
            double hi = cx + step;
            while (f(lo) > 0.0) lo = cx - 2.0 * (cx - lo);
            while (f(hi) < 0.0) hi = cx + 2.0 * (hi - cx);
            for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (f(mid) > 0.0 ? hi : lo) = mid;
            }
            v = 0.5 * (lo + hi);
        }
        const double w = delta(v);
        tr.v.push_back(v);
        tr.w.push_back(w);
        if (!plant.is_static()) x = plant.A * x + plant.B.col(0) * w;
        tr.states.push_back(x);
        if (!x.allFinite()) {
            tr.diverged = true;
            break;
        }
    }
    return tr;
}

RateCheck check_rate(const Trajectory& traj, double rho_certified, double slack) {
    RateCheck rc;
    if (traj.diverged) {
        rc.ok = false;
        rc.fitted_rate = std::numeric_limits<double>::infinity();
        return rc;
    }
    const size_t n = traj.states.size();
    std::vector<double> ks;
    std::vector<double> ls;
    for (size_t k = n / 2; k < n; ++k) {
        const double nx = traj.states[k].norm();
        if (nx < 1e-280) continue;
        ks.push_back(static_cast<double>(k));
        ls.push_back(std::log(nx));
    }
    if (ks.size() < 2) {
        rc.ok = true;
        rc.fitted_rate = 0.0;
        return rc;
    }
    const double kb = std::accumulate(ks.begin(), ks.end(), 0.0) / ks.size();
    const double lb = std::accumulate(ls.begin(), ls.end(), 0.0) / ls.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (size_t i = 0; i < ks.size(); ++i) {
        sxy += (ks[i] - kb) * (ls[i] - lb);
        sxx += (ks[i] - kb) * (ks[i] - kb);
    }
    rc.fitted_rate = std::exp(sxy / sxx);
    rc.ok = rc.fitted_rate <= rho_certified + slack;
    return rc;
}

bool BatteryReport::passed() const {
    return std::all_of(cases.begin(), cases.end(), [](const BatteryCase& c) { return c.check.ok && !c.diverged; });
}

double BatteryReport::worst_rate() const {
    double w = 0.0;
    for (const auto& c : cases) w = std::max(w, c.check.fitted_rate);
    return w;
}

int battery_horizon(double rho_certified) {
    if (!(rho_certified > 0.0 && rho_certified < 1.0)) return 20000;
    const double h = std::ceil(std::log(1e-12) / std::log(rho_certified));
    return static_cast<int>(std::clamp(h, 200.0, 20000.0));
}

BatteryReport battery(const StateSpace& plant, double K, double rho_certified, std::uint64_t seed, int jobs) {
    std::vector<Nonlinearity> deltas;
    for (int i = 0; i <= 4; ++i) deltas.push_back(Nonlinearity::linear(K * i / 4.0));
    for (double level : {0.1, 1.0, 10.0}) deltas.push_back(Nonlinearity::saturation(K, level));
    for (double width : {0.1, 1.0, 10.0}) deltas.push_back(Nonlinearity::deadzone(K, width));

    constexpr int kStarts = 5;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 10.0);
    std::vector<Vector> starts;
    for (int s = 0; s < kStarts; ++s) {
        Vector x0(plant.states());
        for (Index i = 0; i < x0.size(); ++i) x0[i] = normal(rng);
        starts.push_back(x0);
    }

    BatteryReport rep;
    rep.horizon = battery_horizon(rho_certified);
    const int total = static_cast<int>(deltas.size()) * kStarts;
    rep.cases.resize(total);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < total; i = next++) {
            const Nonlinearity& nl = deltas[i / kStarts];
            const Trajectory tr = simulate(plant, nl, starts[i % kStarts], rep.horizon);
            BatteryCase& bc = rep.cases[i];
            bc.label = nl.describe() + " x0#" + std::to_string(i % kStarts);
            bc.diverged = tr.diverged;
            bc.check = check_rate(tr, rho_certified);
        }
    };
    const int nthreads = std::max(1, std::min(jobs, total));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rep;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << "k,norm_x,v,w\n";
    os.precision(17);
    for (size_t k = 0; k < traj.v.size(); ++k)
        os << k << ',' << traj.states[k].norm() << ',' << traj.v[k] << ',' << traj.w[k] << '\n';
}

}  // namespace zfrate
