#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "zfrate/factorization.hpp"
#include "zfrate/lti.hpp"
#include "zfrate/multiplier.hpp"
#include "zfrate/types.hpp"

namespace zfrate {

// Memoryless slope-restricted map with N(0) = 0.
class Nonlinearity {
public:
    enum class Kind { Linear, Saturation, Deadzone, PiecewiseOdd };

    static Nonlinearity linear(double gain);
    // slope * clamp(v, -level, level)
    static Nonlinearity saturation(double slope, double level);
    // slope * (v - clamp(v, -width, width))
    static Nonlinearity deadzone(double slope, double width);
    // Odd piecewise-linear interpolation of (x, y) samples with 0 < x strictly increasing,
    // y nondecreasing from 0; flat beyond the last sample.
    static Nonlinearity piecewise_odd(std::vector<std::pair<double, double>> samples);

    double operator()(double v) const;
    Kind kind() const { return kind_; }
    // Largest difference quotient.
    double max_slope() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Linear;
    double slope_ = 0.0;
    double param_ = 0.0;
    std::vector<std::pair<double, double>> samples_;
};

struct FdiResult {
    double max_real = 0.0;
    Complex worst_z = 1.0;
    int grid_used = 0;
};

// max over |z| = 1 of Re{M(z) (K G(rho z) - 1)}, M evaluated in its own form. The loop is
// positive feedback, w = Delta(v), so the linear closed loop is 1 - K G.
FdiResult fdi_sweep(const FirMultiplier& m, const StateSpace& plant, double K, double rho, int grid_n = 2048);

// max over |z| = 1 of lambda_max((Psi(z) [G(rho z); 1])^* Kp (Psi(z) [G(rho z); 1])), using the
// factorization as realized (substitutions included). Equals twice the scalar sweep.
FdiResult matrix_fdi_sweep(const Factorization& fact, const StateSpace& plant, double rho, int grid_n = 2048);

struct Trajectory {
    std::vector<Vector> states;
    std::vector<double> v;
    std::vector<double> w;
    bool diverged = false;
};

// x+ = A x + B w, v = C x + D w, w = Delta(v); horizon steps from x0.
Trajectory simulate(const StateSpace& plant, const Nonlinearity& delta, const Vector& x0, int horizon);

struct RateCheck {
    bool ok = false;
    double fitted_rate = 0.0;
};

inline constexpr double kRateSlack = 0.01;

// exp of the least-squares slope of log||x_k|| over the last half of the trajectory.
RateCheck check_rate(const Trajectory& traj, double rho_certified, double slack = kRateSlack);

struct BatteryCase {
    std::string label;
    RateCheck check;
    bool diverged = false;
};

struct BatteryReport {
    std::vector<BatteryCase> cases;
    int horizon = 0;
    bool passed() const;
    double worst_rate() const;
};

// Linear at 5 gains in [0, K], saturation at 3 levels, deadzone at 3 widths, 5 seeded x0 each.
BatteryReport battery(const StateSpace& plant, double K, double rho_certified, std::uint64_t seed = 1, int jobs = 1);

int battery_horizon(double rho_certified);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace zfrate
