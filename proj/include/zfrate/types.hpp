#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zfrate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Factorization scheme or LMI variant not valid for the multiplier class / framework.
class InvalidScheme : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Plant (or rho-scaled plant) has poles on or outside the unit circle.
class UnstablePlant : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace zfrate
