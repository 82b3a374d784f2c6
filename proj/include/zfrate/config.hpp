#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zfrate/factorization.hpp"
#include "zfrate/multiplier.hpp"
#include "zfrate/search.hpp"

namespace zfrate {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& msg);
    int line() const { return line_; }

private:
    int line_;
};

// Flat key=value run configuration, '#' comments, versioned by format=1.
struct RunConfig {
    int format = 1;
    std::string name;
    std::vector<double> num;
    std::vector<double> den;
    double K = 1.0;
    Causality causality = Causality::Noncausal;
    Framework framework = Framework::Iqc;
    Scheme scheme = Scheme::Psi2;
    int n_b = 0;
    int n_f = 0;
    bool odd = false;
    double bisect_tol = 1e-6;
    int grid_n = 2048;
    std::string csv;
    // Nominal multiplier order for the comparison table; 0 when absent.
    int n_z = 0;
    // Reference values: ref.lower, ref.<odd|nonodd>.<method>; a number or "invalid".
    std::map<std::string, std::string> refs;
};

// Throws ConfigError for syntax and value problems, InvalidScheme when the class,
// framework and scheme cannot be combined.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

// Canonical text; parse(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& c);

Query to_query(const RunConfig& c);

// Reference value for key, or nullopt when absent; NaN encodes "invalid".
std::optional<double> reference(const RunConfig& c, const std::string& key);

Causality parse_causality(const std::string& s);
Framework parse_framework(const std::string& s);
Scheme parse_scheme(const std::string& s);

}  // namespace zfrate
