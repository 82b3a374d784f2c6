#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "zfrate/config.hpp"
#include "zfrate/search.hpp"

namespace zfrate {

struct TableCell {
    Method method = Method::Causal;
    bool has_ref = false;
    double reference = 0.0;  // NaN: reference says no certificate
    Certificate cert;
    double deviation = 0.0;  // NaN unless both values are numbers
    bool ok = false;
    bool informational = false;  // reduced-order cell: deviation reported, not enforced
    double seconds = 0.0;
};

struct TableRow {
    std::string example;
    bool odd = true;
    int n_z_nominal = 0;
    int n_z_used = 0;
    double lower_ref = 0.0;
    double lower_computed = 0.0;
    std::array<TableCell, 4> cells;
};

struct TableOptions {
    bool full_scale = false;
    int n_z_cap = 12;
    int jobs = 1;
    bool run_oracles = false;
    SdpOptions sdp;
};

// Deviation tolerance per example: 1e-3 for ex1, 2e-3 otherwise.
double table_tolerance(const std::string& example);

// Odd and non-odd rows for every config, four method columns each.
std::vector<TableRow> run_table2(const std::vector<RunConfig>& configs, const TableOptions& opts);

// Prints the table; returns the number of failing cells.
int print_table2(const std::vector<TableRow>& rows, bool reduced, std::ostream& os);

std::vector<RunConfig> load_corpus(const std::string& dir);

}  // namespace zfrate
