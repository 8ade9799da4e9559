#pragma once

#include "qprobe/attack.hpp"
#include "qprobe/verify.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qprobe {

/// Inclusive linear grid "lo:hi:n".
struct GridSpec {
    double lo = 0.0, hi = 1.0;
    int n = 10;
    std::vector<double> points() const;
    static GridSpec parse(const std::string& text);
    std::string str() const;
};

struct RunConfig {
    std::string command;        // scan-squeezed | scan-displaced | scan-qubit |
                                // attack-curve | verify-point
    std::string scenario = "squeezed";  // qubit | squeezed | displaced
    double theta = 0.785398163397448;
    double phi = 0.0;
    double r = 0.5;
    double nbar = 0.0;
    double alpha = 0.5;
    double a_out = 0.3;  // verify-point, displaced scenario
    double v = 0.6;      // verify-point, displaced scenario
    double var_x = 0.5;  // verify-point, squeezed scenario
    double var_p = 0.5;
    double p = 0.0;      // verify-point, qubit scenario: depolarizing strength
    int n_max = 16;
    int m = 0;
    std::string qubit_mode = "optimal";  // naive | optimal | optimal+c
    GridSpec grid{0.3, 2.0, 20};
    GridSpec grid2{0.5, 1.5, 20};
    unsigned long long seed = 1;
    std::string output = "-";   // "-" = stdout
    std::string format = "csv"; // csv | json

    /// Simple key=value config file; unknown keys are an error.
    static RunConfig from_file(const std::string& path, const RunConfig& defaults);
    std::string to_key_values() const;

    void validate() const;  // throws Error with field diagnostics
};

/// Executes the configured command, writing the artifact to config.output.
/// Returns 0 on success, 2 if more than 10% of scan points were flagged.
int run(const RunConfig& config);

struct GapReport {
    double max_gap = 0.0;
    double mean_gap = 0.0;
    int n_points = 0;
};

/// Pointwise Var(p) gap between two curve files sharing the same abscissae.
GapReport compare(const std::string& file1, const std::string& file2);

/// Writes a plot script (matplotlib) next to the data file; returns its path.
std::string emit_plot(const std::string& data_file);

}  // namespace qprobe
