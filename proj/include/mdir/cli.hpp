#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdir/data.hpp"

namespace mdir {

// Resolved inputs of the `test` subcommand. The flag parser applies the
// defaults (no weight flags at all means {w(0,0), cross}); library callers
// fill the fields directly.
struct CliTestRequest {
    std::string input;
    std::vector<std::pair<int, int>> rg;  // w(r,g) directions, in order
    bool cross = true;                    // append the crossing direction
    long n_perm = 10000;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::string format = "text";  // text | json
    std::string out;              // empty writes to stdout
};

struct DirectionReport {
    std::string tag;
    double t_n = 0.0;
    double sigma2 = 0.0;
    double studentized_sq = 0.0;

    bool operator==(const DirectionReport&) const = default;
};

struct CliReport {
    std::string schema = "mdir-test-report/1";
    std::string input;
    int n = 0;
    int n1 = 0;
    int n2 = 0;
    int events = 0;
    std::string label1;
    std::string label2;
    std::vector<std::string> directions;  // tags actually tested
    std::vector<std::string> pruned;      // tags dropped as linearly dependent
    double alpha = 0.05;
    long n_perm = 0;
    std::uint64_t seed = 0;
    double s_n = 0.0;
    int df = 0;
    double p_chi2 = 1.0;
    double p_perm = 1.0;
    bool reject_chi2 = false;
    bool reject_perm = false;
    std::vector<DirectionReport> per_direction;

    bool operator==(const CliReport&) const = default;
};

// survival CSV with header time,status,group; parse failures carry the
// offending line number.
std::vector<RawRecord> read_survival_csv(const std::string& path);

CliReport cmd_test(const CliTestRequest& req);

// cmd_test restricted to a single resolved direction.
CliReport cmd_single(const CliTestRequest& req);

std::string report_to_text(const CliReport& r);
std::string report_to_json_text(const CliReport& r);
CliReport report_from_json_text(const std::string& text);

// Full command-line entry point. Exit codes: 0 success, 2 usage/config error,
// 3 data error, 4 numeric failure.
int cli_main(int argc, char** argv);

}  // namespace mdir
