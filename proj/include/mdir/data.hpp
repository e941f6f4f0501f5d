#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdir/error.hpp"

namespace mdir {

// One observation: follow-up time, event indicator (1 = event, 0 = censored),
// group index 1 or 2.
struct Subject {
    double time = 0.0;
    int status = 0;
    int group = 0;
};

struct RawRecord {
    double time = 0.0;
    int status = 0;
    std::string group;
};

// Validated two-sample data. Subjects keep their input order; group labels are
// mapped so the lexicographically smaller label becomes group 1.
struct TwoSampleData {
    std::vector<Subject> subjects;
    int n1 = 0;
    int n2 = 0;
    std::string label1;
    std::string label2;

    int n() const { return n1 + n2; }
};

// One row per distinct observed time. y/y1 are at-risk counts at t (time >= t),
// d/d1 the event counts at t, km_left the pooled Kaplan-Meier value just
// before t.
struct RiskRow {
    double t = 0.0;
    int y = 0;
    int y1 = 0;
    int d = 0;
    int d1 = 0;
    double km_left = 0.0;
};

struct RiskTable {
    std::vector<RiskRow> rows;
    int n = 0;
    int n1 = 0;
    int n2 = 0;

    int total_events() const {
        int s = 0;
        for (const auto& r : rows) s += r.d;
        return s;
    }
};

enum class WhichGroup { pooled, group1, group2 };

TwoSampleData ingest(const std::vector<RawRecord>& records);

// Same validation for subjects that already carry group indices 1/2
// (simulation output, permuted data).
TwoSampleData from_subjects(std::vector<Subject> subjects);

RiskTable build_risk_table(const TwoSampleData& data);

// Process-wide number of build_risk_table calls so far. Instrumentation for
// tests and benchmarks that pin down how often engines rebuild the table.
long risk_table_build_count();

// Nelson-Aalen increments d/y per row for the chosen group, 0 where the
// group's at-risk count is 0.
std::vector<std::pair<double, double>> nelson_aalen_increments(const RiskTable& rt,
                                                               WhichGroup group);

}  // namespace mdir
