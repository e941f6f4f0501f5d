#include "mdir/data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

namespace mdir {

namespace {

std::atomic<long> g_build_count{0};

void check_subject(double time, int status) {
    if (!std::isfinite(time) || time < 0.0)
        fail(errc::negative_time, "time must be finite and >= 0, got " + std::to_string(time));
    if (status != 0 && status != 1)
        fail(errc::bad_status, "status must be 0 or 1, got " + std::to_string(status));
}

}  // namespace

TwoSampleData ingest(const std::vector<RawRecord>& records) {
    std::set<std::string> labels;
    for (const auto& r : records) {
        check_subject(r.time, r.status);
        labels.insert(r.group);
    }
    if (labels.size() == 1)
        fail(errc::empty_group, "only one group present ('" + *labels.begin() + "')");
    if (labels.size() != 2)
        fail(errc::bad_label_cardinality,
             "expected exactly 2 group labels, got " + std::to_string(labels.size()));

    TwoSampleData data;
    data.label1 = *labels.begin();
    data.label2 = *std::next(labels.begin());
    data.subjects.reserve(records.size());
    for (const auto& r : records) {
        int g = r.group == data.label1 ? 1 : 2;
        data.subjects.push_back({r.time, r.status, g});
        (g == 1 ? data.n1 : data.n2)++;
    }
    return data;
}

TwoSampleData from_subjects(std::vector<Subject> subjects) {
    TwoSampleData data;
    for (const auto& s : subjects) {
        check_subject(s.time, s.status);
        if (s.group != 1 && s.group != 2)
            fail(errc::bad_label_cardinality, "group index must be 1 or 2");
        (s.group == 1 ? data.n1 : data.n2)++;
    }
    if (data.n1 == 0 || data.n2 == 0) fail(errc::empty_group, "each group needs at least one subject");
    data.subjects = std::move(subjects);
    data.label1 = "1";
    data.label2 = "2";
    return data;
}

long risk_table_build_count() { return g_build_count.load(std::memory_order_relaxed); }

RiskTable build_risk_table(const TwoSampleData& data) {
    g_build_count.fetch_add(1, std::memory_order_relaxed);
    std::vector<Subject> sorted = data.subjects;
    std::sort(sorted.begin(), sorted.end(),
              [](const Subject& a, const Subject& b) { return a.time < b.time; });

    RiskTable rt;
    rt.n = data.n();
    rt.n1 = data.n1;
    rt.n2 = data.n2;

    const int n = rt.n;
    int seen = 0;
    int seen1 = 0;
    double surv = 1.0;  // pooled Kaplan-Meier survival just before the current row
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double t = sorted[i].time;
        RiskRow row;
        row.t = t;
        row.y = n - seen;
        row.y1 = rt.n1 - seen1;
        row.km_left = 1.0 - surv;
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].time == t) {
            row.d += sorted[j].status;
            if (sorted[j].group == 1) {
                row.d1 += sorted[j].status;
                ++seen1;
            }
            ++seen;
            ++j;
        }
        // step through tied events one at a time so downstream per-event
        // processing can pick up the estimate mid-row with identical rounding
        for (int j = 0; j < row.d; ++j) surv *= 1.0 - 1.0 / static_cast<double>(row.y - j);
        rt.rows.push_back(row);
        i = j;
    }
    return rt;
}

std::vector<std::pair<double, double>> nelson_aalen_increments(const RiskTable& rt,
                                                               WhichGroup group) {
    std::vector<std::pair<double, double>> out;
    out.reserve(rt.rows.size());
    for (const auto& r : rt.rows) {
        double inc = 0.0;
        switch (group) {
            case WhichGroup::pooled:
                if (r.y > 0) inc = static_cast<double>(r.d) / r.y;
                break;
            case WhichGroup::group1:
                if (r.y1 > 0) inc = static_cast<double>(r.d1) / r.y1;
                break;
            case WhichGroup::group2:
                if (r.y - r.y1 > 0) inc = static_cast<double>(r.d - r.d1) / (r.y - r.y1);
                break;
        }
        out.emplace_back(r.t, inc);
    }
    return out;
}

}  // namespace mdir
