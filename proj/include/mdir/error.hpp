#pragma once

#include <stdexcept>
#include <string>

namespace mdir {

// Every failure the library can signal, by name. The CLI maps these to
// exit codes: data/config problems -> 3, numeric failures -> 4.
enum class errc {
    empty_group,
    bad_label_cardinality,
    negative_time,
    bad_status,
    degree_too_large,
    too_many_directions,
    out_of_domain,
    no_events,
    no_convergence,
    too_many_assignments,
    degenerate_statistic,
    negative_hazard,
    quadrature_failure,
    bad_config,
    bad_input,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::empty_group: return "EmptyGroup";
        case errc::bad_label_cardinality: return "BadLabelCardinality";
        case errc::negative_time: return "NegativeTime";
        case errc::bad_status: return "BadStatus";
        case errc::degree_too_large: return "DegreeTooLarge";
        case errc::too_many_directions: return "TooManyDirections";
        case errc::out_of_domain: return "OutOfDomain";
        case errc::no_events: return "NoEvents";
        case errc::no_convergence: return "NoConvergence";
        case errc::too_many_assignments: return "TooManyAssignments";
        case errc::degenerate_statistic: return "DegenerateStatistic";
        case errc::negative_hazard: return "NegativeHazard";
        case errc::quadrature_failure: return "QuadratureFailure";
        case errc::bad_config: return "BadConfig";
        case errc::bad_input: return "BadInput";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

    // True for failures of the numeric machinery (as opposed to bad data/config).
    bool numeric() const noexcept {
        return code_ == errc::no_convergence || code_ == errc::quadrature_failure;
    }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace mdir
