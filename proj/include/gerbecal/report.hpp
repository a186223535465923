#pragma once

#include <string>
#include <vector>

namespace gerbecal {

enum class Status { Pass, Fail, Skip, Error };

struct CheckResult {
    std::string id;
    Status status = Status::Pass;
    double residual = 0.0;
    std::string witness; // point or overlap, when meaningful
    std::string note;
    double wall_ms = 0.0;

    static CheckResult pass(std::string id, double residual, std::string witness = "",
                            std::string note = "");
    static CheckResult fail(std::string id, double residual, std::string witness = "",
                            std::string note = "");
    static CheckResult from_residual(std::string id, double residual, double tol,
                                     std::string witness = "", std::string note = "");
    static CheckResult skip(std::string id, std::string note);
    static CheckResult error(std::string id, std::string note);
};

const char* status_name(Status s);

/// Ordered, mergeable collection of check results.  Canonical text output
/// is deterministic; wall times print only when `timings` is set.
struct Report {
    std::string suite;
    std::vector<CheckResult> checks;

    void add(CheckResult r) { checks.push_back(std::move(r)); }
    void merge(const Report& other);
    void sort_by_id();
    bool all_ok() const; // pass/skip only
    double worst_residual() const;
    std::size_t count(Status s) const;

    std::string text(bool timings = false) const;
    std::string structured(bool timings = false) const; // one record per line
};

} // namespace gerbecal
