#include "gerbecal/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace gerbecal {

CheckResult CheckResult::pass(std::string id, double residual, std::string witness,
                              std::string note) {
    return {std::move(id), Status::Pass, residual, std::move(witness), std::move(note), 0.0};
}

CheckResult CheckResult::fail(std::string id, double residual, std::string witness,
                              std::string note) {
    return {std::move(id), Status::Fail, residual, std::move(witness), std::move(note), 0.0};
}

CheckResult CheckResult::from_residual(std::string id, double residual, double tol,
                                       std::string witness, std::string note) {
    Status s = residual <= tol ? Status::Pass : Status::Fail;
    return {std::move(id), s, residual, std::move(witness), std::move(note), 0.0};
}

CheckResult CheckResult::skip(std::string id, std::string note) {
    return {std::move(id), Status::Skip, 0.0, "", std::move(note), 0.0};
}

CheckResult CheckResult::error(std::string id, std::string note) {
    return {std::move(id), Status::Error, 0.0, "", std::move(note), 0.0};
}

const char* status_name(Status s) {
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skip: return "skip";
    case Status::Error: return "error";
    }
    return "?";
}

void Report::merge(const Report& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

void Report::sort_by_id() {
    std::stable_sort(checks.begin(), checks.end(),
                     [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
}

bool Report::all_ok() const {
    for (const auto& c : checks)
        if (c.status == Status::Fail || c.status == Status::Error) return false;
    return true;
}

double Report::worst_residual() const {
    double w = 0.0;
    for (const auto& c : checks) w = std::max(w, c.residual);
    return w;
}

std::size_t Report::count(Status s) const {
    std::size_t n = 0;
    for (const auto& c : checks)
        if (c.status == s) ++n;
    return n;
}

namespace {

std::string fmt_res(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string Report::text(bool timings) const {
    std::ostringstream os;
    os << "suite " << suite << "\n";
    for (const auto& c : checks) {
        os << "  " << status_name(c.status) << "  " << c.id << "  residual=" << fmt_res(c.residual);
        if (!c.witness.empty()) os << "  witness=" << c.witness;
        if (!c.note.empty()) os << "  [" << c.note << "]";
        if (timings) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f", c.wall_ms);
            os << "  time_ms=" << buf;
        }
        os << "\n";
    }
    os << "summary " << suite << ": " << count(Status::Pass) << " pass, " << count(Status::Fail)
       << " fail, " << count(Status::Skip) << " skip, " << count(Status::Error) << " error\n";
    return os.str();
}

std::string Report::structured(bool timings) const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << "{\"suite\":\"" << json_escape(suite) << "\",\"check\":\"" << json_escape(c.id)
           << "\",\"status\":\"" << status_name(c.status) << "\",\"residual\":" << fmt_res(c.residual);
        if (!c.witness.empty()) os << ",\"witness\":\"" << json_escape(c.witness) << "\"";
        if (!c.note.empty()) os << ",\"note\":\"" << json_escape(c.note) << "\"";
        if (timings) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f", c.wall_ms);
            os << ",\"time_ms\":" << buf;
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace gerbecal
