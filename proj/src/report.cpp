#include "nolab/report.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace nolab {

bool VerifyReport::check_le(const std::string& desc, double measured, double threshold) {
    const bool ok = measured <= threshold;
    assertions.push_back({desc, threshold, measured, ok});
    return ok;
}

bool VerifyReport::check_ge(const std::string& desc, double measured, double threshold) {
    const bool ok = measured >= threshold;
    assertions.push_back({desc, threshold, measured, ok});
    return ok;
}

bool VerifyReport::check(const std::string& desc, bool ok, double measured,
                         double threshold) {
    assertions.push_back({desc, threshold, measured, ok});
    return ok;
}

bool VerifyReport::pass() const {
    for (const Assertion& a : assertions)
        if (!a.pass) return false;
    return true;
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["params"] = params;
    j["assertions"] = nlohmann::json::array();
    for (const Assertion& a : assertions)
        j["assertions"].push_back({{"description", a.description},
                                   {"threshold", a.threshold},
                                   {"measured", a.measured},
                                   {"pass", a.pass}});
    j["series"] = nlohmann::json::object();
    for (const auto& [name, vals] : series) j["series"][name] = vals;
    j["seeds"] = seeds;
    j["started_at"] = started_at;
    j["wall_ms"] = wall_ms;
    j["status"] = status;
    j["pass"] = pass();
    return j;
}

void write_report(const VerifyReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / (rep.experiment + ".json"));
        out << rep.to_json().dump(2) << "\n";
    }
    for (const auto& [name, vals] : rep.series) {
        std::ofstream csv(fs::path(out_dir) / (rep.experiment + "_" + name + ".csv"));
        csv << "index," << name << "\r\n";
        csv.precision(17);
        for (size_t i = 0; i < vals.size(); ++i) csv << i << "," << vals[i] << "\r\n";
    }
}

ReportTimer::ReportTimer(VerifyReport& rep) : rep_(&rep) {
    using namespace std::chrono;
    t0_ns_ = duration_cast<nanoseconds>(steady_clock::now().time_since_epoch()).count();
    const auto now = system_clock::now();
    const std::time_t t = system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    rep_->started_at = buf;
}

void ReportTimer::finish() {
    using namespace std::chrono;
    const auto t1 = duration_cast<nanoseconds>(steady_clock::now().time_since_epoch()).count();
    rep_->wall_ms = (t1 - t0_ns_) / 1e6;
}

}  // namespace nolab
