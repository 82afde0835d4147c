#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace nolab {

struct Assertion {
    std::string description;
    double threshold = 0.0;
    double measured = 0.0;
    bool pass = false;
};

// One report per experiment: pass/fail assertions, measured series, seeds.
struct VerifyReport {
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    std::vector<Assertion> assertions;
    std::map<std::string, std::vector<double>> series;
    std::vector<std::uint64_t> seeds;
    std::string started_at;
    double wall_ms = 0.0;
    std::string status = "ok";  // "ok" or "inconclusive" (timing noise)

    // measured <= threshold
    bool check_le(const std::string& desc, double measured, double threshold);
    // measured >= threshold
    bool check_ge(const std::string& desc, double measured, double threshold);
    bool check(const std::string& desc, bool ok, double measured = 0.0,
               double threshold = 0.0);

    bool pass() const;
    nlohmann::json to_json() const;
};

// Writes report JSON plus one RFC-4180 CSV per series into out_dir.
void write_report(const VerifyReport& rep, const std::string& out_dir);

// Stamps started_at (UTC, ISO-8601) on construction; call finish() to set wall_ms.
struct ReportTimer {
    explicit ReportTimer(VerifyReport& rep);
    void finish();

  private:
    VerifyReport* rep_;
    std::int64_t t0_ns_;
};

}  // namespace nolab
