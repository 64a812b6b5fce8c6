#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "phgeo/types.hpp"

namespace phgeo {

struct Assertion {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return residual < tolerance; }
};

struct ExperimentReport {
    std::string name;
    std::string chart;
    std::string ledger_hash;
    nlohmann::json parameters;
    std::vector<Assertion> assertions;
    uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    double wall_ms = 0.0;

    bool pass() const {
        for (const auto& a : assertions)
            if (!a.pass()) return false;
        return true;
    }
    void add(const std::string& aname, double residual, double tolerance) {
        assertions.push_back({aname, residual, tolerance});
    }
    double max_residual() const {
        double r = 0.0;
        for (const auto& a : assertions) r = std::max(r, a.residual);
        return r;
    }

    nlohmann::json to_json() const;
    static ExperimentReport from_json(const nlohmann::json& j);
};

// FNV-1a of a chart's convention ledger, hex-encoded.
std::string ledger_hash(const std::string& ledger_text);

// Reports serialized with wall-time fields zeroed (determinism comparisons).
std::string serialize_reports(const std::vector<ExperimentReport>& reports,
                              bool strip_timing = false);

void write_text_file(const std::string& path, const std::string& content);

// Minimal CSV writer: quotes nothing, callers pass clean cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace phgeo
