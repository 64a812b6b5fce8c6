#include "phgeo/report.hpp"

#include <fstream>

#include "phgeo/errors.hpp"

namespace phgeo {

using nlohmann::json;

nlohmann::json ExperimentReport::to_json() const {
    json a = json::array();
    for (const auto& as : assertions)
        a.push_back({{"name", as.name},
                     {"residual", as.residual},
                     {"tolerance", as.tolerance},
                     {"pass", as.pass()}});
    return json{{"name", name},
                {"chart", chart},
                {"ledger_hash", ledger_hash},
                {"parameters", parameters},
                {"assertions", a},
                {"pass", pass()},
                {"seed", seed},
                {"tool_version", tool_version},
                {"wall_ms", wall_ms}};
}

ExperimentReport ExperimentReport::from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.chart = j.at("chart").get<std::string>();
    r.ledger_hash = j.at("ledger_hash").get<std::string>();
    r.parameters = j.at("parameters");
    for (const auto& a : j.at("assertions"))
        r.assertions.push_back({a.at("name").get<std::string>(), a.at("residual").get<double>(),
                                a.at("tolerance").get<double>()});
    r.seed = j.at("seed").get<uint64_t>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

std::string ledger_hash(const std::string& ledger_text) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : ledger_text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string serialize_reports(const std::vector<ExperimentReport>& reports, bool strip_timing) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j = r.to_json();
        if (strip_timing) j["wall_ms"] = 0.0;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (size_t i = 0; i < header.size(); ++i) out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

}  // namespace phgeo
