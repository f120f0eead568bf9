// JSON / CSV serialization for specs, profiles, solver results and reports.
#pragma once

#include "clmm/solver.hpp"
#include "clmm/strategies.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace clmm {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json spec_to_json(const GameSpec& spec);
GameSpec spec_from_json(const nlohmann::json& j);

nlohmann::json profile_to_json(const AtomicProfile& profile,
                               const std::vector<std::string>& player_ids);
AtomicProfile profile_from_json(const nlohmann::json& j,
                                const std::vector<std::string>& expected_ids);

nlohmann::json result_to_json(const EquilibriumResult& result);

nlohmann::json kkt_to_json(const KktReport& report);

// Shortest round-trip decimal form (stable across runs).
std::string format_double(double v);

std::string report_csv(const std::vector<ReportRow>& rows);

// Per-strategy summary over non-absent cells: count, mean, std and quartiles
// of every metric column.
nlohmann::json summarize_report(const std::vector<ReportRow>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace clmm
