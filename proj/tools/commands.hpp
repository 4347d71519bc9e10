#pragma once

#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

#include "scenario.hpp"

namespace hjbpath::cli {

// Each command writes its artifacts into `out` (created if needed), prints
// a short report to `log` and returns the summary it wrote as JSON. Errors
// are thrown as hjbpath::Error.

nlohmann::ordered_json cmd_solve(const Scenario& sc, const std::filesystem::path& out,
                                 std::ostream& log);
nlohmann::ordered_json cmd_path(const Scenario& sc, const std::filesystem::path& out,
                                std::ostream& log);
nlohmann::ordered_json cmd_ensemble(const Scenario& sc, const std::filesystem::path& out,
                                    std::ostream& log);
nlohmann::ordered_json cmd_critical_time(const Scenario& sc, const std::filesystem::path& out,
                                         std::ostream& log);
nlohmann::ordered_json cmd_converge(const Scenario& sc, const std::filesystem::path& out,
                                    std::ostream& log);
nlohmann::ordered_json cmd_control_snapshot(const Scenario& sc,
                                            const std::filesystem::path& out,
                                            std::ostream& log);
nlohmann::ordered_json cmd_gen_terrain(const Scenario& sc, const std::filesystem::path& out,
                                       std::ostream& log);

}  // namespace hjbpath::cli
