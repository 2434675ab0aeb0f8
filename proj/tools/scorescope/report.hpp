#pragma once

// Report envelope shared by every command, and JSON views of core results.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "scorescope/blocked.hpp"
#include "scorescope/construction.hpp"
#include "scorescope/experiments.hpp"
#include "scorescope/monitor.hpp"
#include "scorescope/rdc.hpp"

namespace scorescope::cli {

using Json = nlohmann::ordered_json;

std::string tool_version();

/// Hex SHA-256 of a file's bytes. Throws InputError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

struct Report {
  std::string command;
  Json inputs = Json::array();
  Json results = Json::object();
  Json decisions = Json::object();

  void add_input(const std::filesystem::path& path);
  Json to_json() const;
};

Json to_json(const Rdc& rdc);
Json to_json(const Mode& mode);
Json to_json(const Valley& valley);
Json to_json(const ThresholdBand& band);
Json to_json(const RdcDiagnosis& diagnosis);
Json to_json(const RdcConfig& config);

Json to_json(const ClassBalance& balance);
Json to_json(const LearnabilityReport& report);
Json to_json(const BiasReport& report);
Json to_json(const BiasConfig& config);
Json to_json(const CvConfig& config);

Json to_json(const DisagreementReport& report);
Json to_json(const PowerReport& report);

Json to_json(const Contrast& contrast);
Json to_json(const BlockedAnalysis& analysis);

Json to_json(const MonitorConfig& config);
Json to_json(const AlertEvent& alert);

}  // namespace scorescope::cli
