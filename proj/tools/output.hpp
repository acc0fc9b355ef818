#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace airybeta::cli {

// Shortest decimal string that parses back to the same double.
std::string round_trip(double x);

// A CSV table preceded by '#' comment lines carrying the run metadata.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(std::vector<std::string> cells);
  void write(const std::filesystem::path& file, const std::vector<std::string>& comments) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct RunInfo {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  bool embed_runtime = false;
  double runtime_seconds = 0.0;
};

// Metadata comment lines shared by every CSV output.
std::vector<std::string> csv_preamble(const RunInfo& info);
// JSON document with the metadata block followed by `results`.
void write_summary(const std::filesystem::path& file, const RunInfo& info,
                   const nlohmann::ordered_json& results);

}  // namespace airybeta::cli
