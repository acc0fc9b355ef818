#include "output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "airybeta/version.hpp"

namespace airybeta::cli {

std::string round_trip(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::logic_error("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

namespace {

void write_line(std::ofstream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

}  // namespace

void CsvTable::write(const std::filesystem::path& file, const std::vector<std::string>& comments) const {
  std::ofstream os = open_output(file);
  for (const auto& c : comments) os << "# " << c << '\n';
  write_line(os, columns_);
  for (const auto& r : rows_) write_line(os, r);
}

std::vector<std::string> csv_preamble(const RunInfo& info) {
  std::vector<std::string> out{
      "airybeta " + info.command,
      std::string("version ") + kVersion + "+" + kContentVersion,
      "seed " + std::to_string(info.seed),
      "config " + info.config.dump(),
  };
  if (info.embed_runtime) out.push_back("runtime_seconds " + round_trip(info.runtime_seconds));
  return out;
}

void write_summary(const std::filesystem::path& file, const RunInfo& info,
                   const nlohmann::ordered_json& results) {
  nlohmann::ordered_json doc;
  doc["command"] = info.command;
  doc["version"] = std::string(kVersion) + "+" + kContentVersion;
  doc["seed"] = info.seed;
  doc["config"] = info.config;
  doc["runtime_seconds"] = info.embed_runtime ? nlohmann::ordered_json(info.runtime_seconds) : nlohmann::ordered_json();
  doc["results"] = results;
  std::ofstream os = open_output(file);
  os << doc.dump(2) << '\n';
}

}  // namespace airybeta::cli
