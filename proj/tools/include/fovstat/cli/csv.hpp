#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fovstat::cli {

/// Numeric table with a header row. Values are printed with 17 significant
/// digits so a read-back reproduces the doubles exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace fovstat::cli
