#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "l1rom/types.hpp"

namespace l1rom::cli {

/// Buffered CSV table, written in one go.
class Csv {
 public:
  struct Row {
    std::vector<std::string> cells;
    Row& operator<<(const std::string& s);
    Row& operator<<(const char* s);
    Row& operator<<(double v);
    Row& operator<<(Index v);
    Row& operator<<(int v);
    Row& operator<<(bool v);
  };

  explicit Csv(std::vector<std::string> header);
  Row& row();
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace l1rom::cli
