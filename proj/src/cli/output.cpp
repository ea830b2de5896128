#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "l1rom/cli.hpp"
#include "output.hpp"

namespace l1rom::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {}

Csv::Row& Csv::Row::operator<<(const std::string& s) {
  cells.push_back(s);
  return *this;
}
Csv::Row& Csv::Row::operator<<(const char* s) { return *this << std::string(s); }
Csv::Row& Csv::Row::operator<<(double v) { return *this << format_number(v); }
Csv::Row& Csv::Row::operator<<(Index v) { return *this << std::to_string(v); }
Csv::Row& Csv::Row::operator<<(int v) { return *this << std::to_string(v); }
Csv::Row& Csv::Row::operator<<(bool v) { return *this << std::string(v ? "true" : "false"); }

Csv::Row& Csv::row() {
  rows_.emplace_back();
  return rows_.back();
}

void Csv::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      // Commas only appear in status messages; keep the file one-cell-per-field.
      std::string c = cells[i];
      for (char& ch : c) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << (i ? "," : "") << c;
    }
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r.cells);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(std::move(cells));
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  static const char* digits = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[digest[i] >> 4];
    hex += digits[digest[i] & 15];
  }
  return hex;
}

const Tolerance& Tolerances::of(const std::string& file) const {
  const auto it = per_file.find(file);
  return it == per_file.end() ? fallback : it->second;
}

namespace {

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

DiffReport diff_against_reference(const std::filesystem::path& run_dir, const std::filesystem::path& reference_dir,
                                  const Tolerances& tol) {
  DiffReport report;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(reference_dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path().filename());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    report.pass = false;
    report.messages.push_back("no CSV files in " + reference_dir.string());
  }
  for (const auto& name : files) {
    const std::string file = name.string();
    const auto fail = [&](const std::string& msg) {
      report.pass = false;
      report.messages.push_back(file + ": " + msg);
    };
    if (!std::filesystem::exists(run_dir / name)) {
      fail("missing from run");
      continue;
    }
    const auto ref = read_csv(reference_dir / name);
    const auto run = read_csv(run_dir / name);
    if (ref.size() != run.size()) {
      fail("row count " + std::to_string(run.size()) + " != " + std::to_string(ref.size()));
      continue;
    }
    const Tolerance& t = tol.of(file);
    bool file_ok = true;
    for (std::size_t r = 0; r < ref.size() && file_ok; ++r) {
      if (ref[r].size() != run[r].size()) {
        fail("row " + std::to_string(r) + ": column count differs");
        file_ok = false;
        break;
      }
      for (std::size_t c = 0; c < ref[r].size(); ++c) {
        double a = 0.0, b = 0.0;
        const bool numeric = parse_double(run[r][c], a) && parse_double(ref[r][c], b);
        bool same;
        if (numeric && std::isfinite(a) && std::isfinite(b)) {
          same = std::abs(a - b) <= t.abs + t.rel * std::abs(b);
        } else {
          same = run[r][c] == ref[r][c];
        }
        if (!same) {
          const std::string col = r > 0 && c < ref[0].size() ? ref[0][c] : std::to_string(c);
          fail("row " + std::to_string(r) + " col " + col + ": " + run[r][c] + " vs " + ref[r][c]);
          file_ok = false;
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace l1rom::cli
