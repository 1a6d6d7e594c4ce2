// Plain-text config files, per-step CSV series and legacy VTK snapshots.
#pragma once

#include "llg/diagnostics.hpp"
#include "llg/fem.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace llg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration with `#` comments. Every getter records
/// the value it returned (including defaults) so the resolved configuration
/// can be written back out.
class Config {
 public:
  Config() = default;
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key, double fallback);
  double require_double(const std::string& key);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  /// Three numbers separated by commas and/or whitespace.
  Vec3 get_vec3(const std::string& key, const Vec3& fallback);
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback);

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const;
  /// All values handed out, sorted by key.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  void write_resolved(const std::string& path) const;

 private:
  const std::string* lookup(const std::string& key);

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
  std::set<std::string> used_;
};

/// Exact CSV column list of the per-step series.
extern const std::vector<std::string> kSeriesColumns;

void write_series_csv(std::ostream& out, const DiagnosticsSeries& series);
void write_series_csv(const std::string& path, const DiagnosticsSeries& series);
/// Throws std::runtime_error on a header mismatch or malformed record.
DiagnosticsSeries read_series_csv(std::istream& in);
DiagnosticsSeries read_series_csv(const std::string& path);

/// Generic numeric table with 17 significant digits.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Legacy ASCII VTK unstructured grid with point vectors `m`.
void write_vtk(std::ostream& out, const TetMesh& mesh, const NodalVectorField& m,
               const std::string& title = "llg magnetization");
void write_vtk(const std::string& path, const TetMesh& mesh, const NodalVectorField& m,
               const std::string& title = "llg magnetization");

}  // namespace llg
