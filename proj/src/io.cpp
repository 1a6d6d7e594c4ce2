#include "llg/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace llg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

std::vector<std::string> split_numbers(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (c.values_.count(key))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.values_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  return parse(f, path);
}

const std::string* Config::lookup(const std::string& key) {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double Config::get_double(const std::string& key, double fallback) {
  const std::string* v = lookup(key);
  const double out = v ? parse_double(*v, key) : fallback;
  resolved_[key] = format_double(out);
  return out;
}

double Config::require_double(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  return get_double(key, 0.0);
}

int Config::get_int(const std::string& key, int fallback) {
  const std::string* v = lookup(key);
  int out = fallback;
  if (v) {
    const std::string t = trim(*v);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ConfigError(key + ": '" + *v + "' is not an integer");
  }
  resolved_[key] = std::to_string(out);
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const std::string* v = lookup(key);
  bool out = fallback;
  if (v) {
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else throw ConfigError(key + ": '" + *v + "' is not a boolean");
  }
  resolved_[key] = out ? "true" : "false";
  return out;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = lookup(key);
  const std::string out = v ? *v : fallback;
  resolved_[key] = out;
  return out;
}

Vec3 Config::get_vec3(const std::string& key, const Vec3& fallback) {
  const std::string* v = lookup(key);
  Vec3 out = fallback;
  if (v) {
    const auto toks = split_numbers(*v);
    if (toks.size() != 3) throw ConfigError(key + ": expected three numbers, got '" + *v + "'");
    for (int i = 0; i < 3; ++i) out[i] = parse_double(toks[static_cast<std::size_t>(i)], key);
  }
  resolved_[key] = format_double(out[0]) + ", " + format_double(out[1]) + ", " + format_double(out[2]);
  return out;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) {
  const std::string* v = lookup(key);
  std::vector<double> out = fallback;
  if (v) {
    out.clear();
    for (const auto& tok : split_numbers(*v)) out.push_back(parse_double(tok, key));
    if (out.empty()) throw ConfigError(key + ": empty list");
  }
  std::string text;
  for (std::size_t i = 0; i < out.size(); ++i) text += (i ? ", " : "") + format_double(out[i]);
  resolved_[key] = text;
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) out.push_back(key);
  return out;
}

void Config::write_resolved(const std::string& path) const {
  std::ofstream f = open_out(path);
  f << "# resolved configuration (defaults included)\n";
  for (const auto& [key, value] : resolved_) f << key << " = " << value << "\n";
}

const std::vector<std::string> kSeriesColumns = {
    "step",         "t",       "energy",  "e_exchange", "e_zeeman", "e_pi",        "norm_dev_max",
    "energy_residual", "mx_avg", "my_avg", "mz_avg",     "sweeps",   "wtime_total", "wtime_stray"};

void write_series_csv(std::ostream& out, const DiagnosticsSeries& series) {
  for (std::size_t i = 0; i < kSeriesColumns.size(); ++i) out << (i ? "," : "") << kSeriesColumns[i];
  out << "\n" << std::setprecision(17);
  for (const auto& r : series) {
    out << r.step << ',' << r.t << ',' << r.energy.total() << ',' << r.energy.exchange << ','
        << r.energy.zeeman << ',' << r.energy.pi << ',' << r.norm_dev_max << ',' << r.energy_residual
        << ',' << r.m_avg[0] << ',' << r.m_avg[1] << ',' << r.m_avg[2] << ',' << r.sweeps << ','
        << r.wtime_total << ',' << r.wtime_stray << "\n";
  }
}

void write_series_csv(const std::string& path, const DiagnosticsSeries& series) {
  std::ofstream f = open_out(path);
  write_series_csv(f, series);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

DiagnosticsSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("series CSV: empty input");
  std::string expected;
  for (std::size_t i = 0; i < kSeriesColumns.size(); ++i) expected += (i ? "," : "") + kSeriesColumns[i];
  if (trim(line) != expected) throw std::runtime_error("series CSV: unexpected header '" + line + "'");
  DiagnosticsSeries out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    std::istringstream is(line);
    for (std::string cell; std::getline(is, cell, ',');) {
      try {
        v.push_back(parse_double(cell, "series CSV line " + std::to_string(lineno)));
      } catch (const ConfigError& e) {
        throw std::runtime_error(e.what());
      }
    }
    if (v.size() != kSeriesColumns.size())
      throw std::runtime_error("series CSV line " + std::to_string(lineno) + ": wrong number of columns");
    DiagnosticsRecord r;
    r.step = static_cast<int>(v[0]);
    r.t = v[1];
    r.energy.exchange = v[3];
    r.energy.zeeman = v[4];
    r.energy.pi = v[5];
    r.norm_dev_max = v[6];
    r.energy_residual = v[7];
    r.m_avg = Vec3(v[8], v[9], v[10]);
    r.sweeps = static_cast<int>(v[11]);
    r.wtime_total = v[12];
    r.wtime_stray = v[13];
    out.push_back(r);
  }
  return out;
}

DiagnosticsSeries read_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_series_csv(f);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n" << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void write_vtk(std::ostream& out, const TetMesh& mesh, const NodalVectorField& m, const std::string& title) {
  if (m.size() != mesh.num_nodes()) throw std::invalid_argument("write_vtk: field size does not match mesh");
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& x : mesh.vertices()) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  out << "CELLS " << mesh.num_elements() << ' ' << 5 * mesh.num_elements() << '\n';
  for (const auto& t : mesh.tets()) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << "10\n";
  out << "POINT_DATA " << mesh.num_nodes() << "\nVECTORS m double\n";
  for (std::size_t i = 0; i < m.size(); ++i) out << m[i][0] << ' ' << m[i][1] << ' ' << m[i][2] << '\n';
}

void write_vtk(const std::string& path, const TetMesh& mesh, const NodalVectorField& m, const std::string& title) {
  std::ofstream f = open_out(path);
  write_vtk(f, mesh, m, title);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace llg
