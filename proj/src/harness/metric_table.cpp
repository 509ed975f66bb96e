#include "simsec/harness/metric_table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simsec::harness {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& MetricTable::columns() {
  static const std::vector<std::string> cols{"run_id", "method",  "axis",    "sweep_value", "episodes",
                                             "seeds",  "mean_asr", "std_asr", "mean_reward"};
  return cols;
}

void MetricTable::append(const MetricTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void MetricTable::write_csv(std::ostream& out) const {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const MetricRow& r : rows_) {
    std::string seeds;
    for (std::size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
    out << csv_field(r.run_id) << ',' << csv_field(r.method) << ',' << csv_field(r.axis) << ','
        << csv_field(r.sweep_value) << ',' << r.episodes << ',' << seeds << ','
        << format_number(r.mean_asr) << ',' << format_number(r.std_asr) << ','
        << format_number(r.mean_reward) << '\n';
  }
}

std::string MetricTable::to_csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

void MetricTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metric table '" + path + "'");
  write_csv(out);
}

}  // namespace simsec::harness
