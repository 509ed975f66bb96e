#pragma once

// Result rows written as CSV with a fixed column order:
//   run_id,method,axis,sweep_value,episodes,seeds,mean_asr,std_asr,mean_reward
// `seeds` lists every seed behind the row, separated by ';'. Empty axis and
// sweep_value mean the row is not part of a sweep.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace simsec::harness {

struct MetricRow {
  std::string run_id;
  std::string method;
  std::string axis;
  std::string sweep_value;
  int episodes = 0;
  std::vector<std::uint64_t> seeds;
  double mean_asr = 0.0;
  double std_asr = 0.0;
  double mean_reward = 0.0;
};

class MetricTable {
 public:
  static const std::vector<std::string>& columns();

  void add(MetricRow row) { rows_.push_back(std::move(row)); }
  void append(const MetricTable& other);
  const std::vector<MetricRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  void save(const std::string& path) const;

 private:
  std::vector<MetricRow> rows_;
};

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

}  // namespace simsec::harness
