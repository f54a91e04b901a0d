#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cfg/engine.hpp"
#include "cfg/oracle.hpp"

namespace cfg {

/// Malformed input file; line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Shortest text with 17 significant digits; parses back to the same double.
std::string format_double(double v);

/// Header `iter,particle,x0,...,x{d-1}`, one row per particle per snapshot.
void write_snapshots(const std::string& path, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_snapshots(const std::string& path);

/// The rows of the last snapshot in a file.
Points read_last_snapshot(const std::string& path);

/// Header `iter,rsd_loss,ratio_out,w2_sinkhorn,energy`; absent values are blank.
void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows);

/// Header `N,h,trial,estimate,true_value,squared_error`.
void write_mse_rows(const std::string& path, const std::vector<MseRow>& rows, bool append);

}  // namespace cfg
