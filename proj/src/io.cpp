#include "cfg/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cfg {

namespace {

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, long line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("invalid number '" + s + "'", line);
  return v;
}

long parse_long(const std::string& s, long line) {
  long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("invalid integer '" + s + "'", line);
  return v;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

void write_snapshots(const std::string& path, const std::vector<Snapshot>& snapshots) {
  auto out = open_out(path);
  const Eigen::Index d = snapshots.empty() ? 0 : snapshots.front().positions.rows();
  out << "iter,particle";
  for (Eigen::Index k = 0; k < d; ++k) out << ",x" << k;
  out << '\n';
  for (const Snapshot& s : snapshots) {
    for (Eigen::Index i = 0; i < s.positions.cols(); ++i) {
      out << s.iter << ',' << i;
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(s.positions(k, i));
      out << '\n';
    }
  }
}

std::vector<Snapshot> read_snapshots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "iter" || header[1] != "particle") {
    throw ParseError("expected header iter,particle,x0,...", 1);
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (header[static_cast<std::size_t>(k + 2)] != "x" + std::to_string(k)) {
      throw ParseError("unexpected column '" + header[static_cast<std::size_t>(k + 2)] + "'", 1);
    }
  }
  std::vector<Snapshot> snaps;
  std::vector<std::vector<double>> cols;  // columns of the snapshot being read
  long current_iter = 0;
  auto flush = [&] {
    if (cols.empty()) return;
    Points p(d, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      for (Eigen::Index k = 0; k < d; ++k) p(k, static_cast<Eigen::Index>(i)) = cols[i][static_cast<std::size_t>(k)];
    }
    snaps.push_back({current_iter, std::move(p)});
    cols.clear();
  };
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       lineno);
    }
    const long iter = parse_long(cells[0], lineno);
    const long particle = parse_long(cells[1], lineno);
    if (!cols.empty() && iter != current_iter) flush();
    if (cols.empty()) current_iter = iter;
    if (particle != static_cast<long>(cols.size())) {
      throw ParseError("particle index " + std::to_string(particle) + " out of sequence", lineno);
    }
    std::vector<double> row(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) row[static_cast<std::size_t>(k)] = parse_double(cells[static_cast<std::size_t>(k + 2)], lineno);
    cols.push_back(std::move(row));
  }
  flush();
  if (snaps.empty()) throw ParseError("no particle rows", lineno);
  return snaps;
}

Points read_last_snapshot(const std::string& path) { return read_snapshots(path).back().positions; }

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  auto out = open_out(path);
  out << "iter,rsd_loss,ratio_out,w2_sinkhorn,energy\n";
  for (const MetricsRow& r : rows) {
    out << r.iter << ',' << opt(r.rsd_loss) << ',' << format_double(r.ratio_out) << ','
        << opt(r.w2_sinkhorn) << ',' << opt(r.energy) << '\n';
  }
}

void write_mse_rows(const std::string& path, const std::vector<MseRow>& rows, bool append) {
  auto out = open_out(path, append);
  if (!append) out << "N,h,trial,estimate,true_value,squared_error\n";
  for (const MseRow& r : rows) {
    out << r.n << ',' << format_double(r.h) << ',' << r.trial << ',' << format_double(r.estimate)
        << ',' << format_double(r.true_value) << ',' << format_double(r.squared_error) << '\n';
  }
}

}  // namespace cfg
