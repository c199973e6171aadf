#include "cpdbench/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cpd {

void check_changepoints(std::span<const std::size_t> indices, std::size_t n) {
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 1 || indices[k] + 1 > n) {
      throw std::invalid_argument("changepoint index " + std::to_string(indices[k]) +
                                  " outside [1, " + std::to_string(n == 0 ? 0 : n - 1) + "]");
    }
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw std::invalid_argument("changepoint indices must be strictly increasing");
    }
  }
}

RRSeries::RRSeries(std::vector<double> intervals, std::optional<std::vector<std::size_t>> truth,
                   std::string subject_id, std::optional<std::string> label)
    : intervals_(std::move(intervals)),
      truth_(std::move(truth)),
      subject_id_(std::move(subject_id)),
      label_(std::move(label)) {
  cum_time_.reserve(intervals_.size());
  double t = 0.0;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const double rr = intervals_[i];
    if (!std::isfinite(rr) || rr <= 0.0) {
      throw std::invalid_argument("interval " + std::to_string(i) +
                                  " must be positive and finite");
    }
    t += rr;
    cum_time_.push_back(t);
  }
  if (truth_) check_changepoints(*truth_, intervals_.size());
}

std::span<const std::size_t> RRSeries::truth() const {
  if (!truth_) return {};
  return *truth_;
}

RRSeries RRSeries::with_intervals(std::vector<double> intervals) const {
  if (intervals.size() != intervals_.size()) {
    throw std::invalid_argument("replacement intervals must keep the series length");
  }
  return RRSeries(std::move(intervals), truth_, subject_id_, label_);
}

RRSeries RRSeries::with_meta(std::string subject_id, std::optional<std::string> label) const {
  RRSeries copy = *this;
  copy.subject_id_ = std::move(subject_id);
  copy.label_ = std::move(label);
  return copy;
}

std::vector<std::size_t> Segmentation::changepoints() const {
  if (boundaries.size() < 2) return {};
  return {boundaries.begin() + 1, boundaries.end() - 1};
}

std::vector<double> normalize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty input");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);

  std::vector<double> out(values.size(), 0.0);
  if (!(sd > 0.0) || sd < 1e-300) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

std::vector<double> normalize(const RRSeries& series) {
  return normalize(series.intervals());
}

Segmentation segments_from_changepoints(const RRSeries& series,
                                        std::span<const std::size_t> changepoints) {
  const std::size_t n = series.size();
  check_changepoints(changepoints, n);

  Segmentation seg;
  seg.boundaries.reserve(changepoints.size() + 2);
  seg.boundaries.push_back(0);
  seg.boundaries.insert(seg.boundaries.end(), changepoints.begin(), changepoints.end());
  seg.boundaries.push_back(n);

  const auto cum = series.cum_time();
  auto elapsed = [&](std::size_t beats) { return beats == 0 ? 0.0 : cum[beats - 1]; };
  seg.segment_lengths.reserve(seg.boundaries.size() - 1);
  for (std::size_t k = 0; k + 1 < seg.boundaries.size(); ++k) {
    seg.segment_lengths.push_back(elapsed(seg.boundaries[k + 1]) - elapsed(seg.boundaries[k]));
  }
  return seg;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid number '" +
                     std::string(field) + "'");
  }
  return value;
}

} // namespace

RRSeries parse_rr_csv(std::string_view text, std::string subject_id) {
  std::vector<double> rr;
  std::vector<std::size_t> truth;
  bool with_truth = false;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() == 2 && fields[0] == "beat_index" && fields[1] == "rr_seconds") {
        with_truth = false;
      } else if (fields.size() == 3 && fields[0] == "beat_index" && fields[1] == "rr_seconds" &&
                 fields[2] == "truth") {
        with_truth = true;
      } else {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 'beat_index,rr_seconds[,truth]'");
      }
      header_seen = true;
      continue;
    }

    if (fields.size() != (with_truth ? 3u : 2u)) {
      throw ParseError("line " + std::to_string(line_no) + ": wrong number of fields");
    }
    const auto index = parse_number<std::size_t>(fields[0], line_no);
    if (index != rr.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": beat_index must count up from 0");
    }
    const auto value = parse_number<double>(fields[1], line_no);
    if (!std::isfinite(value) || value <= 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": rr_seconds must be positive");
    }
    if (with_truth) {
      const auto flag = parse_number<int>(fields[2], line_no);
      if (flag != 0 && flag != 1) {
        throw ParseError("line " + std::to_string(line_no) + ": truth must be 0 or 1");
      }
      if (flag == 1) {
        if (index == 0) throw ParseError("line " + std::to_string(line_no) + ": truth flag on beat 0");
        truth.push_back(index);
      }
    }
    rr.push_back(value);
  }
  if (!header_seen) throw ParseError("missing header");
  if (rr.empty()) throw ParseError("no data rows");

  std::optional<std::vector<std::size_t>> truth_opt;
  if (with_truth) truth_opt = std::move(truth);
  return RRSeries(std::move(rr), std::move(truth_opt), std::move(subject_id));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failed");
  return ss.str();
}

RRSeries read_rr_csv(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_rr_csv(text, std::filesystem::path(path).stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_rr_csv(const RRSeries& series) {
  std::string out = series.has_truth() ? "beat_index,rr_seconds,truth\n" : "beat_index,rr_seconds\n";
  const auto rr = series.intervals();
  const auto truth = series.truth();
  std::size_t next = 0;
  for (std::size_t i = 0; i < rr.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(rr[i]);
    if (series.has_truth()) {
      const bool flag = next < truth.size() && truth[next] == i;
      if (flag) ++next;
      out += flag ? ",1" : ",0";
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError(tmp + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path + ": rename failed: " + ec.message());
}

void write_rr_csv(const RRSeries& series, const std::string& path) {
  write_file_atomic(path, format_rr_csv(series));
}

} // namespace cpd
