#pragma once

// RR-interval series, segmentations and the file formats shared by every
// detector and by the evaluation/classification stages.
//
// Changepoint index convention: index i (1 <= i <= N-1) marks the boundary
// between beat i-1 and beat i, i.e. beat i is the first beat of a new segment.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpd {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class RRSeries {
public:
  RRSeries() = default;

  /// Throws std::invalid_argument when an interval is non-positive or
  /// non-finite, or when truth indices are unsorted or outside [1, N-1].
  explicit RRSeries(std::vector<double> intervals,
                    std::optional<std::vector<std::size_t>> truth = std::nullopt,
                    std::string subject_id = {},
                    std::optional<std::string> label = std::nullopt);

  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }

  std::span<const double> intervals() const { return intervals_; }
  /// cum_time()[i] is the elapsed time at the end of beat i.
  std::span<const double> cum_time() const { return cum_time_; }
  double duration() const { return cum_time_.empty() ? 0.0 : cum_time_.back(); }
  double duration_hours() const { return duration() / 3600.0; }

  bool has_truth() const { return truth_.has_value(); }
  /// Empty span when the series carries no annotation.
  std::span<const std::size_t> truth() const;

  const std::string& subject_id() const { return subject_id_; }
  const std::optional<std::string>& label() const { return label_; }

  RRSeries with_intervals(std::vector<double> intervals) const;
  RRSeries with_meta(std::string subject_id, std::optional<std::string> label) const;

private:
  std::vector<double> intervals_;
  std::vector<double> cum_time_;
  std::optional<std::vector<std::size_t>> truth_;
  std::string subject_id_;
  std::optional<std::string> label_;
};

struct Segmentation {
  std::vector<std::size_t> boundaries;  // {0} ∪ changepoints ∪ {N}
  std::vector<double> segment_lengths;  // seconds

  std::size_t segment_count() const { return segment_lengths.size(); }
  std::vector<std::size_t> changepoints() const;
};

/// Z-score with population variance. A constant input maps to all zeros.
/// Throws std::invalid_argument("empty input") on an empty sequence.
std::vector<double> normalize(std::span<const double> values);
std::vector<double> normalize(const RRSeries& series);

Segmentation segments_from_changepoints(const RRSeries& series,
                                        std::span<const std::size_t> changepoints);

/// Throws std::invalid_argument unless indices are strictly increasing and
/// inside [1, n-1].
void check_changepoints(std::span<const std::size_t> indices, std::size_t n);

// RR CSV: header `beat_index,rr_seconds[,truth]`, truth being 0/1 flags.
RRSeries parse_rr_csv(std::string_view text, std::string subject_id = {});
RRSeries read_rr_csv(const std::string& path);
std::string format_rr_csv(const RRSeries& series);
void write_rr_csv(const RRSeries& series, const std::string& path);

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// Writes to a temporary sibling and renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

} // namespace cpd
