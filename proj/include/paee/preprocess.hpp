#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/matrix.hpp"

namespace paee {

enum class AggregationFn { Mean, SD, IQR, PD };

inline const char* to_string(AggregationFn fn) {
  switch (fn) {
    case AggregationFn::Mean: return "mean";
    case AggregationFn::SD: return "sd";
    case AggregationFn::IQR: return "iqr";
    case AggregationFn::PD: return "pd";
  }
  return "?";
}

inline AggregationFn aggregation_from_string(std::string_view s) {
  if (s == "mean") return AggregationFn::Mean;
  if (s == "sd") return AggregationFn::SD;
  if (s == "iqr") return AggregationFn::IQR;
  if (s == "pd") return AggregationFn::PD;
  throw InvalidConfig("unknown aggregation '" + std::string(s) + "'");
}

// Percentile by linear interpolation between closest ranks: rank h = (n-1)p/100.
inline double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyWindow("percentile of empty window");
  const double h = (double)(sorted.size() - 1) * p / 100.0;
  const size_t lo = (size_t)h;
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - (double)lo;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Collapses one resampling window to a scalar. SD is the population form
// (divide by n); IQR = P75-P25; PD = P95-P5.
inline double resample_window(std::span<const double> samples, AggregationFn fn) {
  if (samples.empty()) throw EmptyWindow("aggregation over empty window");
  const size_t n = samples.size();
  switch (fn) {
    case AggregationFn::Mean: {
      double s = 0;
      for (double v : samples) s += v;
      return s / (double)n;
    }
    case AggregationFn::SD: {
      double mean = 0, m2 = 0;
      size_t k = 0;
      for (double v : samples) {  // Welford
        ++k;
        const double d = v - mean;
        mean += d / (double)k;
        m2 += d * (v - mean);
      }
      return std::sqrt(m2 / (double)n);
    }
    case AggregationFn::IQR:
    case AggregationFn::PD: {
      std::vector<double> s(samples.begin(), samples.end());
      std::sort(s.begin(), s.end());
      if (fn == AggregationFn::IQR) return percentile_sorted(s, 75.0) - percentile_sorted(s, 25.0);
      return percentile_sorted(s, 95.0) - percentile_sorted(s, 5.0);
    }
  }
  throw EmptyWindow("unreachable");
}

// Integral bin-count check shared by resampling and sequence building.
inline size_t integral_bin_count(double span_sec, double sr) {
  const double raw = span_sec * sr;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-9 || rounded < 1) {
    throw NonIntegralBinCount("window of " + std::to_string(span_sec) +
                              " s at " + std::to_string(sr) + " Hz is not a whole bin count");
  }
  return (size_t)rounded;
}

// Partitions [t0,t1) into equal bins of width 1/sr and aggregates each axis
// per bin. Returns bins x 3 (x,y,z columns).
inline Matrix resample_stream(const AccelStream& stream, double target_sr, AggregationFn fn,
                              double t0, double t1) {
  if (t1 <= t0 || target_sr <= 0) throw NonPositiveInput("resample_stream needs t1>t0, sr>0");
  const size_t bins = integral_bin_count(t1 - t0, target_sr);
  Matrix out(bins, 3);
  const auto& smp = stream.samples;
  size_t i = std::lower_bound(smp.begin(), smp.end(), t0,
                              [](const AccelSample& a, double v) { return a.t < v; }) -
             smp.begin();
  std::vector<double> ax, ay, az;
  for (size_t b = 0; b < bins; ++b) {
    const double hi = t0 + (double)(b + 1) * (t1 - t0) / (double)bins;
    ax.clear(); ay.clear(); az.clear();
    while (i < smp.size() && (b + 1 == bins ? smp[i].t < t1 : smp[i].t < hi)) {
      ax.push_back(smp[i].x);
      ay.push_back(smp[i].y);
      az.push_back(smp[i].z);
      ++i;
    }
    if (ax.empty()) {
      throw EmptyWindow("no raw samples in resample bin " + std::to_string(b));
    }
    out(b, 0) = resample_window(ax, fn);
    out(b, 1) = resample_window(ay, fn);
    out(b, 2) = resample_window(az, fn);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Z-normalization

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  size_t channels() const { return mean.size(); }

  static NormStats identity(size_t channels) {
    NormStats s;
    s.mean.assign(channels, 0.0);
    s.std.assign(channels, 1.0);
    return s;
  }
};

// Population mean/std per channel over the training data.
inline NormStats znorm_fit(const std::vector<std::vector<double>>& channels) {
  NormStats out;
  for (size_t c = 0; c < channels.size(); ++c) {
    const auto& v = channels[c];
    if (v.size() < 2) {
      throw DegenerateChannel("channel " + std::to_string(c) + " has <2 values");
    }
    double mean = 0, m2 = 0;
    size_t k = 0;
    for (double x : v) {
      ++k;
      const double d = x - mean;
      mean += d / (double)k;
      m2 += d * (x - mean);
    }
    const double sd = std::sqrt(m2 / (double)v.size());
    if (!(sd > 0)) {
      throw DegenerateChannel("channel " + std::to_string(c) + " has zero variance");
    }
    out.mean.push_back(mean);
    out.std.push_back(sd);
  }
  return out;
}

inline double znorm_apply(double v, const NormStats& s, size_t channel) {
  return (v - s.mean[channel]) / s.std[channel];
}

// In-place per-column normalization of a bins x channels matrix.
inline void znorm_apply(Matrix& m, const NormStats& s) {
  if (m.cols() != s.channels()) throw ShapeMismatch("norm stats channel count");
  for (size_t r = 0; r < m.rows(); ++r) {
    double* p = m.row(r);
    for (size_t c = 0; c < m.cols(); ++c) p[c] = (p[c] - s.mean[c]) / s.std[c];
  }
}

// ---------------------------------------------------------------------------
// Label encoding

// Assigns integer codes alphabetically over the distinct labels it was fit on.
class LabelEncoder {
 public:
  static LabelEncoder fit(const std::vector<std::string>& labels) {
    LabelEncoder e;
    std::vector<std::string> vocab(labels);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    e.vocab_ = std::move(vocab);
    return e;
  }

  // Encoder over the full activity vocabulary; codes equal the Activity enum.
  static LabelEncoder full_vocabulary() {
    LabelEncoder e;
    for (auto n : activity_names()) e.vocab_.emplace_back(n);
    return e;
  }

  int encode(std::string_view label) const {
    auto it = std::lower_bound(vocab_.begin(), vocab_.end(), label);
    if (it == vocab_.end() || *it != label) {
      throw UnknownLabel("label '" + std::string(label) + "' not in vocabulary");
    }
    return (int)(it - vocab_.begin());
  }

  const std::string& decode(int code) const {
    if (code < 0 || (size_t)code >= vocab_.size()) {
      throw UnknownLabel("code " + std::to_string(code) + " out of vocabulary");
    }
    return vocab_[(size_t)code];
  }

  size_t n_classes() const { return vocab_.size(); }

 private:
  std::vector<std::string> vocab_;
};

inline std::vector<int> encode_labels(const std::vector<std::string>& labels) {
  auto enc = LabelEncoder::fit(labels);
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(enc.encode(l));
  return out;
}

// ---------------------------------------------------------------------------
// Target smoothing

struct TargetBin {
  double start = 0;    // seconds, bin covers [start, start + bin_width)
  double eem_mean = 0; // kcal/min
  int count = 0;       // source breaths in the bin
};

struct SmoothedTarget {
  std::vector<TargetBin> bins;  // time-ordered, empty bins omitted
  double bin_width = kTargetBinSec;
};

// Bins breaths into fixed-width intervals aligned to the recording epoch and
// averages eem per bin. Bins with no breaths are omitted.
inline SmoothedTarget smooth_target(const std::vector<BreathRecord>& breaths,
                                    double bin_width = kTargetBinSec) {
  if (bin_width <= 0) throw NonPositiveInput("bin width must be positive");
  SmoothedTarget out;
  out.bin_width = bin_width;
  std::map<int64_t, std::pair<double, int>> acc;  // bin index -> (sum, count)
  for (const auto& b : breaths) {
    const int64_t k = (int64_t)std::floor(b.t / bin_width);
    auto& slot = acc[k];
    slot.first += b.eem;
    slot.second += 1;
  }
  for (const auto& [k, slot] : acc) {
    out.bins.push_back({(double)k * bin_width, slot.first / slot.second, slot.second});
  }
  return out;
}

// Majority label over annotations overlapping [start, end); each 1 Hz
// annotation covers [t, t+1). Ties go to the lower integer code.
inline int mode_label_bin(const std::vector<ActivityAnnotation>& annotations,
                          double start, double end) {
  int votes[kNumActivityClasses] = {};
  bool any = false;
  for (const auto& a : annotations) {
    if (a.t + 1.0 <= start || a.t >= end) continue;
    ++votes[(int)a.label];
    any = true;
  }
  if (!any) throw EmptyWindow("no annotations overlap bin");
  int best = 0;
  for (int c = 1; c < kNumActivityClasses; ++c) {
    if (votes[c] > votes[best]) best = c;  // strict: ties keep the lower code
  }
  return best;
}

}  // namespace paee
