#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/matrix.hpp"
#include "paee/preprocess.hpp"

namespace paee {

inline double derive_sr(double seq_size, double window_sec) {
  if (seq_size <= 0 || window_sec <= 0) {
    throw NonPositiveInput("sequence size and window must be positive");
  }
  return seq_size / window_sec;
}

struct SequenceSpec {
  size_t seq_size = 0;
  double window_sec = 0;
  double sr = 0;  // seq_size / window_sec
  AggregationFn agg = AggregationFn::Mean;
  bool use_static = false;
  bool use_labels = false;

  static SequenceSpec make(size_t seq_size, double window_sec, AggregationFn agg,
                           bool use_static, bool use_labels) {
    SequenceSpec s;
    s.seq_size = seq_size;
    s.window_sec = window_sec;
    s.sr = derive_sr((double)seq_size, window_sec);
    s.agg = agg;
    s.use_static = use_static;
    s.use_labels = use_labels;
    return s;
  }

  // Temporal input width seen by the recurrent stack.
  size_t input_dim() const { return use_labels ? 7 : 6; }
};

constexpr size_t kStaticDim = 5;  // age, sex code, height, weight, bmi

struct ExampleMeta {
  std::string participant;
  double t = 0;  // target timestamp (window end), seconds
  LocationFlag location = LocationFlag::Indoor;
};

struct TrainingExample {
  Matrix accel;               // seq_size x 6: wrist xyz then ankle xyz
  std::vector<int> labels;    // seq_size codes when the label channel is on
  std::vector<double> stat;   // kStaticDim values when the static branch is on
  double target = 0;          // kcal/min
  ExampleMeta meta;
};

// Normalization statistics for everything a sequence carries. Target stats are
// tracked here too so a trained model can de-normalize its own outputs.
struct NormBundle {
  NormStats accel = NormStats::identity(6);
  NormStats stat = NormStats::identity(kStaticDim);
  NormStats target = NormStats::identity(1);
};

inline std::vector<double> static_vector(const ParticipantProfile& p) {
  return {p.age, p.sex == Sex::Male ? 1.0 : 0.0, p.height, p.weight, p.bmi};
}

namespace detail {

// Builds the example ending at target time ts, or returns false when the
// lookback window is not fully covered by the recording.
inline bool build_example_at(const Recording& rec, const SequenceSpec& spec,
                             const NormBundle& norm, double ts, double target,
                             TrainingExample& out) {
  const double lo = ts - spec.window_sec;
  const double accel_end = std::min(rec.wrist.t_end(), rec.ankle.t_end());
  if (lo < -1e-9 || ts > accel_end + 1e-9) return false;

  Matrix wrist = resample_stream(rec.wrist, spec.sr, spec.agg, lo, ts);
  Matrix ankle = resample_stream(rec.ankle, spec.sr, spec.agg, lo, ts);
  out.accel = Matrix(spec.seq_size, 6);
  for (size_t r = 0; r < spec.seq_size; ++r) {
    for (size_t c = 0; c < 3; ++c) {
      out.accel(r, c) = wrist(r, c);
      out.accel(r, c + 3) = ankle(r, c);
    }
  }
  znorm_apply(out.accel, norm.accel);

  out.labels.clear();
  if (spec.use_labels) {
    if (rec.annotations.empty()) {
      throw InvalidConfig("label channel requested but recording has no annotations");
    }
    out.labels.reserve(spec.seq_size);
    for (size_t b = 0; b < spec.seq_size; ++b) {
      const double blo = lo + (double)b * spec.window_sec / (double)spec.seq_size;
      const double bhi = lo + (double)(b + 1) * spec.window_sec / (double)spec.seq_size;
      out.labels.push_back(mode_label_bin(rec.annotations, blo, bhi));
    }
  }

  out.stat.clear();
  if (spec.use_static) {
    out.stat = static_vector(rec.profile);
    for (size_t c = 0; c < kStaticDim; ++c) {
      out.stat[c] = znorm_apply(out.stat[c], norm.stat, c);
    }
  }

  out.target = target;
  out.meta.participant = rec.profile.id;
  out.meta.t = ts;
  out.meta.location = location_at(rec.annotations, ts);
  return true;
}

}  // namespace detail

// One example per smoothed-target bin whose full lookback window fits in the
// recording; target timestamp is the bin start. Dropped targets are counted.
inline std::vector<TrainingExample> build_training_set(const Recording& rec,
                                                       const SequenceSpec& spec,
                                                       const NormBundle& norm,
                                                       size_t* dropped = nullptr) {
  SmoothedTarget st = smooth_target(rec.breaths);
  std::vector<TrainingExample> out;
  size_t skipped = 0;
  for (const auto& bin : st.bins) {
    TrainingExample ex;
    if (detail::build_example_at(rec, spec, norm, bin.start, bin.eem_mean, ex)) {
      out.push_back(std::move(ex));
    } else {
      ++skipped;
    }
  }
  if (dropped) *dropped = skipped;
  return out;
}

// One example per raw breath, target = that breath's eem. Same window rules.
inline std::vector<TrainingExample> build_eval_set(const Recording& rec,
                                                   const SequenceSpec& spec,
                                                   const NormBundle& norm,
                                                   size_t* dropped = nullptr) {
  std::vector<TrainingExample> out;
  size_t skipped = 0;
  for (const auto& b : rec.breaths) {
    TrainingExample ex;
    if (detail::build_example_at(rec, spec, norm, b.t, b.eem, ex)) {
      out.push_back(std::move(ex));
    } else {
      ++skipped;
    }
  }
  if (dropped) *dropped = skipped;
  return out;
}

}  // namespace paee
