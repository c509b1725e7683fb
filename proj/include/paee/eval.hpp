#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/rng.hpp"

namespace paee {

// ---------------------------------------------------------------------------
// Metrics

inline double rmse(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw LengthMismatch("rmse needs equal non-empty lengths");
  }
  double s = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - pred[i];
    s += e * e;
  }
  return std::sqrt(s / (double)truth.size());
}

inline double r2(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw LengthMismatch("r2 needs equal non-empty lengths");
  }
  double mean = 0;
  for (double v : truth) mean += v;
  mean /= (double)truth.size();
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot <= 0) throw ZeroVariance("r2 undefined for constant truth");
  return 1.0 - ss_res / ss_tot;
}

// r2 that reports NaN instead of throwing when the truth series is constant
// or too short; used for report columns where a window may hold one bin.
inline double r2_or_nan(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  try {
    return r2(truth, pred);
  } catch (const ZeroVariance&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// ---------------------------------------------------------------------------
// Student-t tail probability via the regularized incomplete beta function

namespace detail {

inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double betai(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value of a t statistic with the given degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  if (dof <= 0) throw NonPositiveInput("degrees of freedom must be positive");
  return detail::betai(dof / 2.0, 0.5, dof / (dof + t * t));
}

struct TTestResult {
  double t = 0;
  double p = 1;
  size_t n = 0;
};

// Paired two-sided t-test; differences use the sample (n-1) standard deviation.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LengthMismatch("paired t-test needs equal lengths");
  const size_t n = a.size();
  if (n < 2) throw DegenerateDifferences("paired t-test needs >=2 pairs");
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0;
  for (double v : d) mean += v;
  mean /= (double)n;
  double ss = 0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (double)(n - 1));
  if (!(sd > 0)) throw DegenerateDifferences("differences have zero variance");
  TTestResult r;
  r.n = n;
  r.t = mean / (sd / std::sqrt((double)n));
  r.p = student_t_two_sided_p(r.t, (double)(n - 1));
  return r;
}

// ---------------------------------------------------------------------------
// Window aggregation of evaluation series

struct EvalSeries {
  std::vector<double> t;       // breath timestamps, increasing
  std::vector<double> y_true;  // kcal/min
  std::vector<double> y_pred;
};

struct AggSeries {
  std::vector<double> t;  // bin starts (or breath times for window 0)
  std::vector<double> y_true;
  std::vector<double> y_pred;
};

// Mean-aggregates both series into shared wall-clock bins aligned to the
// recording epoch. window_sec <= 0 means per-breath (identity). A shared bin
// is emitted only when it holds at least one sample, so bins empty in either
// series are dropped from both.
inline AggSeries aggregate_eval(const EvalSeries& s, double window_sec) {
  AggSeries out;
  if (window_sec <= 0) {
    out.t = s.t;
    out.y_true = s.y_true;
    out.y_pred = s.y_pred;
    return out;
  }
  std::map<int64_t, std::array<double, 3>> acc;  // bin -> (sum_true, sum_pred, count)
  for (size_t i = 0; i < s.t.size(); ++i) {
    auto& slot = acc[(int64_t)std::floor(s.t[i] / window_sec)];
    slot[0] += s.y_true[i];
    slot[1] += s.y_pred[i];
    slot[2] += 1;
  }
  for (const auto& [k, slot] : acc) {
    out.t.push_back((double)k * window_sec);
    out.y_true.push_back(slot[0] / slot[2]);
    out.y_pred.push_back(slot[1] / slot[2]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LOSO fold construction

struct FoldSpec {
  std::string test;
  std::string val_indoor;   // indoor-only validation subject
  std::string val_outdoor;  // validation subject with outdoor data
  std::vector<std::string> train;
};

// One fold per subject. The validation pair (one indoor-only subject, one
// with outdoor data) is drawn with a seed that depends only on the shared
// seed and the test subject, so every model variant sees identical folds.
inline std::vector<FoldSpec> loso_folds(const std::vector<ParticipantProfile>& subjects,
                                        uint64_t seed) {
  if (subjects.size() < 4) throw InsufficientSubjects("LOSO needs at least 4 subjects");
  std::vector<const ParticipantProfile*> sorted;
  for (const auto& s : subjects) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const ParticipantProfile* a, const ParticipantProfile* b) { return a->id < b->id; });
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id) {
      throw InvalidConfig("duplicate participant id " + sorted[i]->id);
    }
  }

  std::vector<FoldSpec> folds;
  for (const auto* test : sorted) {
    std::vector<const ParticipantProfile*> indoor_pool, outdoor_pool;
    for (const auto* s : sorted) {
      if (s == test) continue;
      (s->has_outdoor ? outdoor_pool : indoor_pool).push_back(s);
    }
    if (indoor_pool.empty() || outdoor_pool.empty()) {
      throw InsufficientSubjects("fold for " + test->id +
                                 " needs both an indoor-only and a with-outdoor validator");
    }
    Rng rng(mix_seed(seed, "folds:" + test->id));
    FoldSpec f;
    f.test = test->id;
    f.val_indoor = indoor_pool[rng.below(indoor_pool.size())]->id;
    f.val_outdoor = outdoor_pool[rng.below(outdoor_pool.size())]->id;
    for (const auto* s : sorted) {
      if (s == test || s->id == f.val_indoor || s->id == f.val_outdoor) continue;
      f.train.push_back(s->id);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Fold reports

constexpr std::array<double, 6> kReportWindows = {0, 10, 30, 60, 300, 3600};

struct WindowMetrics {
  double window_sec = 0;  // 0 = per breath
  size_t n = 0;
  double rmse = 0;
  double r2 = 0;  // NaN when undefined for the window
};

struct FoldReport {
  std::string subject;
  size_t n_breaths = 0;
  double rmse = 0, r2 = 0;  // per breath, overall
  std::optional<double> in_rmse, in_r2;
  std::optional<double> out_rmse, out_r2;
  std::vector<WindowMetrics> windows;
  size_t best_epoch = 0;
  double best_val_mse = 0;
  double train_seconds = 0;
};

// Non-finite entries (e.g. R^2 of a constant window series) are skipped; the
// result is NaN only when nothing finite remains.
inline double median(std::vector<double> v) {
  if (v.empty()) throw LengthMismatch("median of empty list");
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace paee
