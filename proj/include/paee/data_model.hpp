#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paee/error.hpp"

namespace paee {

constexpr double kAccelRangeG = 8.0;       // device measurement range
constexpr double kDefaultAccelSr = 83.0;   // Hz
constexpr double kTargetBinSec = 10.0;     // target smoothing bin width

// ---------------------------------------------------------------------------
// Domain types

struct AccelSample {
  double t = 0;  // seconds since recording epoch
  double x = 0, y = 0, z = 0;  // acceleration in g
};

enum class BodyLocation { Wrist, Ankle };

inline const char* to_string(BodyLocation loc) {
  return loc == BodyLocation::Wrist ? "wrist" : "ankle";
}

struct AccelStream {
  BodyLocation location = BodyLocation::Wrist;
  std::vector<AccelSample> samples;  // strictly increasing in t
  double nominal_sr = kDefaultAccelSr;

  bool empty() const { return samples.empty(); }
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

struct BreathRecord {
  double t = 0;      // seconds
  double vo2 = 0;    // ml/min
  double vco2 = 0;   // ml/min
  double eem = 0;    // kcal/min
};

enum class Sex { Female, Male };

struct ParticipantProfile {
  std::string id;
  double age = 0;       // years
  Sex sex = Sex::Female;
  double height = 0;    // cm
  double weight = 0;    // kg
  double bmi = 0;       // kg/m^2
  bool has_outdoor = false;
};

// Label codes are assigned alphabetically over the class names, so the enum
// values double as the encoded integers.
enum class Activity : int {
  Cycling = 0,
  Household = 1,
  Jumping = 2,
  LyingDown = 3,
  Sitting = 4,
  Standing = 5,
  Walking = 6,
};

constexpr int kNumActivityClasses = 7;

inline const std::array<std::string_view, kNumActivityClasses>& activity_names() {
  static const std::array<std::string_view, kNumActivityClasses> names = {
      "cycling", "household", "jumping", "lying_down",
      "sitting", "standing", "walking"};
  return names;
}

inline std::string_view to_string(Activity a) {
  return activity_names()[static_cast<int>(a)];
}

inline Activity activity_from_string(std::string_view name) {
  const auto& names = activity_names();
  for (int i = 0; i < kNumActivityClasses; ++i) {
    if (names[i] == name) return static_cast<Activity>(i);
  }
  throw UnknownLabel("unknown activity label: " + std::string(name));
}

enum class LocationFlag { Indoor, Outdoor };

struct ActivityAnnotation {
  double t = 0;  // seconds; 1 Hz labels, each covering [t, t+1)
  Activity label = Activity::Sitting;
  LocationFlag location_flag = LocationFlag::Indoor;
};

struct Recording {
  ParticipantProfile profile;
  AccelStream wrist;
  AccelStream ankle;
  std::vector<BreathRecord> breaths;
  std::vector<ActivityAnnotation> annotations;  // optional, 1 Hz
};

// ---------------------------------------------------------------------------
// Calorimetry

// Weir-type metabolic rate. Gas volumes in L/min, result in kcal/min.
inline double eem_from_weir(double vo2_l_min, double vco2_l_min) {
  if (vo2_l_min < 0 || vco2_l_min < 0) {
    throw NegativeGasVolume("negative gas volume in Weir input");
  }
  return 3.94 * vo2_l_min + 1.11 * vco2_l_min;
}

enum class MetBand { Sedentary, Light, Moderate, Vigorous };

inline const char* to_string(MetBand b) {
  switch (b) {
    case MetBand::Sedentary: return "sedentary";
    case MetBand::Light: return "light";
    case MetBand::Moderate: return "moderate";
    case MetBand::Vigorous: return "vigorous";
  }
  return "?";
}

// Intensity bands: sedentary < 1.5, light [1.5, 4), moderate [4, 6),
// vigorous >= 6.
inline MetBand met_band(double mets) {
  if (mets < 0 || !std::isfinite(mets)) throw NegativeInput("METs must be non-negative");
  if (mets < 1.5) return MetBand::Sedentary;
  if (mets < 4.0) return MetBand::Light;
  if (mets < 6.0) return MetBand::Moderate;
  return MetBand::Vigorous;
}

// 1 MET = 1 kcal/kg/h at rest.
inline double mets_from_eem(double eem_kcal_min, double weight_kg) {
  if (weight_kg <= 0) throw NonPositiveInput("weight must be positive");
  return eem_kcal_min * 60.0 / weight_kg;
}

// ---------------------------------------------------------------------------
// Stream alignment

// Trims wrist, ankle, breath, and annotation streams to the intersection of
// their time ranges and re-zeroes the epoch to the intersection start.
// Annotations are trimmed but do not drive the intersection.
inline Recording align_recording(const Recording& rec) {
  if (rec.wrist.empty() || rec.ankle.empty() || rec.breaths.empty()) {
    throw NoOverlap("alignment requires non-empty wrist, ankle, and breath streams");
  }
  const double t0 = std::max({rec.wrist.t_begin(), rec.ankle.t_begin(), rec.breaths.front().t});
  const double t1 = std::min({rec.wrist.t_end(), rec.ankle.t_end(), rec.breaths.back().t});
  if (t1 <= t0) throw NoOverlap("stream time ranges do not overlap");

  Recording out;
  out.profile = rec.profile;
  auto trim_stream = [&](const AccelStream& s) {
    AccelStream r;
    r.location = s.location;
    r.nominal_sr = s.nominal_sr;
    for (const auto& smp : s.samples) {
      if (smp.t < t0 || smp.t > t1) continue;
      r.samples.push_back({smp.t - t0, smp.x, smp.y, smp.z});
    }
    return r;
  };
  out.wrist = trim_stream(rec.wrist);
  out.ankle = trim_stream(rec.ankle);
  for (const auto& b : rec.breaths) {
    if (b.t < t0 || b.t > t1) continue;
    out.breaths.push_back({b.t - t0, b.vo2, b.vco2, b.eem});
  }
  for (const auto& a : rec.annotations) {
    // A 1 Hz annotation covers [t, t+1); keep any that overlap the window.
    if (a.t + 1.0 <= t0 || a.t > t1) continue;
    out.annotations.push_back({a.t - t0, a.label, a.location_flag});
  }
  return out;
}

// Location flag in effect at time t: the latest annotation at or before t.
// Falls back to the first annotation; Indoor when there are none.
inline LocationFlag location_at(const std::vector<ActivityAnnotation>& ann, double t) {
  if (ann.empty()) return LocationFlag::Indoor;
  auto it = std::upper_bound(ann.begin(), ann.end(), t,
                             [](double v, const ActivityAnnotation& a) { return v < a.t; });
  if (it == ann.begin()) return it->location_flag;
  return std::prev(it)->location_flag;
}

}  // namespace paee
