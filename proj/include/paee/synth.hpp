#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/experiment.hpp"
#include "paee/rng.hpp"

namespace paee {

// The generator encodes activity intensity in the accelerometer signal's
// dispersion: each axis is AR(1) band noise whose amplitude scales with
// intensity, riding on a constant gravity offset. Window means are therefore
// nearly constant while window spreads track intensity.
struct SynthConfig {
  size_t n_subjects = 8;
  double indoor_only_fraction = 0.375;
  uint64_t seed = 0;
  double duration_sec = 1200;
  double accel_sr = kDefaultAccelSr;

  double ar_alpha = 0.9;       // per-sample AR(1) coefficient at accel_sr
  double amp0 = 0.08, amp1 = 0.72;  // accel amplitude = amp0 + amp1 * intensity (g)

  double lag_tau = 8.0;        // metabolic lag time constant, seconds
  double noise_sd = 0.15;      // per-breath observation noise, kcal/min

  // Demand = base + gain*I + age_coef*(age-72.5) + height_coef*(height-172)
  //        + bmi_coef*(bmi-29) + male_offset*[male]
  double base = 1.2;
  double gain = 4.0;
  double age_coef = -0.02;
  double height_coef = 0.015;
  double bmi_coef = 0.05;
  double male_offset = 0.4;

  double breath_rate0 = 0.17, breath_rate1 = 0.28;  // Hz = rate0 + rate1 * I

  void validate() const {
    if (n_subjects < 4) throw InsufficientSubjects("need at least 4 subjects");
    if (indoor_only_fraction < 0 || indoor_only_fraction > 1) {
      throw InvalidConfig("indoor_only_fraction must be in [0,1]");
    }
    if (lag_tau <= 0) throw InvalidConfig("lag_tau must be positive");
    if (duration_sec < 120) throw InvalidConfig("duration must be at least 120 s");
    if (noise_sd < 0) throw InvalidConfig("noise_sd must be non-negative");
    if (accel_sr <= 0 || breath_rate0 <= 0) throw InvalidConfig("rates must be positive");
  }
};

struct SynthSegment {
  Activity activity = Activity::Sitting;
  double intensity = 0;  // in [0,1]
  int duration_sec = 0;
  bool outdoor = false;
};

// Latent series the generator retains for oracle tests.
struct SynthTruth {
  std::string subject;
  std::vector<double> intensity;  // per second
  std::vector<double> demand;     // per second, kcal/min
  std::vector<double> eem_clean;  // per second, lag-filtered demand
  std::vector<double> breath_clean;  // clean eem at each emitted breath
};

struct SynthResult {
  Dataset dataset;
  std::vector<SynthTruth> truth;
};

namespace detail {

struct ItineraryItem {
  Activity activity;
  double intensity;
  double fraction;
  bool outdoor_eligible;
};

inline const std::vector<ItineraryItem>& base_itinerary() {
  static const std::vector<ItineraryItem> items = {
      {Activity::LyingDown, 0.05, 0.10, false},
      {Activity::Sitting, 0.10, 0.12, false},
      {Activity::Standing, 0.20, 0.10, false},
      {Activity::Household, 0.45, 0.15, false},
      {Activity::Walking, 0.60, 0.18, true},
      {Activity::Cycling, 0.80, 0.18, true},
      {Activity::Jumping, 1.00, 0.05, false},
      {Activity::Sitting, 0.10, 0.12, false},
  };
  return items;
}

inline std::vector<SynthSegment> make_schedule(double total_sec, bool has_outdoor, Rng& rng) {
  std::vector<ItineraryItem> items = base_itinerary();
  rng.shuffle(items);
  std::vector<double> scaled;
  double sum = 0;
  for (const auto& it : items) {
    const double s = it.fraction * rng.uniform(0.8, 1.2);
    scaled.push_back(s);
    sum += s;
  }
  std::vector<SynthSegment> segs;
  int remaining = (int)total_sec;
  for (size_t i = 0; i < items.size(); ++i) {
    const int left_after = (int)(items.size() - 1 - i);
    int dur = i + 1 == items.size() ? remaining
                                    : (int)std::lround(scaled[i] / sum * total_sec);
    dur = std::max(1, std::min(dur, remaining - left_after));
    segs.push_back({items[i].activity, items[i].intensity, dur,
                    has_outdoor && items[i].outdoor_eligible});
    remaining -= dur;
  }
  return segs;
}

inline ParticipantProfile make_profile(size_t index, Rng& rng) {
  ParticipantProfile p;
  char buf[8];
  std::snprintf(buf, sizeof buf, "s%02zu", index + 1);
  p.id = buf;
  p.sex = index % 2 == 0 ? Sex::Female : Sex::Male;
  p.age = std::round(rng.uniform(60.0, 85.0));
  p.height = std::round(p.sex == Sex::Female ? rng.uniform(152.0, 175.0)
                                             : rng.uniform(165.0, 190.0));
  p.bmi = std::round(rng.uniform(23.0, 35.0) * 10.0) / 10.0;
  p.weight = std::round(p.bmi * (p.height / 100.0) * (p.height / 100.0) * 10.0) / 10.0;
  return p;
}

inline AccelStream make_accel(BodyLocation loc, const std::vector<double>& intensity_1hz,
                              const SynthConfig& cfg, Rng& rng) {
  AccelStream s;
  s.location = loc;
  s.nominal_sr = cfg.accel_sr;
  const double gx = loc == BodyLocation::Wrist ? 0.05 : 0.10;
  const double gy = loc == BodyLocation::Wrist ? -0.20 : 0.10;
  const double gz = loc == BodyLocation::Wrist ? 0.95 : 0.97;
  const double alpha = cfg.ar_alpha;
  const double drive = std::sqrt(1.0 - alpha * alpha);
  double st[3] = {rng.normal(), rng.normal(), rng.normal()};
  const size_t n = (size_t)std::floor(cfg.duration_sec * cfg.accel_sr);
  s.samples.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = (double)k / cfg.accel_sr;
    const size_t sec = std::min((size_t)t, intensity_1hz.size() - 1);
    const double amp = cfg.amp0 + cfg.amp1 * intensity_1hz[sec];
    for (double& v : st) v = alpha * v + drive * rng.normal();
    auto clip = [](double v) { return std::clamp(v, -7.9, 7.9); };
    s.samples.push_back({t, clip(gx + amp * st[0]), clip(gy + amp * st[1]),
                         clip(gz + amp * st[2])});
  }
  return s;
}

}  // namespace detail

inline SynthResult generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const size_t n_indoor_only = (size_t)std::lround(cfg.indoor_only_fraction * (double)cfg.n_subjects);
  SynthResult out;
  for (size_t i = 0; i < cfg.n_subjects; ++i) {
    Rng rng(mix_seed(cfg.seed, "subject:" + std::to_string(i)));
    Recording rec;
    rec.profile = detail::make_profile(i, rng);
    rec.profile.has_outdoor = i >= n_indoor_only;

    std::vector<SynthSegment> segs =
        detail::make_schedule(cfg.duration_sec, rec.profile.has_outdoor, rng);

    SynthTruth truth;
    truth.subject = rec.profile.id;
    const size_t n_sec = (size_t)cfg.duration_sec;
    truth.intensity.reserve(n_sec);
    for (const auto& seg : segs) {
      for (int k = 0; k < seg.duration_sec; ++k) {
        truth.intensity.push_back(seg.intensity);
        ActivityAnnotation a;
        a.t = (double)rec.annotations.size();
        a.label = seg.activity;
        a.location_flag = seg.outdoor ? LocationFlag::Outdoor : LocationFlag::Indoor;
        rec.annotations.push_back(a);
      }
    }

    const ParticipantProfile& p = rec.profile;
    const double static_part = cfg.age_coef * (p.age - 72.5) +
                               cfg.height_coef * (p.height - 172.0) +
                               cfg.bmi_coef * (p.bmi - 29.0) +
                               (p.sex == Sex::Male ? cfg.male_offset : 0.0);
    const double blend = 1.0 - std::exp(-1.0 / cfg.lag_tau);
    for (size_t k = 0; k < truth.intensity.size(); ++k) {
      const double d = std::max(0.2, cfg.base + cfg.gain * truth.intensity[k] + static_part);
      truth.demand.push_back(d);
      if (k == 0) {
        truth.eem_clean.push_back(d);
      } else {
        const double prev = truth.eem_clean.back();
        truth.eem_clean.push_back(prev + blend * (d - prev));
      }
    }

    rec.wrist = detail::make_accel(BodyLocation::Wrist, truth.intensity, cfg, rng);
    rec.ankle = detail::make_accel(BodyLocation::Ankle, truth.intensity, cfg, rng);

    double t = 1.0 / (cfg.breath_rate0 + cfg.breath_rate1 * truth.intensity[0]);
    while (t < cfg.duration_sec - 0.5) {
      const size_t sec = std::min((size_t)t, truth.eem_clean.size() - 1);
      const double clean = truth.eem_clean[sec];
      const double eem = std::max(0.0, clean + (cfg.noise_sd > 0 ? rng.normal(0, cfg.noise_sd) : 0.0));
      const double rer = 0.8 + 0.1 * truth.intensity[sec];
      const double v_l = eem / (3.94 + 1.11 * rer);  // L/min solving the Weir form
      BreathRecord b;
      b.t = t;
      b.vo2 = 1000.0 * v_l;
      b.vco2 = rer * b.vo2;
      b.eem = eem;
      rec.breaths.push_back(b);
      truth.breath_clean.push_back(clean);
      const double rate = cfg.breath_rate0 + cfg.breath_rate1 * truth.intensity[sec];
      t += rng.uniform(0.9, 1.1) / rate;
    }

    out.dataset.recordings.push_back(std::move(rec));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace paee
