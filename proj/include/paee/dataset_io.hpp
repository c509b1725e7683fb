#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "paee/data_io.hpp"
#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/experiment.hpp"

namespace paee {

// Layout: <dir>/participants.csv plus one directory per subject id holding
// accel_wrist.csv, accel_ankle.csv, breaths.csv, and optional annotations.csv.

inline void write_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  write_participants_csv(dir + "/participants.csv", ds.profiles());
  for (const auto& rec : ds.recordings) {
    const std::string sub = dir + "/" + rec.profile.id;
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub + ": " + ec.message());
    write_accel_csv(sub + "/accel_wrist.csv", rec.wrist);
    write_accel_csv(sub + "/accel_ankle.csv", rec.ankle);
    write_breath_csv(sub + "/breaths.csv", rec.breaths);
    if (!rec.annotations.empty()) {
      write_annotations_csv(sub + "/annotations.csv", rec.annotations);
    }
  }
}

// Loads a dataset tree as stored. Timestamps are kept untouched; callers that
// ingest recordings with differing stream epochs apply align_recording
// explicitly. A sanity check still rejects non-overlapping streams. Without a
// participants.csv the roster is taken from the subject directories and the
// profiles are id-only stubs (usable by variants without the static branch).
inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  std::vector<ParticipantProfile> profiles;
  if (fs::exists(dir + "/participants.csv")) {
    profiles = parse_participants_csv(dir + "/participants.csv");
  } else {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_directory() && fs::exists(entry.path() / "accel_wrist.csv")) {
        ids.push_back(entry.path().filename().string());
      }
    }
    if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      ParticipantProfile p;
      p.id = id;
      profiles.push_back(std::move(p));
    }
  }
  if (profiles.empty()) throw IoError("no subjects found under " + dir);
  for (const auto& p : profiles) {
    const std::string sub = dir + "/" + p.id;
    Recording rec;
    rec.profile = p;
    rec.wrist = parse_accel_csv(sub + "/accel_wrist.csv", BodyLocation::Wrist);
    rec.ankle = parse_accel_csv(sub + "/accel_ankle.csv", BodyLocation::Ankle);
    rec.breaths = parse_breath_csv(sub + "/breaths.csv");
    if (fs::exists(sub + "/annotations.csv")) {
      rec.annotations = parse_annotations_csv(sub + "/annotations.csv");
    }
    if (rec.wrist.empty() || rec.ankle.empty() || rec.breaths.empty()) {
      throw NoOverlap("subject " + p.id + " has an empty stream");
    }
    const double t0 = std::max({rec.wrist.t_begin(), rec.ankle.t_begin(), rec.breaths.front().t});
    const double t1 = std::min({rec.wrist.t_end(), rec.ankle.t_end(), rec.breaths.back().t});
    if (t1 <= t0) throw NoOverlap("subject " + p.id + " streams do not overlap");
    ds.recordings.push_back(std::move(rec));
  }
  return ds;
}

// Hours spent per intensity band, weighting each breath by the gap to the
// next one.
inline std::map<MetBand, double> met_band_hours(const Dataset& ds) {
  std::map<MetBand, double> hours = {{MetBand::Sedentary, 0},
                                     {MetBand::Light, 0},
                                     {MetBand::Moderate, 0},
                                     {MetBand::Vigorous, 0}};
  for (const auto& rec : ds.recordings) {
    for (size_t i = 0; i < rec.breaths.size(); ++i) {
      const double dt = i + 1 < rec.breaths.size()
                            ? rec.breaths[i + 1].t - rec.breaths[i].t
                            : (i > 0 ? rec.breaths[i].t - rec.breaths[i - 1].t : 0.0);
      const double mets = mets_from_eem(rec.breaths[i].eem, rec.profile.weight);
      hours[met_band(mets)] += dt / 3600.0;
    }
  }
  return hours;
}

}  // namespace paee
