#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "paee/csv.hpp"
#include "paee/data_model.hpp"
#include "paee/error.hpp"

namespace paee {

namespace detail {

inline MalformedRow bad_row(const std::string& path, size_t line_no, const std::string& what) {
  return MalformedRow(path + ":" + std::to_string(line_no) + ": " + what);
}

inline double field_double(const std::string& path, size_t line_no,
                           const std::vector<std::string_view>& f, size_t idx) {
  auto v = csv::parse_double(f[idx]);
  if (!v) throw bad_row(path, line_no, "bad numeric field '" + std::string(f[idx]) + "'");
  return *v;
}

inline void expect_header(const std::string& path, csv::LineReader& rd,
                          std::string_view required_prefix) {
  std::string line;
  if (!rd.next(line)) throw MalformedRow(path + ": empty file, missing header");
  if (std::string_view(line).substr(0, required_prefix.size()) != required_prefix) {
    throw MalformedRow(path + ": expected header starting with '" +
                       std::string(required_prefix) + "', got '" + line + "'");
  }
}

}  // namespace detail

inline AccelStream parse_accel_csv(const std::string& path, BodyLocation location) {
  csv::LineReader rd(path);
  detail::expect_header(path, rd, "t,x,y,z");
  AccelStream out;
  out.location = location;
  std::string line;
  while (rd.next(line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 4) throw detail::bad_row(path, rd.line_no(), "expected 4 fields");
    AccelSample s;
    s.t = detail::field_double(path, rd.line_no(), f, 0);
    s.x = detail::field_double(path, rd.line_no(), f, 1);
    s.y = detail::field_double(path, rd.line_no(), f, 2);
    s.z = detail::field_double(path, rd.line_no(), f, 3);
    for (double a : {s.x, s.y, s.z}) {
      if (std::abs(a) > kAccelRangeG) {
        throw OutOfRange(path + ":" + std::to_string(rd.line_no()) +
                         ": acceleration beyond measurement range");
      }
    }
    if (!out.samples.empty() && s.t <= out.samples.back().t) {
      throw NonMonotonicTime(path + ":" + std::to_string(rd.line_no()) +
                             ": timestamps must be strictly increasing");
    }
    out.samples.push_back(s);
  }
  return out;
}

inline std::vector<BreathRecord> parse_breath_csv(const std::string& path) {
  csv::LineReader rd(path);
  detail::expect_header(path, rd, "t,vo2,vco2");
  std::vector<BreathRecord> out;
  std::string line;
  while (rd.next(line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 3 && f.size() != 4) {
      throw detail::bad_row(path, rd.line_no(), "expected 3 or 4 fields");
    }
    BreathRecord b;
    b.t = detail::field_double(path, rd.line_no(), f, 0);
    b.vo2 = detail::field_double(path, rd.line_no(), f, 1);
    b.vco2 = detail::field_double(path, rd.line_no(), f, 2);
    if (b.vo2 < 0 || b.vco2 < 0) {
      throw NegativeGasVolume(path + ":" + std::to_string(rd.line_no()) +
                              ": negative gas volume");
    }
    // Gas columns are ml/min; the Weir constants are per liter.
    b.eem = f.size() == 4 ? detail::field_double(path, rd.line_no(), f, 3)
                          : eem_from_weir(b.vo2 / 1000.0, b.vco2 / 1000.0);
    if (!out.empty() && b.t <= out.back().t) {
      throw NonMonotonicTime(path + ":" + std::to_string(rd.line_no()) +
                             ": timestamps must be strictly increasing");
    }
    out.push_back(b);
  }
  if (out.empty()) std::fprintf(stderr, "warning: %s contains no breath rows\n", path.c_str());
  return out;
}

inline std::vector<ParticipantProfile> parse_participants_csv(const std::string& path) {
  csv::LineReader rd(path);
  detail::expect_header(path, rd, "id,age,sex,height_cm,weight_kg,bmi");
  std::vector<ParticipantProfile> out;
  std::string line;
  while (rd.next(line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 6 && f.size() != 7) {
      throw detail::bad_row(path, rd.line_no(), "expected 6 or 7 fields");
    }
    ParticipantProfile p;
    p.id = std::string(f[0]);
    if (p.id.empty()) throw detail::bad_row(path, rd.line_no(), "empty participant id");
    p.age = detail::field_double(path, rd.line_no(), f, 1);
    if (f[2] == "F") p.sex = Sex::Female;
    else if (f[2] == "M") p.sex = Sex::Male;
    else throw detail::bad_row(path, rd.line_no(), "sex must be F or M");
    p.height = detail::field_double(path, rd.line_no(), f, 3);
    p.weight = detail::field_double(path, rd.line_no(), f, 4);
    p.bmi = detail::field_double(path, rd.line_no(), f, 5);
    if (f.size() == 7) {
      if (f[6] == "1" || f[6] == "true") p.has_outdoor = true;
      else if (f[6] == "0" || f[6] == "false") p.has_outdoor = false;
      else throw detail::bad_row(path, rd.line_no(), "has_outdoor must be 0/1/true/false");
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<ActivityAnnotation> parse_annotations_csv(const std::string& path) {
  csv::LineReader rd(path);
  detail::expect_header(path, rd, "t,label,location");
  std::vector<ActivityAnnotation> out;
  std::string line;
  while (rd.next(line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 3) throw detail::bad_row(path, rd.line_no(), "expected 3 fields");
    ActivityAnnotation a;
    a.t = detail::field_double(path, rd.line_no(), f, 0);
    a.label = activity_from_string(f[1]);
    if (f[2] == "indoor") a.location_flag = LocationFlag::Indoor;
    else if (f[2] == "outdoor") a.location_flag = LocationFlag::Outdoor;
    else throw detail::bad_row(path, rd.line_no(), "location must be indoor or outdoor");
    if (!out.empty() && a.t <= out.back().t) {
      throw NonMonotonicTime(path + ":" + std::to_string(rd.line_no()) +
                             ": timestamps must be strictly increasing");
    }
    out.push_back(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writers (round-trip exact: doubles printed shortest-form, reparse bit-equal)

inline void write_accel_csv(const std::string& path, const AccelStream& s) {
  std::string buf = "t,x,y,z\n";
  for (const auto& smp : s.samples) {
    buf += csv::format_double(smp.t);
    buf += ',';
    buf += csv::format_double(smp.x);
    buf += ',';
    buf += csv::format_double(smp.y);
    buf += ',';
    buf += csv::format_double(smp.z);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

inline void write_breath_csv(const std::string& path, const std::vector<BreathRecord>& breaths) {
  std::string buf = "t,vo2,vco2,eem\n";
  for (const auto& b : breaths) {
    buf += csv::format_double(b.t);
    buf += ',';
    buf += csv::format_double(b.vo2);
    buf += ',';
    buf += csv::format_double(b.vco2);
    buf += ',';
    buf += csv::format_double(b.eem);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

inline void write_participants_csv(const std::string& path,
                                   const std::vector<ParticipantProfile>& ps) {
  std::string buf = "id,age,sex,height_cm,weight_kg,bmi,has_outdoor\n";
  for (const auto& p : ps) {
    buf += p.id;
    buf += ',';
    buf += csv::format_double(p.age);
    buf += ',';
    buf += (p.sex == Sex::Female ? 'F' : 'M');
    buf += ',';
    buf += csv::format_double(p.height);
    buf += ',';
    buf += csv::format_double(p.weight);
    buf += ',';
    buf += csv::format_double(p.bmi);
    buf += ',';
    buf += (p.has_outdoor ? '1' : '0');
    buf += '\n';
  }
  csv::write_file(path, buf);
}

inline void write_annotations_csv(const std::string& path,
                                  const std::vector<ActivityAnnotation>& ann) {
  std::string buf = "t,label,location\n";
  for (const auto& a : ann) {
    buf += csv::format_double(a.t);
    buf += ',';
    buf += to_string(a.label);
    buf += ',';
    buf += (a.location_flag == LocationFlag::Indoor ? "indoor" : "outdoor");
    buf += '\n';
  }
  csv::write_file(path, buf);
}

}  // namespace paee
