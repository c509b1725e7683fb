#include <cmath>
#include <map>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "paee/synth.hpp"

using namespace paee;

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = (double)x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("generator is reproducible and seed-sensitive") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.duration_sec = 240;
  cfg.seed = 77;
  auto a = generate_dataset(cfg);
  auto b = generate_dataset(cfg);
  REQUIRE(a.dataset.recordings.size() == 4);
  for (size_t s = 0; s < 4; ++s) {
    const auto& ra = a.dataset.recordings[s];
    const auto& rb = b.dataset.recordings[s];
    REQUIRE(ra.profile.id == rb.profile.id);
    REQUIRE(ra.profile.age == rb.profile.age);
    REQUIRE(ra.wrist.samples.size() == rb.wrist.samples.size());
    bool same = true;
    for (size_t i = 0; i < ra.wrist.samples.size(); ++i) {
      same = same && ra.wrist.samples[i].x == rb.wrist.samples[i].x &&
             ra.ankle.samples[i].y == rb.ankle.samples[i].y;
    }
    REQUIRE(same);
    REQUIRE(ra.breaths.size() == rb.breaths.size());
    for (size_t i = 0; i < ra.breaths.size(); ++i) {
      REQUIRE(ra.breaths[i].t == rb.breaths[i].t);
      REQUIRE(ra.breaths[i].eem == rb.breaths[i].eem);
    }
    REQUIRE(a.truth[s].eem_clean == b.truth[s].eem_clean);
  }

  cfg.seed = 78;
  auto c = generate_dataset(cfg);
  bool any_diff = false;
  const auto& sa = a.dataset.recordings[0].wrist.samples;
  const auto& sc = c.dataset.recordings[0].wrist.samples;
  for (size_t i = 0; i < std::min(sa.size(), sc.size()); ++i) {
    if (sa[i].x != sc[i].x) any_diff = true;
  }
  REQUIRE(any_diff);
}

TEST_CASE("noise-free zero-lag energy equals instantaneous demand") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.duration_sec = 300;
  cfg.noise_sd = 0.0;
  cfg.lag_tau = 1e-9;  // blend factor saturates at 1
  cfg.seed = 5;
  auto r = generate_dataset(cfg);
  for (size_t s = 0; s < r.truth.size(); ++s) {
    const auto& t = r.truth[s];
    REQUIRE(t.eem_clean.size() == t.demand.size());
    for (size_t k = 0; k < t.demand.size(); ++k) {
      // prev + 1.0*(d - prev) can land one ulp off d right after a switch
      REQUIRE_THAT(t.eem_clean[k], Catch::Matchers::WithinULP(t.demand[k], 2));
    }
    const auto& rec = r.dataset.recordings[s];
    REQUIRE(rec.breaths.size() == t.breath_clean.size());
    for (size_t i = 0; i < rec.breaths.size(); ++i) {
      const auto& br = rec.breaths[i];
      REQUIRE(br.eem == t.breath_clean[i]);
      // gas volumes are constructed to reproduce the energy value exactly
      REQUIRE_THAT(eem_from_weir(br.vo2 / 1000.0, br.vco2 / 1000.0),
                   Catch::Matchers::WithinAbs(br.eem, 1e-12));
      const size_t sec = std::min((size_t)br.t, t.demand.size() - 1);
      REQUIRE_THAT(br.eem, Catch::Matchers::WithinULP(t.demand[sec], 2));
    }
  }
}

TEST_CASE("wrist dispersion tracks intensity, window means do not") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.duration_sec = 1200;
  cfg.seed = 31;
  auto r = generate_dataset(cfg);
  for (size_t s = 0; s < r.dataset.recordings.size(); ++s) {
    const auto& rec = r.dataset.recordings[s];
    const auto& truth = r.truth[s];
    const double sr = rec.wrist.nominal_sr;
    const int win = 60;
    std::vector<double> sds, means, intens;
    for (int w = 0; (w + 1) * win <= (int)cfg.duration_sec; ++w) {
      const size_t lo = (size_t)(w * win * sr), hi = (size_t)((w + 1) * win * sr);
      double m = 0;
      for (size_t k = lo; k < hi; ++k) m += rec.wrist.samples[k].x;
      m /= double(hi - lo);
      double v = 0;
      for (size_t k = lo; k < hi; ++k) {
        const double d = rec.wrist.samples[k].x - m;
        v += d * d;
      }
      sds.push_back(std::sqrt(v / double(hi - lo)));
      means.push_back(m);
      double mi = 0;
      for (int k = w * win; k < (w + 1) * win; ++k) mi += truth.intensity[k];
      intens.push_back(mi / win);
    }
    const double r_sd = pearson(sds, intens);
    const double r_mean = std::fabs(pearson(means, intens));
    REQUIRE(r_sd > 0.9);
    REQUIRE(r_sd - r_mean > 0.3);
  }
}

TEST_CASE("average energy ranks activities by their intensity") {
  SynthConfig cfg;
  cfg.n_subjects = 6;
  cfg.duration_sec = 1200;
  cfg.seed = 19;
  auto r = generate_dataset(cfg);
  for (size_t s = 0; s < r.dataset.recordings.size(); ++s) {
    const auto& rec = r.dataset.recordings[s];
    const auto& truth = r.truth[s];
    std::map<Activity, std::pair<double, int>> by_act;
    for (const auto& a : rec.annotations) {
      const size_t sec = (size_t)a.t;
      auto& acc = by_act[a.label];
      acc.first += truth.eem_clean[sec];
      acc.second += 1;
    }
    auto mean_of = [&](Activity a) { return by_act.at(a).first / by_act.at(a).second; };
    REQUIRE(mean_of(Activity::Cycling) > mean_of(Activity::Walking));
    REQUIRE(mean_of(Activity::Walking) > mean_of(Activity::Sitting));
    REQUIRE(mean_of(Activity::Jumping) > mean_of(Activity::LyingDown));
  }
}

TEST_CASE("breath stream is strictly increasing at a plausible rate") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.duration_sec = 600;
  cfg.seed = 3;
  auto r = generate_dataset(cfg);
  for (const auto& rec : r.dataset.recordings) {
    REQUIRE(rec.breaths.size() > 50);
    for (size_t i = 1; i < rec.breaths.size(); ++i) {
      REQUIRE(rec.breaths[i].t > rec.breaths[i - 1].t);
    }
    REQUIRE(rec.breaths.back().t < cfg.duration_sec);
    const double span = rec.breaths.back().t - rec.breaths.front().t;
    const double rate = double(rec.breaths.size() - 1) / span;
    REQUIRE(rate > 0.17);
    REQUIRE(rate < 0.45);
    for (const auto& b : rec.breaths) {
      REQUIRE(b.vo2 > 0);
      REQUIRE(b.vco2 > 0);
      REQUIRE(b.eem >= 0);
    }
  }
}

TEST_CASE("profiles alternate sexes and split indoor versus outdoor") {
  SynthConfig cfg;
  cfg.n_subjects = 8;
  cfg.duration_sec = 240;
  cfg.seed = 1;
  auto r = generate_dataset(cfg);
  int n_outdoor = 0;
  for (size_t i = 0; i < 8; ++i) {
    const auto& p = r.dataset.recordings[i].profile;
    char want[8];
    std::snprintf(want, sizeof want, "s%02zu", i + 1);
    REQUIRE(p.id == want);
    REQUIRE(p.sex == (i % 2 == 0 ? Sex::Female : Sex::Male));
    REQUIRE(p.age >= 60);
    REQUIRE(p.age <= 85);
    REQUIRE_THAT(p.weight,
                 Catch::Matchers::WithinAbs(p.bmi * (p.height / 100) * (p.height / 100), 0.06));
    n_outdoor += p.has_outdoor ? 1 : 0;

    bool saw_outdoor_flag = false;
    for (const auto& a : r.dataset.recordings[i].annotations) {
      if (a.location_flag == LocationFlag::Outdoor) saw_outdoor_flag = true;
    }
    REQUIRE(saw_outdoor_flag == p.has_outdoor);
  }
  // 0.375 of 8 rounds to 3 indoor-only subjects
  REQUIRE(n_outdoor == 5);
}

TEST_CASE("accelerometer streams cover the session at the requested rate") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.duration_sec = 180;
  cfg.accel_sr = 50;
  cfg.seed = 9;
  auto r = generate_dataset(cfg);
  for (const auto& rec : r.dataset.recordings) {
    REQUIRE(rec.wrist.nominal_sr == 50);
    REQUIRE(rec.ankle.nominal_sr == 50);
    REQUIRE(rec.wrist.samples.size() == 180 * 50);
    REQUIRE(rec.ankle.samples.size() == 180 * 50);
    bool in_range = true;
    for (const auto& s : rec.wrist.samples) {
      in_range = in_range && std::fabs(s.x) < 8.0 && std::fabs(s.y) < 8.0 && std::fabs(s.z) < 8.0;
    }
    REQUIRE(in_range);
  }
}

TEST_CASE("generator rejects bad configurations") {
  SynthConfig cfg;
  cfg.n_subjects = 3;
  REQUIRE_THROWS_AS(generate_dataset(cfg), InsufficientSubjects);
  cfg.n_subjects = 4;
  cfg.indoor_only_fraction = 1.5;
  REQUIRE_THROWS_AS(generate_dataset(cfg), InvalidConfig);
  cfg.indoor_only_fraction = 0.375;
  cfg.lag_tau = 0;
  REQUIRE_THROWS_AS(generate_dataset(cfg), InvalidConfig);
  cfg.lag_tau = 8;
  cfg.duration_sec = 60;
  REQUIRE_THROWS_AS(generate_dataset(cfg), InvalidConfig);
  cfg.duration_sec = 600;
  cfg.noise_sd = -0.1;
  REQUIRE_THROWS_AS(generate_dataset(cfg), InvalidConfig);
}
