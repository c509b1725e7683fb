// Release gate: eleven checks covering gradients, aggregation, optimizer,
// fold construction, end-to-end learning on the synthetic oracle, statistics,
// and command-line determinism. Prints one PASS/FAIL line per check and exits
// nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "paee/experiment.hpp"
#include "paee/nn_serialize.hpp"
#include "paee/synth.hpp"

using namespace paee;

namespace {

// Gate tolerances and budgets. Frozen; a change here is a contract change.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr double kGradBudgetSec = 60.0;
constexpr int kGradModels = 50;
constexpr int kAggWindows = 10000;
constexpr double kAggTol = 1e-12;
constexpr double kAdamTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kSigLevel = 0.05;
constexpr double kBreathR2Floor = 0.60;
constexpr double kMinuteR2Floor = 0.75;
constexpr double kTrainBudgetSec = 900.0;

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%2d] %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double now_sec() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// 1. gradient correctness on randomized small models

Matrix random_matrix(Rng& rng, size_t r, size_t c) {
  Matrix m(r, c);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void check_gradients() {
  Rng rng(20260822);
  const double t0 = now_sec();
  double worst = 0;
  size_t total_params = 0;
  bool pass = true;
  std::string why;

  for (int it = 0; it < kGradModels && pass; ++it) {
    const bool labels = it % 2 == 1;
    const bool with_static = it % 3 != 0;
    const size_t T = 1 + rng.below(8);
    ModelConfig cfg;
    cfg.input_dim = labels ? 7 : 6;
    cfg.static_dim = with_static ? kStaticDim : 0;
    cfg.hidden = {1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8)};
    cfg.static_hidden = 1 + rng.below(8);
    cfg.head_hidden = {1 + rng.below(8), 1 + rng.below(8)};
    cfg.dropout_p = 0.0;

    HybridModel model = init_params(cfg, rng.next_u64());
    // move off the exact ReLU kinks that zero-filled biases sit on
    visit_params(model, [&](Matrix& m) {
      for (size_t i = 0; i < m.size(); ++i) m.data()[i] += rng.normal() * 0.05;
    });

    const size_t B = 1 + rng.below(3);
    std::vector<TrainingExample> data(B);
    std::vector<size_t> idx;
    for (size_t b = 0; b < B; ++b) {
      data[b].accel = random_matrix(rng, T, 6);
      if (labels) {
        for (size_t t = 0; t < T; ++t) data[b].labels.push_back((int)rng.below(7));
      }
      if (with_static) {
        for (size_t c = 0; c < kStaticDim; ++c) data[b].stat.push_back(rng.normal());
      }
      data[b].target = rng.normal();
      idx.push_back(b);
    }
    Batch batch = make_batch(data, idx, cfg);

    Rng fwd(0);
    ModelCache cache;
    Matrix pred = model_forward(model, batch, true, fwd, &cache);
    Matrix dpred;
    mse_loss(pred, batch.target, &dpred);
    HybridModel grads = model_backward(model, cache, dpred);

    auto loss_at = [&](const HybridModel& mm) {
      Rng r(0);
      Matrix p = model_forward(mm, batch, true, r, nullptr);
      return mse_loss(p, batch.target, nullptr);
    };

    HybridModel probe = model;
    std::vector<Matrix*> pv;
    std::vector<const Matrix*> gv;
    visit_params(probe, [&](Matrix& m) { pv.push_back(&m); });
    visit_params(grads, [&](const Matrix& m) { gv.push_back(&m); });
    for (size_t m = 0; m < pv.size() && pass; ++m) {
      for (size_t i = 0; i < pv[m]->size() && pass; ++i) {
        double& th = pv[m]->data()[i];
        const double keep = th;
        th = keep + kGradEps;
        const double lp = loss_at(probe);
        th = keep - kGradEps;
        const double lm = loss_at(probe);
        th = keep;
        const double num = (lp - lm) / (2 * kGradEps);
        const double ana = gv[m]->data()[i];
        const double err =
            std::fabs(ana - num) / std::max({std::fabs(ana), std::fabs(num), 1e-4});
        worst = std::max(worst, err);
        ++total_params;
        if (err > kGradRelTol) {
          pass = false;
          why = fmt("model %d param block %zu elem %zu: analytic %.3e vs numeric %.3e",
                    it, m, i, ana, num);
        }
      }
    }
  }
  const double dt = now_sec() - t0;
  if (pass && dt >= kGradBudgetSec) {
    pass = false;
    why = fmt("runtime %.1f s over %.0f s budget", dt, kGradBudgetSec);
  }
  report(1, pass,
         pass ? fmt("gradients: %d models, %zu parameters, max rel err %.2e, %.1f s",
                    kGradModels, total_params, worst, dt)
              : "gradients: " + why);
}

// ---------------------------------------------------------------------------
// 2. window aggregators against brute force

double brute_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (double)(v.size() - 1) * p / 100.0;
  const size_t lo = (size_t)std::floor(h);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - (double)lo) * (v[hi] - v[lo]);
}

void check_aggregators() {
  Rng rng(77001);
  double worst = 0;
  bool pass = true;
  std::string why;
  for (int it = 0; it < kAggWindows && pass; ++it) {
    const size_t n = 1 + rng.below(200);
    std::vector<double> w(n);
    const double scale = std::exp(rng.normal());
    const double shift = rng.normal() * 10;
    for (auto& v : w) v = rng.normal() * scale + shift;

    double mean = 0;
    for (double v : w) mean += v;
    mean /= (double)n;
    double var = 0;
    for (double v : w) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (double)n);
    const double iqr = brute_percentile(w, 75) - brute_percentile(w, 25);
    const double pd = brute_percentile(w, 95) - brute_percentile(w, 5);

    const struct {
      AggregationFn fn;
      double want;
      const char* name;
    } cases[] = {{AggregationFn::Mean, mean, "mean"},
                 {AggregationFn::SD, sd, "sd"},
                 {AggregationFn::IQR, iqr, "iqr"},
                 {AggregationFn::PD, pd, "pd"}};
    for (const auto& c : cases) {
      const double got = resample_window(w, c.fn);
      const double err = std::fabs(got - c.want);
      worst = std::max(worst, err);
      if (err > kAggTol) {
        pass = false;
        why = fmt("%s of %zu samples: got %.17g want %.17g", c.name, n, got, c.want);
        break;
      }
    }
  }
  report(2, pass,
         pass ? fmt("aggregators: %d windows x 4 functions, max abs err %.2e", kAggWindows,
                    worst)
              : "aggregators: " + why);
}

// ---------------------------------------------------------------------------
// 3. sampling-rate arithmetic

void check_sr() {
  const double a = derive_sr(480, 240);
  const double b = derive_sr(50, 120);
  const bool pass = a == 2.0 && b == 50.0 / 120.0 && std::fabs(b - 0.4167) < 1e-4;
  report(3, pass, fmt("derived rates: (480, 240 s) -> %.17g Hz, (50, 120 s) -> %.17g Hz", a, b));
}

// ---------------------------------------------------------------------------
// 4. Adam against a hand-stepped oracle

void check_adam() {
  bool pass = true;
  std::string why;
  double worst = 0;

  struct Case {
    AdamParams hp;
    double theta0;
    double (*grad)(double);
  };
  const Case cases[] = {
      {{0.001, 0.9, 0.999, 1e-8}, 0.0, [](double th) { return 2.0 * (th - 3.0); }},
      {{0.05, 0.7, 0.95, 1e-10}, 1.3, [](double th) { return 4.0 * th * th * th; }},
  };
  for (const auto& c : cases) {
    double th = c.theta0, m = 0, v = 0;
    double oth = c.theta0, om = 0, ov = 0, b1t = 1, b2t = 1;
    for (uint64_t t = 1; t <= 10; ++t) {
      const double g = c.grad(th);
      adam_update(th, m, v, t, g, c.hp);

      const double og = c.grad(oth);
      om = c.hp.beta1 * om + (1 - c.hp.beta1) * og;
      ov = c.hp.beta2 * ov + (1 - c.hp.beta2) * og * og;
      b1t *= c.hp.beta1;
      b2t *= c.hp.beta2;
      oth -= c.hp.lr * (om / (1 - b1t)) / (std::sqrt(ov / (1 - b2t)) + c.hp.eps);

      const double err = std::fabs(th - oth);
      worst = std::max(worst, err);
      if (err > kAdamTol) {
        pass = false;
        why = fmt("step %llu: %.17g vs oracle %.17g", (unsigned long long)t, th, oth);
      }
    }
  }

  // first step never exceeds the learning rate no matter the gradient scale
  AdamParams hp;
  for (double mag : {1e-12, 1e-6, 1.0, 1e6, 1e12}) {
    for (double sign : {1.0, -1.0}) {
      double th = 0, m = 0, v = 0;
      adam_update(th, m, v, 1, sign * mag, hp);
      if (std::fabs(th) > hp.lr * (1 + 1e-6)) {
        pass = false;
        why = fmt("first step %.3e for gradient %.3e exceeds lr", th, sign * mag);
      }
    }
  }
  report(4, pass,
         pass ? fmt("optimizer: 2 trajectories x 10 steps, max err %.2e; first-step bound holds",
                    worst)
              : "optimizer: " + why);
}

// ---------------------------------------------------------------------------
// 5. fold partition invariants

uint64_t fnv_ids(const std::set<std::string>& ids) {
  uint64_t h = 1469598103934665603ull;
  for (const auto& id : ids) {
    for (char c : id) {
      h ^= (uint8_t)c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  return h;
}

void check_folds() {
  bool pass = true;
  std::string why;
  int rosters = 0;
  for (int n = 4; n <= 31 && pass; ++n) {
    const int n_out = std::max(2, n / 3);
    std::vector<ParticipantProfile> subs;
    for (int i = 0; i < n; ++i) {
      ParticipantProfile p;
      p.id = fmt("p%02d", i);
      p.has_outdoor = i >= n - n_out;
      subs.push_back(p);
    }
    std::set<std::string> roster;
    std::set<std::string> outdoor;
    for (const auto& s : subs) {
      roster.insert(s.id);
      if (s.has_outdoor) outdoor.insert(s.id);
    }
    const uint64_t roster_sum = fnv_ids(roster);

    auto folds = loso_folds(subs, 424242);
    auto again = loso_folds(subs, 424242);
    if (folds.size() != (size_t)n) {
      pass = false;
      why = fmt("n=%d: %zu folds", n, folds.size());
      break;
    }
    std::set<std::string> tests;
    for (size_t f = 0; f < folds.size(); ++f) {
      const auto& fd = folds[f];
      tests.insert(fd.test);
      std::set<std::string> members = {fd.test, fd.val_indoor, fd.val_outdoor};
      if (members.size() != 3) {
        pass = false;
        why = fmt("n=%d fold %s: overlapping roles", n, fd.test.c_str());
        break;
      }
      bool dup = false;
      for (const auto& id : fd.train) dup = dup || !members.insert(id).second;
      // leakage checksum: every subject appears in exactly one role, so the
      // fold's combined membership hashes to the full roster
      if (dup || fnv_ids(members) != roster_sum) {
        pass = false;
        why = fmt("n=%d fold %s: membership != roster (leakage)", n, fd.test.c_str());
        break;
      }
      if (members.count(fd.test) != 1 || outdoor.count(fd.val_outdoor) != 1 ||
          outdoor.count(fd.val_indoor) != 0) {
        pass = false;
        why = fmt("n=%d fold %s: validator pools wrong", n, fd.test.c_str());
        break;
      }
      if (again[f].test != fd.test || again[f].val_indoor != fd.val_indoor ||
          again[f].val_outdoor != fd.val_outdoor || again[f].train != fd.train) {
        pass = false;
        why = fmt("n=%d fold %s: not deterministic", n, fd.test.c_str());
        break;
      }
    }
    if (pass && tests != roster) {
      pass = false;
      why = fmt("n=%d: some subject never tested", n);
    }
    ++rosters;
  }

  if (pass) {
    // refusal cases
    try {
      std::vector<ParticipantProfile> three(3);
      for (int i = 0; i < 3; ++i) three[i].id = fmt("p%d", i);
      loso_folds(three, 1);
      pass = false;
      why = "3-subject roster accepted";
    } catch (const InsufficientSubjects&) {
    }
    try {
      std::vector<ParticipantProfile> all_out(5);
      for (int i = 0; i < 5; ++i) {
        all_out[i].id = fmt("p%d", i);
        all_out[i].has_outdoor = true;
      }
      loso_folds(all_out, 1);
      pass = false;
      why = "roster without indoor-only validators accepted";
    } catch (const InsufficientSubjects&) {
    }
  }
  report(5, pass,
         pass ? fmt("folds: %d roster sizes, disjointness + coverage + pool membership + "
                    "leakage checksum",
                    rosters)
              : "folds: " + why);
}

// ---------------------------------------------------------------------------
// 6-8. learning runs on the synthetic oracle

struct RunScores {
  std::vector<double> breath_r2, minute_r2;
  double seconds = 0;
};

RunScores run_config(const Dataset& ds, ModelVariant v, AggregationFn agg, size_t seq,
                     double win, size_t epochs) {
  RunSettings rs;
  rs.spec = make_spec(seq, win, agg, v);
  rs.variant = v;
  rs.hidden = {16, 64, 16};
  rs.dropout_p = 0.2;
  rs.train.epochs = epochs;
  rs.train.batch_size = 96;
  rs.seed = 11;
  rs.workers = 1;
  const double t0 = now_sec();
  auto folds = run_loso(ds, rs);
  RunScores out;
  out.seconds = now_sec() - t0;
  for (const auto& f : folds) {
    out.breath_r2.push_back(f.report.r2);
    for (const auto& w : f.report.windows) {
      if (w.window_sec == 60.0) out.minute_r2.push_back(w.r2);
    }
  }
  return out;
}

Dataset oracle_dataset(bool strong_static) {
  SynthConfig sc;
  sc.n_subjects = 8;
  sc.duration_sec = 1200;
  sc.seed = 2026;
  if (strong_static) {
    // participant attributes carry a large share of the demand signal
    sc.age_coef = -0.04;
    sc.height_coef = 0.03;
    sc.bmi_coef = 0.10;
    sc.male_offset = 0.8;
  }
  return generate_dataset(sc).dataset;
}

void check_learning(const RunScores& c_run) {
  const double med_b = median(c_run.breath_r2);
  const double med_m = median(c_run.minute_r2);
  const bool pass = med_b >= kBreathR2Floor && med_m >= kMinuteR2Floor &&
                    c_run.seconds < kTrainBudgetSec;
  report(6, pass,
         fmt("learning: median per-breath R2 %.3f (>= %.2f), per-minute R2 %.3f (>= %.2f), "
             "%.0f s (< %.0f s), %zu folds",
             med_b, kBreathR2Floor, med_m, kMinuteR2Floor, c_run.seconds, kTrainBudgetSec,
             c_run.breath_r2.size()));
}

void check_dispersion_beats_mean(const RunScores& sd_run, const RunScores& mean_run) {
  bool pass = sd_run.breath_r2.size() >= 8;
  std::string detail;
  try {
    const auto t = paired_t_test(sd_run.breath_r2, mean_run.breath_r2);
    const double med_sd = median(sd_run.breath_r2);
    const double med_mean = median(mean_run.breath_r2);
    pass = pass && med_sd > med_mean && t.p < kSigLevel && t.t > 0;
    detail = fmt("dispersion vs mean: medians %.3f vs %.3f over %zu folds, t=%.2f p=%.4f",
                 med_sd, med_mean, sd_run.breath_r2.size(), t.t, t.p);
  } catch (const std::exception& e) {
    pass = false;
    detail = fmt("dispersion vs mean: %s", e.what());
  }
  report(7, pass, detail);
}

void check_static_benefit(const RunScores& id_run, const RunScores& plain_run) {
  bool pass = id_run.breath_r2.size() >= 8;
  std::string detail;
  try {
    const auto t = paired_t_test(id_run.breath_r2, plain_run.breath_r2);
    const double med_id = median(id_run.breath_r2);
    const double med_plain = median(plain_run.breath_r2);
    pass = pass && med_id > med_plain && t.p < kSigLevel && t.t > 0;
    detail = fmt("attributes vs none: medians %.3f vs %.3f over %zu folds, t=%.2f p=%.4f",
                 med_id, med_plain, id_run.breath_r2.size(), t.t, t.p);
  } catch (const std::exception& e) {
    pass = false;
    detail = fmt("attributes vs none: %s", e.what());
  }
  report(8, pass, detail);
}

// ---------------------------------------------------------------------------
// 9. metric and t-test oracles

void check_metric_oracles() {
  Rng rng(555);
  bool pass = true;
  std::string why;
  double worst = 0;
  for (int it = 0; it < 40 && pass; ++it) {
    const size_t n = 3 + rng.below(60);
    std::vector<double> y(n), p(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = rng.normal() * 2 + 1;
      p[i] = y[i] + rng.normal() * 0.7;
    }
    double se = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
      se += (y[i] - p[i]) * (y[i] - p[i]);
      my += y[i];
    }
    my /= (double)n;
    double st = 0;
    for (double v : y) st += (v - my) * (v - my);
    const double want_rmse = std::sqrt(se / (double)n);
    const double want_r2 = 1.0 - se / st;
    worst = std::max(worst, std::fabs(rmse(y, p) - want_rmse));
    worst = std::max(worst, std::fabs(r2(y, p) - want_r2));

    // paired t against the direct formula
    std::vector<double> d(n);
    double md = 0;
    for (size_t i = 0; i < n; ++i) {
      d[i] = y[i] - p[i];
      md += d[i];
    }
    md /= (double)n;
    double sd2 = 0;
    for (double v : d) sd2 += (v - md) * (v - md);
    sd2 /= (double)(n - 1);
    const double want_t = md / (std::sqrt(sd2) / std::sqrt((double)n));
    worst = std::max(worst, std::fabs(paired_t_test(y, p).t - want_t));
    if (worst > kMetricTol) {
      pass = false;
      why = fmt("iteration %d: max err %.3e", it, worst);
    }
  }

  // the worked example: differences 1,2,3,4 give t = sqrt(15)
  const std::vector<double> a = {2, 4, 6, 8}, b = {1, 2, 3, 4};
  const auto t = paired_t_test(a, b);
  if (std::fabs(t.t - std::sqrt(15.0)) > kMetricTol ||
      std::fabs(t.p - 0.030466291662171) > 1e-9) {
    pass = false;
    why = fmt("worked example: t=%.15g p=%.15g", t.t, t.p);
  }
  report(9, pass,
         pass ? fmt("metrics: 40 random vectors, max abs err %.2e; worked t example %.6f, "
                    "p %.6f",
                    worst, t.t, t.p)
              : "metrics: " + why);
}

// ---------------------------------------------------------------------------
// 10. command-line determinism

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return "<missing " + path + ">";
  return std::string(std::istreambuf_iterator<char>(f), {});
}

void check_cli_determinism() {
#ifndef PAEE_CLI_PATH
  report(10, false, "cli determinism: binary path not configured");
#else
  const std::string cli = PAEE_CLI_PATH;
  std::string root = "/tmp/paee_accept_XXXXXX";
  if (!mkdtemp(root.data())) {
    report(10, false, "cli determinism: mkdtemp failed");
    return;
  }
  bool pass = true;
  std::string why;
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0 && pass) {
      pass = false;
      why = fmt("command failed (%d): %s", rc, args.c_str());
    }
  };

  const std::string data = root + "/data";
  run("synth --out " + data + " --subjects 6 --duration 300 --seed 21");
  const std::string common = " --data " + data +
                             " --grid \"10,30,sd,GA;10,30,mean,GA\" --hidden 8,16,8"
                             " --epochs 2 --batch_size 64 --seed 9 --out ";
  run("sweep" + common + root + "/s1 --workers 1");
  run("sweep" + common + root + "/s2 --workers 1");
  run("sweep" + common + root + "/s4 --workers 4");

  int files = 0;
  if (pass) {
    for (const char* f :
         {"sweep_folds.csv", "sweep_summary.csv", "sweep_ttests.csv", "sweep_summary.txt"}) {
      const std::string a = slurp(root + "/s1/" + std::string(f));
      const std::string b = slurp(root + "/s2/" + std::string(f));
      const std::string c = slurp(root + "/s4/" + std::string(f));
      if (a.empty() || a.find("<missing") == 0) {
        pass = false;
        why = fmt("%s missing or empty", f);
        break;
      }
      if (a != b) {
        pass = false;
        why = fmt("%s differs between identical runs", f);
        break;
      }
      if (a != c) {
        pass = false;
        why = fmt("%s differs between 1-worker and 4-worker runs", f);
        break;
      }
      ++files;
    }
  }
  std::filesystem::remove_all(root);
  report(10, pass,
         pass ? fmt("cli determinism: %d report files byte-identical across reruns and "
                    "worker counts",
                    files)
              : "cli determinism: " + why);
#endif
}

// ---------------------------------------------------------------------------
// 11. evaluation window aggregation

void check_window_aggregation(const Dataset& ds) {
  bool pass = true;
  std::string why;

  // per-breath predictions on a real synthetic recording
  const Recording& rec = ds.recordings[0];
  Rng rng(8080);
  EvalSeries s;
  for (const auto& b : rec.breaths) {
    s.t.push_back(b.t);
    s.y_true.push_back(b.eem);
    s.y_pred.push_back(b.eem * 0.9 + 0.3 + rng.normal() * 0.2);
  }

  AggSeries ident = aggregate_eval(s, 0.0);
  if (ident.t != s.t || ident.y_true != s.y_true || ident.y_pred != s.y_pred) {
    pass = false;
    why = "breath window is not the identity";
  }

  if (pass) {
    std::map<int64_t, std::array<double, 3>> bins;
    for (size_t i = 0; i < s.t.size(); ++i) {
      auto& acc = bins[(int64_t)std::floor(s.t[i] / 60.0)];
      acc[0] += s.y_true[i];
      acc[1] += s.y_pred[i];
      acc[2] += 1;
    }
    AggSeries a = aggregate_eval(s, 60.0);
    if (a.t.size() != bins.size()) {
      pass = false;
      why = fmt("60 s binning: %zu bins vs oracle %zu", a.t.size(), bins.size());
    } else {
      size_t j = 0;
      for (const auto& [k, acc] : bins) {
        if (a.t[j] != (double)k * 60.0 || a.y_true[j] != acc[0] / acc[2] ||
            a.y_pred[j] != acc[1] / acc[2]) {
          pass = false;
          why = fmt("60 s bin %zu does not match the oracle exactly", j);
          break;
        }
        ++j;
      }
    }
  }
  report(11, pass,
         pass ? fmt("window aggregation: identity at breath level, %zu breaths; 60 s bins "
                    "exact",
                    s.t.size())
              : "window aggregation: " + why);
}

}  // namespace

int main() {
  std::printf("release gate: 11 checks\n");
  const double t0 = now_sec();

  check_gradients();
  check_aggregators();
  check_sr();
  check_adam();
  check_folds();

  Dataset d_plain = oracle_dataset(false);
  Dataset d_static = oracle_dataset(true);

  RunScores c6 = run_config(d_plain, ModelVariant::GA_ID, AggregationFn::SD, 50, 120, 8);
  check_learning(c6);

  RunScores a7 = run_config(d_plain, ModelVariant::GA, AggregationFn::SD, 50, 120, 8);
  RunScores b7 = run_config(d_plain, ModelVariant::GA, AggregationFn::Mean, 480, 240, 8);
  check_dispersion_beats_mean(a7, b7);

  RunScores c8 = run_config(d_static, ModelVariant::GA_ID, AggregationFn::SD, 50, 120, 16);
  RunScores a8 = run_config(d_static, ModelVariant::GA, AggregationFn::SD, 50, 120, 16);
  check_static_benefit(c8, a8);

  check_metric_oracles();
  check_cli_determinism();
  check_window_aggregation(d_plain);

  std::printf("%d/11 passed in %.0f s\n", 11 - g_failures, now_sec() - t0);
  return g_failures == 0 ? 0 : 1;
}
