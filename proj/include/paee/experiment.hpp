#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paee/csv.hpp"
#include "paee/data_model.hpp"
#include "paee/error.hpp"
#include "paee/eval.hpp"
#include "paee/nn.hpp"
#include "paee/optim.hpp"
#include "paee/sequencing.hpp"

namespace paee {

// ---------------------------------------------------------------------------
// Model variants

enum class ModelVariant { GA, GA_ID, GA_AC, GA_ID_AC };

inline bool variant_uses_static(ModelVariant v) {
  return v == ModelVariant::GA_ID || v == ModelVariant::GA_ID_AC;
}
inline bool variant_uses_labels(ModelVariant v) {
  return v == ModelVariant::GA_AC || v == ModelVariant::GA_ID_AC;
}

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::GA: return "GA";
    case ModelVariant::GA_ID: return "GA_ID";
    case ModelVariant::GA_AC: return "GA_AC";
    case ModelVariant::GA_ID_AC: return "GA_ID_AC";
  }
  return "?";
}

inline ModelVariant variant_from_string(std::string_view s) {
  std::string u(s);
  for (char& c : u) c = (char)std::toupper((unsigned char)c);
  if (u == "GA") return ModelVariant::GA;
  if (u == "GA_ID") return ModelVariant::GA_ID;
  if (u == "GA_AC") return ModelVariant::GA_AC;
  if (u == "GA_ID_AC") return ModelVariant::GA_ID_AC;
  throw InvalidConfig("unknown model variant '" + std::string(s) + "'");
}

inline SequenceSpec make_spec(size_t seq_size, double window_sec, AggregationFn agg,
                              ModelVariant v) {
  return SequenceSpec::make(seq_size, window_sec, agg, variant_uses_static(v),
                            variant_uses_labels(v));
}

// ---------------------------------------------------------------------------
// Dataset and per-subject example construction

struct Dataset {
  std::vector<Recording> recordings;

  std::vector<ParticipantProfile> profiles() const {
    std::vector<ParticipantProfile> out;
    for (const auto& r : recordings) out.push_back(r.profile);
    return out;
  }
  const Recording& by_id(const std::string& id) const {
    for (const auto& r : recordings) {
      if (r.profile.id == id) return r;
    }
    throw InvalidConfig("unknown subject id " + id);
  }
};

struct SubjectExamples {
  std::string id;
  std::vector<TrainingExample> train_mode;  // one per smoothed-target bin
  std::vector<TrainingExample> eval_mode;   // one per breath
};

// Builds raw (identity-normalized) examples for every subject. Per-fold
// statistics are fitted and applied later, on copies.
inline std::vector<SubjectExamples> build_examples(const Dataset& ds, const SequenceSpec& spec) {
  NormBundle identity;
  std::vector<SubjectExamples> out;
  for (const auto& rec : ds.recordings) {
    if (spec.use_labels && rec.annotations.empty()) {
      throw InvalidConfig("variant needs activity annotations but subject " + rec.profile.id +
                          " has none");
    }
    SubjectExamples se;
    se.id = rec.profile.id;
    se.train_mode = build_training_set(rec, spec, identity);
    se.eval_mode = build_eval_set(rec, spec, identity);
    out.push_back(std::move(se));
  }
  return out;
}

// Fits accel/static/target statistics over the given training examples.
inline NormBundle fit_norm(const std::vector<const TrainingExample*>& train_exs,
                           const SequenceSpec& spec) {
  std::vector<std::vector<double>> accel_ch(6);
  std::vector<std::vector<double>> stat_ch(kStaticDim);
  std::vector<std::vector<double>> target_ch(1);
  for (const auto* ex : train_exs) {
    for (size_t r = 0; r < ex->accel.rows(); ++r) {
      const double* row = ex->accel.row(r);
      for (size_t c = 0; c < 6; ++c) accel_ch[c].push_back(row[c]);
    }
    if (spec.use_static) {
      for (size_t c = 0; c < kStaticDim; ++c) stat_ch[c].push_back(ex->stat[c]);
    }
    target_ch[0].push_back(ex->target);
  }
  NormBundle nb;
  nb.accel = znorm_fit(accel_ch);
  if (spec.use_static) nb.stat = znorm_fit(stat_ch);
  nb.target = znorm_fit(target_ch);
  return nb;
}

// Applies fold statistics in place. Targets are normalized only for the
// train/validation copies; test targets stay in kcal/min.
inline void apply_norm(std::vector<TrainingExample>& exs, const NormBundle& nb,
                       bool normalize_target) {
  for (auto& ex : exs) {
    znorm_apply(ex.accel, nb.accel);
    for (size_t c = 0; c < ex.stat.size(); ++c) ex.stat[c] = znorm_apply(ex.stat[c], nb.stat, c);
    if (normalize_target) ex.target = znorm_apply(ex.target, nb.target, 0);
  }
}

inline double denorm_target(double z, const NormBundle& nb) {
  return z * nb.target.std[0] + nb.target.mean[0];
}

// ---------------------------------------------------------------------------
// Fold execution

struct RunSettings {
  SequenceSpec spec;
  ModelVariant variant = ModelVariant::GA;
  std::array<size_t, 3> hidden = {32, 256, 32};
  double dropout_p = 0.5;
  TrainConfig train;   // its seed field is ignored; per-fold seeds are derived
  uint64_t seed = 0;
  size_t workers = 1;
  bool verbose = false;
};

struct FoldRunResult {
  FoldReport report;
  EvalSeries series;               // per-breath truth/prediction on the test subject
  HybridModel model;               // best-validation parameters
  NormBundle norm;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

namespace detail {

inline const SubjectExamples& subject_by_id(const std::vector<SubjectExamples>& all,
                                            const std::string& id) {
  for (const auto& se : all) {
    if (se.id == id) return se;
  }
  throw InvalidConfig("unknown subject id " + id);
}

inline void split_metrics(const EvalSeries& s, const std::vector<LocationFlag>& loc,
                          LocationFlag want, std::optional<double>& out_rmse,
                          std::optional<double>& out_r2) {
  std::vector<double> tr, pr;
  for (size_t i = 0; i < s.t.size(); ++i) {
    if (loc[i] != want) continue;
    tr.push_back(s.y_true[i]);
    pr.push_back(s.y_pred[i]);
  }
  if (tr.empty()) return;
  out_rmse = rmse(tr, pr);
  out_r2 = r2_or_nan(tr, pr);
}

}  // namespace detail

inline FoldRunResult run_fold(const std::vector<SubjectExamples>& all, const FoldSpec& fold,
                              const RunSettings& rs) {
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<TrainingExample> train_exs, val_exs;
  for (const auto& id : fold.train) {
    const auto& se = detail::subject_by_id(all, id);
    train_exs.insert(train_exs.end(), se.train_mode.begin(), se.train_mode.end());
  }
  std::vector<const TrainingExample*> train_ptrs;
  train_ptrs.reserve(train_exs.size());
  for (const auto& ex : train_exs) train_ptrs.push_back(&ex);
  for (const auto& id : {fold.val_indoor, fold.val_outdoor}) {
    const auto& se = detail::subject_by_id(all, id);
    val_exs.insert(val_exs.end(), se.train_mode.begin(), se.train_mode.end());
  }
  std::vector<TrainingExample> test_exs = detail::subject_by_id(all, fold.test).eval_mode;
  if (train_exs.empty()) throw EmptyTrainingSet("fold " + fold.test + " has no training examples");

  FoldRunResult out;
  out.norm = fit_norm(train_ptrs, rs.spec);
  apply_norm(train_exs, out.norm, true);
  apply_norm(val_exs, out.norm, true);
  apply_norm(test_exs, out.norm, false);

  ModelConfig mc;
  mc.input_dim = rs.spec.input_dim();
  mc.static_dim = rs.spec.use_static ? kStaticDim : 0;
  mc.hidden = rs.hidden;
  mc.dropout_p = rs.dropout_p;
  HybridModel model = init_params(mc, mix_seed(rs.seed, "init:" + fold.test));

  TrainConfig tc = rs.train;
  tc.seed = mix_seed(rs.seed, "train:" + fold.test);
  TrainResult tr = train(std::move(model), train_exs, val_exs, tc);

  std::vector<double> pred = predict(tr.model, test_exs);
  std::vector<LocationFlag> loc;
  out.series.t.reserve(test_exs.size());
  for (size_t i = 0; i < test_exs.size(); ++i) {
    out.series.t.push_back(test_exs[i].meta.t);
    out.series.y_true.push_back(test_exs[i].target);
    out.series.y_pred.push_back(denorm_target(pred[i], out.norm));
    loc.push_back(test_exs[i].meta.location);
  }

  FoldReport& rep = out.report;
  rep.subject = fold.test;
  rep.n_breaths = out.series.t.size();
  rep.rmse = rmse(out.series.y_true, out.series.y_pred);
  rep.r2 = r2_or_nan(out.series.y_true, out.series.y_pred);
  detail::split_metrics(out.series, loc, LocationFlag::Indoor, rep.in_rmse, rep.in_r2);
  detail::split_metrics(out.series, loc, LocationFlag::Outdoor, rep.out_rmse, rep.out_r2);
  for (double w : kReportWindows) {
    AggSeries agg = aggregate_eval(out.series, w);
    WindowMetrics wm;
    wm.window_sec = w;
    wm.n = agg.t.size();
    wm.rmse = rmse(agg.y_true, agg.y_pred);
    wm.r2 = r2_or_nan(agg.y_true, agg.y_pred);
    rep.windows.push_back(wm);
  }
  rep.best_epoch = tr.best_epoch;
  rep.best_val_mse = tr.val_loss.empty() ? 0 : tr.val_loss[tr.best_epoch];
  rep.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  out.model = std::move(tr.model);
  out.train_loss = std::move(tr.train_loss);
  out.val_loss = std::move(tr.val_loss);
  return out;
}

// Runs every fold, fanning out across up to rs.workers threads. Results are
// keyed by fold index, so the output is identical for any worker count.
inline std::vector<FoldRunResult> run_loso(const Dataset& ds, const RunSettings& rs) {
  std::vector<FoldSpec> folds = loso_folds(ds.profiles(), rs.seed);
  std::vector<SubjectExamples> all = build_examples(ds, rs.spec);

  std::vector<FoldRunResult> results(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= folds.size()) return;
      try {
        results[i] = run_fold(all, folds[i], rs);
        if (rs.verbose) {
          std::fprintf(stderr, "fold %s: rmse %.4f r2 %.4f (%.1f s)\n",
                       results[i].report.subject.c_str(), results[i].report.rmse,
                       results[i].report.r2, results[i].report.train_seconds);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t n_workers = std::max<size_t>(1, std::min(rs.workers, folds.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Sweep

struct GridEntry {
  size_t seq_size = 0;
  double window_sec = 0;
  AggregationFn agg = AggregationFn::Mean;
  ModelVariant variant = ModelVariant::GA;
};

// The full published sweep: 7 sequence sizes by 4 window lengths.
inline std::vector<std::pair<size_t, double>> paper_grid() {
  std::vector<std::pair<size_t, double>> out;
  for (size_t seq : {4, 10, 50, 160, 240, 360, 480}) {
    for (double win : {60.0, 120.0, 240.0, 480.0}) out.push_back({seq, win});
  }
  return out;
}

struct SweepRow {
  GridEntry entry;
  std::vector<FoldReport> folds;
  double median_rmse = 0, median_r2 = 0;
  std::vector<double> median_window_rmse, median_window_r2;  // per kReportWindows
};

struct PairTest {
  size_t i = 0, j = 0;  // row indices
  TTestResult r2_test;  // per-breath R2 paired by subject
  bool defined = false;
};

struct ExperimentReport {
  std::vector<SweepRow> rows;
  std::vector<PairTest> tests;  // all row pairs i<j
};

inline ExperimentReport run_experiment(const Dataset& ds, const std::vector<GridEntry>& grid,
                                       const RunSettings& base) {
  ExperimentReport rep;
  for (const auto& g : grid) {
    RunSettings rs = base;
    rs.spec = make_spec(g.seq_size, g.window_sec, g.agg, g.variant);
    rs.variant = g.variant;
    std::vector<FoldRunResult> fr = run_loso(ds, rs);
    SweepRow row;
    row.entry = g;
    std::vector<double> rms, r2s;
    for (auto& f : fr) {
      row.folds.push_back(f.report);
      rms.push_back(f.report.rmse);
      r2s.push_back(f.report.r2);
    }
    row.median_rmse = median(rms);
    row.median_r2 = median(r2s);
    for (size_t w = 0; w < kReportWindows.size(); ++w) {
      std::vector<double> wr, w2;
      for (const auto& f : row.folds) {
        wr.push_back(f.windows[w].rmse);
        w2.push_back(f.windows[w].r2);
      }
      row.median_window_rmse.push_back(median(wr));
      row.median_window_r2.push_back(median(w2));
    }
    rep.rows.push_back(std::move(row));
  }
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    for (size_t j = i + 1; j < rep.rows.size(); ++j) {
      PairTest pt;
      pt.i = i;
      pt.j = j;
      std::vector<double> a, b;
      for (size_t f = 0; f < rep.rows[i].folds.size(); ++f) {
        a.push_back(rep.rows[i].folds[f].r2);
        b.push_back(rep.rows[j].folds[f].r2);
      }
      try {
        pt.r2_test = paired_t_test(a, b);
        pt.defined = true;
      } catch (const Error&) {
        pt.defined = false;
      }
      rep.tests.push_back(pt);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization

inline std::string fold_csv(const ExperimentReport& rep) {
  std::string out =
      "config,variant,agg,seq_size,window_sec,subject,eval_window_sec,n,rmse,r2\n";
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    for (const auto& f : row.folds) {
      for (const auto& w : f.windows) {
        out += std::to_string(i);
        out += ',';
        out += to_string(row.entry.variant);
        out += ',';
        out += to_string(row.entry.agg);
        out += ',';
        out += std::to_string(row.entry.seq_size);
        out += ',';
        out += csv::format_double(row.entry.window_sec);
        out += ',';
        out += f.subject;
        out += ',';
        out += csv::format_double(w.window_sec);
        out += ',';
        out += std::to_string(w.n);
        out += ',';
        out += csv::format_double(w.rmse);
        out += ',';
        out += csv::format_double(w.r2);
        out += '\n';
      }
    }
  }
  return out;
}

inline std::string summary_csv(const ExperimentReport& rep) {
  std::string out = "config,variant,agg,seq_size,window_sec,sr_hz,folds,median_rmse,median_r2,"
                    "p_vs_first,significant\n";
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    out += std::to_string(i);
    out += ',';
    out += to_string(row.entry.variant);
    out += ',';
    out += to_string(row.entry.agg);
    out += ',';
    out += std::to_string(row.entry.seq_size);
    out += ',';
    out += csv::format_double(row.entry.window_sec);
    out += ',';
    out += csv::format_double(derive_sr((double)row.entry.seq_size, row.entry.window_sec));
    out += ',';
    out += std::to_string(row.folds.size());
    out += ',';
    out += csv::format_double(row.median_rmse);
    out += ',';
    out += csv::format_double(row.median_r2);
    out += ',';
    if (i == 0) {
      out += ",";
    } else {
      const PairTest* pt = nullptr;
      for (const auto& t : rep.tests) {
        if (t.i == 0 && t.j == i) pt = &t;
      }
      if (pt && pt->defined) {
        out += csv::format_double(pt->r2_test.p);
        out += ',';
        out += (pt->r2_test.p < 0.05 ? "*" : "");
      } else {
        out += ",";
      }
    }
    out += '\n';
  }
  return out;
}

inline std::string ttest_csv(const ExperimentReport& rep) {
  std::string out = "config_a,config_b,n,t,p,significant\n";
  for (const auto& t : rep.tests) {
    out += std::to_string(t.i);
    out += ',';
    out += std::to_string(t.j);
    out += ',';
    if (t.defined) {
      out += std::to_string(t.r2_test.n);
      out += ',';
      out += csv::format_double(t.r2_test.t);
      out += ',';
      out += csv::format_double(t.r2_test.p);
      out += ',';
      out += (t.r2_test.p < 0.05 ? "*" : "");
    } else {
      out += ",,,";
    }
    out += '\n';
  }
  return out;
}

// Fixed-width text table mirroring the sweep summary.
inline std::string summary_table(const ExperimentReport& rep) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-9s %-5s %5s %7s %7s %6s %9s %9s %s\n", "cfg",
                "variant", "agg", "seq", "win_s", "sr_hz", "folds", "med_rmse", "med_r2",
                "p<0.05");
  out += line;
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    std::string star;
    for (const auto& t : rep.tests) {
      if (t.i == 0 && t.j == i && t.defined && t.r2_test.p < 0.05) star = "*";
    }
    std::snprintf(line, sizeof line, "%-4zu %-9s %-5s %5zu %7.0f %7.3f %6zu %9.4f %9.4f %s\n", i,
                  to_string(row.entry.variant), to_string(row.entry.agg), row.entry.seq_size,
                  row.entry.window_sec, derive_sr((double)row.entry.seq_size, row.entry.window_sec),
                  row.folds.size(), row.median_rmse, row.median_r2, star.c_str());
    out += line;
  }
  return out;
}

}  // namespace paee
