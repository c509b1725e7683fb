// Command-line front end: synthetic data generation, training, evaluation,
// configuration sweeps, and prediction export.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "paee/paee.hpp"

namespace fs = std::filesystem;
using namespace paee;

namespace {

size_t resolve_workers(const RunConfig& rc) {
  if (rc.has("workers")) return rc.get_size("workers");
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void prepare_out(const RunConfig& rc, const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());
  const std::string dump = rc.dump();
  std::fputs("resolved config:\n", stderr);
  std::fputs(dump.c_str(), stderr);
  csv::write_file(out + "/config_resolved.txt", dump);
}

TrainConfig train_config_from(const RunConfig& rc) {
  TrainConfig tc;
  tc.epochs = rc.get_size("epochs");
  tc.batch_size = rc.get_size("batch_size");
  tc.adam.lr = rc.get_dbl("lr");
  tc.patience = rc.get_size("patience");
  tc.validate();
  return tc;
}

RunSettings settings_from(const RunConfig& rc) {
  RunSettings rs;
  rs.variant = variant_from_string(rc.get("variant"));
  rs.spec = make_spec(rc.get_size("seq_size"), rc.get_dbl("window_sec"),
                      aggregation_from_string(rc.get("agg")), rs.variant);
  rs.hidden = parse_hidden(rc.get("hidden"));
  rs.dropout_p = rc.get_dbl("dropout");
  if (rs.dropout_p < 0 || rs.dropout_p >= 1) throw ConfigError("dropout must be in [0,1)");
  rs.train = train_config_from(rc);
  rs.seed = rc.get_u64("seed");
  rs.workers = resolve_workers(rc);
  rs.verbose = true;
  return rs;
}

std::string training_log_csv(const std::vector<double>& train_loss,
                             const std::vector<double>& val_loss) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (size_t e = 0; e < train_loss.size(); ++e) {
    out += std::to_string(e);
    out += ',';
    out += csv::format_double(train_loss[e]);
    out += ',';
    out += csv::format_double(val_loss[e]);
    out += '\n';
  }
  return out;
}

std::string fold_report_csv(const std::vector<FoldReport>& reports) {
  std::string out = "subject,eval_window_sec,n,rmse,r2\n";
  for (const auto& rep : reports) {
    for (const auto& w : rep.windows) {
      out += rep.subject;
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
  return out;
}

std::string fold_summary_table(const std::vector<FoldReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %8s %8s %8s\n", "window", "folds", "rmse",
                "r2", "in_r2", "out_r2", "breaths");
  out += line;
  for (size_t w = 0; w < kReportWindows.size(); ++w) {
    std::vector<double> rms, r2s;
    for (const auto& rep : reports) {
      rms.push_back(rep.windows[w].rmse);
      r2s.push_back(rep.windows[w].r2);
    }
    std::vector<double> in_r2, out_r2;
    size_t breaths = 0;
    for (const auto& rep : reports) {
      if (rep.in_r2) in_r2.push_back(*rep.in_r2);
      if (rep.out_r2) out_r2.push_back(*rep.out_r2);
      breaths += rep.n_breaths;
    }
    const double win = kReportWindows[w];
    char wname[32];
    if (win <= 0) {
      std::snprintf(wname, sizeof wname, "breath");
    } else if (win < 60) {
      std::snprintf(wname, sizeof wname, "%.0f s", win);
    } else {
      std::snprintf(wname, sizeof wname, "%.0f min", win / 60.0);
    }
    std::snprintf(line, sizeof line, "%-8s %8zu %8.4f %8.4f %8s %8s %8zu\n", wname,
                  reports.size(), median(rms), median(r2s),
                  (w == 0 && !in_r2.empty()) ? csv::format_fixed(median(in_r2), 4).c_str() : "-",
                  (w == 0 && !out_r2.empty()) ? csv::format_fixed(median(out_r2), 4).c_str() : "-",
                  breaths);
    out += line;
  }
  return out;
}

void cmd_synth(const RunConfig& rc) {
  SynthConfig sc;
  sc.n_subjects = rc.get_size("subjects");
  sc.indoor_only_fraction = rc.get_dbl("indoor_fraction");
  sc.duration_sec = rc.get_dbl("duration");
  sc.lag_tau = rc.get_dbl("lag_tau");
  sc.noise_sd = rc.get_dbl("noise_sd");
  sc.seed = rc.get_u64("seed");
  const std::string out = rc.get("out");
  prepare_out(rc, out);

  SynthResult res = generate_dataset(sc);
  write_dataset(out, res.dataset);

  size_t breaths = 0;
  for (const auto& r : res.dataset.recordings) breaths += r.breaths.size();
  std::printf("wrote %zu subjects, %zu breaths to %s\n", res.dataset.recordings.size(), breaths,
              out.c_str());
  std::printf("%-10s %10s\n", "band", "hours");
  for (const auto& [band, h] : met_band_hours(res.dataset)) {
    std::printf("%-10s %10.3f\n", to_string(band), h);
  }
}

void cmd_train(const RunConfig& rc) {
  const std::string out = rc.get("out");
  prepare_out(rc, out);
  RunSettings rs = settings_from(rc);
  Dataset ds = load_dataset(rc.get("data"));
  const std::string test = rc.get("test");

  std::vector<FoldSpec> folds = loso_folds(ds.profiles(), rs.seed);
  const FoldSpec* fold = nullptr;
  for (const auto& f : folds) {
    if (f.test == test) fold = &f;
  }
  if (!fold) throw ConfigError("test subject '" + test + "' not in dataset");

  std::vector<SubjectExamples> all = build_examples(ds, rs.spec);
  FoldRunResult res = run_fold(all, *fold, rs);

  SavedModel sm;
  sm.model = std::move(res.model);
  sm.spec = rs.spec;
  sm.norm = res.norm;
  sm.seed = rs.seed;
  sm.lineage = "test=" + test + " variant=" + to_string(rs.variant);
  save_model(out + "/model_" + test + ".bin", sm);
  csv::write_file(out + "/train_log_" + test + ".csv",
                  training_log_csv(res.train_loss, res.val_loss));
  csv::write_file(out + "/fold_" + test + ".csv", fold_report_csv({res.report}));
  std::printf("fold %s: per-breath rmse %.4f r2 %.4f (best epoch %zu, %.1f s)\n", test.c_str(),
              res.report.rmse, res.report.r2, res.report.best_epoch, res.report.train_seconds);
}

void cmd_eval(const RunConfig& rc) {
  const std::string out = rc.get("out");
  prepare_out(rc, out);
  SavedModel sm = load_model(rc.get("model"));
  const std::string data = rc.get("data");
  if (sm.spec.use_static && !fs::exists(data + "/participants.csv")) {
    throw StaticBranchMissing(
        "model uses participant attributes but the dataset has no participants.csv");
  }
  Dataset ds = load_dataset(data);

  std::vector<const Recording*> targets;
  if (rc.has("subject")) {
    targets.push_back(&ds.by_id(rc.get("subject")));
  } else {
    for (const auto& r : ds.recordings) targets.push_back(&r);
  }

  NormBundle identity;
  std::vector<FoldReport> reports;
  for (const Recording* rec : targets) {
    std::vector<TrainingExample> exs = build_eval_set(*rec, sm.spec, identity);
    if (exs.empty()) {
      std::fprintf(stderr, "warning: no usable breaths for %s, skipping\n",
                   rec->profile.id.c_str());
      continue;
    }
    apply_norm(exs, sm.norm, false);
    std::vector<double> pred = predict(sm.model, exs);
    EvalSeries series;
    std::vector<LocationFlag> loc;
    for (size_t i = 0; i < exs.size(); ++i) {
      series.t.push_back(exs[i].meta.t);
      series.y_true.push_back(exs[i].target);
      series.y_pred.push_back(denorm_target(pred[i], sm.norm));
      loc.push_back(exs[i].meta.location);
    }
    FoldReport rep;
    rep.subject = rec->profile.id;
    rep.n_breaths = series.t.size();
    rep.rmse = rmse(series.y_true, series.y_pred);
    rep.r2 = r2_or_nan(series.y_true, series.y_pred);
    for (double w : kReportWindows) {
      AggSeries agg = aggregate_eval(series, w);
      rep.windows.push_back(
          {w, agg.t.size(), rmse(agg.y_true, agg.y_pred), r2_or_nan(agg.y_true, agg.y_pred)});
    }
    std::vector<double> in_t, in_p, out_t, out_p;
    for (size_t i = 0; i < series.t.size(); ++i) {
      if (loc[i] == LocationFlag::Indoor) {
        in_t.push_back(series.y_true[i]);
        in_p.push_back(series.y_pred[i]);
      } else {
        out_t.push_back(series.y_true[i]);
        out_p.push_back(series.y_pred[i]);
      }
    }
    if (!in_t.empty()) {
      rep.in_rmse = rmse(in_t, in_p);
      rep.in_r2 = r2_or_nan(in_t, in_p);
    }
    if (!out_t.empty()) {
      rep.out_rmse = rmse(out_t, out_p);
      rep.out_r2 = r2_or_nan(out_t, out_p);
    }
    reports.push_back(std::move(rep));
  }
  if (reports.empty()) throw InvalidConfig("no evaluable subjects");

  csv::write_file(out + "/eval_folds.csv", fold_report_csv(reports));
  const std::string table = fold_summary_table(reports);
  csv::write_file(out + "/eval_summary.txt", table);
  std::fputs(table.c_str(), stdout);
}

void cmd_sweep(const RunConfig& rc) {
  const std::string out = rc.get("out");
  prepare_out(rc, out);
  RunSettings base = settings_from(rc);
  base.verbose = false;
  Dataset ds = load_dataset(rc.get("data"));

  std::vector<GridEntry> grid;
  if (rc.get_bool("paper_grid")) {
    const AggregationFn agg = aggregation_from_string(rc.get("agg"));
    const ModelVariant variant = variant_from_string(rc.get("variant"));
    for (const auto& [seq, win] : paper_grid()) grid.push_back({seq, win, agg, variant});
  } else {
    grid = parse_grid(rc.get("grid"));
  }
  if (grid.empty()) throw ConfigError("sweep needs --grid entries or --paper_grid 1");

  ExperimentReport rep = run_experiment(ds, grid, base);
  csv::write_file(out + "/sweep_folds.csv", fold_csv(rep));
  csv::write_file(out + "/sweep_summary.csv", summary_csv(rep));
  csv::write_file(out + "/sweep_ttests.csv", ttest_csv(rep));
  const std::string table = summary_table(rep);
  csv::write_file(out + "/sweep_summary.txt", table);
  std::fputs(table.c_str(), stdout);
}

void cmd_predict(const RunConfig& rc) {
  const std::string out = rc.get("out");
  prepare_out(rc, out);
  SavedModel sm = load_model(rc.get("model"));
  const std::string data = rc.get("data");
  const std::string subject = rc.get("subject");
  const std::string sub = data + "/" + subject;
  if (!fs::exists(sub)) throw IoError("no subject directory " + sub);

  Recording rec;
  rec.profile.id = subject;
  if (fs::exists(data + "/participants.csv")) {
    for (auto& p : parse_participants_csv(data + "/participants.csv")) {
      if (p.id == subject) rec.profile = p;
    }
  } else if (sm.spec.use_static) {
    throw StaticBranchMissing(
        "model uses participant attributes but the dataset has no participants.csv");
  }
  rec.wrist = parse_accel_csv(sub + "/accel_wrist.csv", BodyLocation::Wrist);
  rec.ankle = parse_accel_csv(sub + "/accel_ankle.csv", BodyLocation::Ankle);
  if (fs::exists(sub + "/breaths.csv")) rec.breaths = parse_breath_csv(sub + "/breaths.csv");
  if (fs::exists(sub + "/annotations.csv")) {
    rec.annotations = parse_annotations_csv(sub + "/annotations.csv");
  }

  const std::string window = rc.get("window");
  const std::string path = out + "/predict_" + subject + ".csv";
  NormBundle identity;
  if (window == "breath") {
    if (rec.breaths.empty()) {
      throw FormatError("per-breath prediction needs breaths.csv for timestamps");
    }
    std::vector<TrainingExample> exs = build_eval_set(rec, sm.spec, identity);
    apply_norm(exs, sm.norm, false);
    std::vector<double> pred = predict(sm.model, exs);
    std::string buf = "t,eem_true,eem_pred\n";
    for (size_t i = 0; i < exs.size(); ++i) {
      buf += csv::format_double(exs[i].meta.t);
      buf += ',';
      buf += csv::format_double(exs[i].target);
      buf += ',';
      buf += csv::format_double(denorm_target(pred[i], sm.norm));
      buf += '\n';
    }
    csv::write_file(path, buf);
    std::printf("wrote %zu per-breath predictions to %s\n", exs.size(), path.c_str());
    return;
  }

  auto wv = csv::parse_double(window);
  if (!wv || *wv <= 0) throw ConfigError("window must be 'breath' or a positive number of seconds");
  if (!rec.breaths.empty()) {
    // Aggregate per-breath truth and predictions into shared bins.
    std::vector<TrainingExample> exs = build_eval_set(rec, sm.spec, identity);
    apply_norm(exs, sm.norm, false);
    std::vector<double> pred = predict(sm.model, exs);
    EvalSeries series;
    for (size_t i = 0; i < exs.size(); ++i) {
      series.t.push_back(exs[i].meta.t);
      series.y_true.push_back(exs[i].target);
      series.y_pred.push_back(denorm_target(pred[i], sm.norm));
    }
    AggSeries agg = aggregate_eval(series, *wv);
    std::string buf = "t,eem_true,eem_pred\n";
    for (size_t i = 0; i < agg.t.size(); ++i) {
      buf += csv::format_double(agg.t[i]);
      buf += ',';
      buf += csv::format_double(agg.y_true[i]);
      buf += ',';
      buf += csv::format_double(agg.y_pred[i]);
      buf += '\n';
    }
    csv::write_file(path, buf);
    std::printf("wrote %zu aggregated predictions (%g s bins) to %s\n", agg.t.size(), *wv,
                path.c_str());
    return;
  }

  // No breath record: predict directly on a fixed wall-clock grid.
  const double accel_end = std::min(rec.wrist.t_end(), rec.ankle.t_end());
  std::vector<TrainingExample> exs;
  for (double ts = *wv; ts <= accel_end + 1e-9; ts += *wv) {
    TrainingExample ex;
    if (paee::detail::build_example_at(rec, sm.spec, identity, ts, 0.0, ex)) {
      exs.push_back(std::move(ex));
    }
  }
  if (exs.empty()) throw InvalidConfig("recording too short for the requested window");
  apply_norm(exs, sm.norm, false);
  std::vector<double> pred = predict(sm.model, exs);
  std::string buf = "t,eem_pred\n";
  for (size_t i = 0; i < exs.size(); ++i) {
    buf += csv::format_double(exs[i].meta.t);
    buf += ',';
    buf += csv::format_double(denorm_target(pred[i], sm.norm));
    buf += '\n';
  }
  csv::write_file(path, buf);
  std::printf("wrote %zu grid predictions (%g s step) to %s\n", exs.size(), *wv, path.c_str());
}

struct SubcommandState {
  CLI::App* app = nullptr;
  uint32_t mask = 0;
  std::string config_path;
  std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-expenditure estimation from wrist and ankle accelerometry"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* desc;
    uint32_t mask;
    void (*fn)(const RunConfig&);
  };
  const Cmd cmds[] = {
      {"synth", "generate a synthetic dataset", kCmdSynth, cmd_synth},
      {"train", "train one held-out-subject model", kCmdTrain, cmd_train},
      {"eval", "evaluate a saved model per subject and window", kCmdEval, cmd_eval},
      {"sweep", "run a LOSO sweep over sequence configurations", kCmdSweep, cmd_sweep},
      {"predict", "export predictions for one recording", kCmdPredict, cmd_predict},
  };

  std::vector<SubcommandState> states(std::size(cmds));
  for (size_t i = 0; i < std::size(cmds); ++i) {
    SubcommandState& st = states[i];
    st.app = app.add_subcommand(cmds[i].name, cmds[i].desc);
    st.mask = cmds[i].mask;
    st.app->add_option("--config", st.config_path, "config file with 'key = value' lines");
    for (const auto& k : key_defs()) {
      if (!(k.cmds & st.mask)) continue;
      const std::string name = k.name;
      st.app->add_option_function<std::string>(
          "--" + name, [&st, name](const std::string& v) { st.flags[name] = v; }, k.help);
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (size_t i = 0; i < std::size(cmds); ++i) {
      if (states[i].app->parsed()) {
        RunConfig rc = RunConfig::resolve(cmds[i].mask, states[i].config_path, states[i].flags);
        cmds[i].fn(rc);
        return 0;
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
