#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascadia/cascade.hpp"
#include "cascadia/error.hpp"
#include "cascadia/influence.hpp"
#include "cascadia/ingest.hpp"
#include "cascadia/learn.hpp"
#include "cascadia/pipeline.hpp"
#include "cascadia/stats.hpp"
#include "cascadia/synth.hpp"
#include "cascadia/urlclass.hpp"
#include "cascadia/util.hpp"

namespace {

using namespace cascadia;

std::vector<PostThread> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus: " + path);
  return parse_thread_file(in);
}

// Reports go to --out when given, stdout otherwise.
void deliver(const std::string& out_path, const std::string& contents) {
  if (out_path.empty()) {
    std::cout << contents;
  } else {
    atomic_write_file(out_path, contents);
  }
}

std::string metrics_table(const char* classifier, const Metrics& m) {
  std::ostringstream out;
  out << "classifier,class,precision,recall,f1,support\n";
  auto row = [&](const char* cls, const ClassMetrics& c) {
    out << classifier << ',' << cls << ',' << format_num(c.precision) << ','
        << format_num(c.recall) << ',' << format_num(c.f1) << ',' << c.support
        << '\n';
  };
  row("increase", m.increase);
  row("decrease", m.decrease);
  row("avg_total", m.weighted_avg);
  return out.str();
}

std::vector<IrRecord> filter_class(const std::vector<IrRecord>& records,
                                   const std::string& cls) {
  if (cls.empty()) return records;
  auto want = url_class_from_name(cls);
  if (!want) throw Error("unknown label class '" + cls + "'");
  std::vector<IrRecord> out;
  for (const auto& r : records) {
    if (r.label.cls == *want) out.push_back(r);
  }
  return out;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discussion-thread cascade and influence analysis"};
  app.set_version_flag("--version", std::string("cascadia ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  int threads_flag = 0;
  std::string out_dir = "reports";
  app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
  app.add_option("--threads", threads_flag,
                 "worker threads (0 = CASCADIA_THREADS or autodetect)");
  app.add_option("--out-dir", out_dir, "report directory for pipeline")
      ->capture_default_str();

  // ingest validate
  auto* ingest_cmd = app.add_subcommand("ingest", "corpus intake");
  ingest_cmd->require_subcommand(1);
  auto* validate_cmd =
      ingest_cmd->add_subcommand("validate", "parse and sanity-check a corpus");
  std::string validate_input;
  validate_cmd->add_option("input", validate_input, "corpus file")->required();

  // label
  auto* label_cmd =
      app.add_subcommand("label", "classify threads by their URLs");
  std::string label_input, label_whitelist, label_blacklist, label_out;
  label_cmd->add_option("--input", label_input, "corpus file")->required();
  label_cmd->add_option("--whitelist-file", label_whitelist)->required();
  label_cmd->add_option("--blacklist-dir", label_blacklist)->required();
  label_cmd->add_option("--out", label_out, "output CSV (default stdout)");

  // cascade build | predict | cv
  auto* cascade_cmd =
      app.add_subcommand("cascade", "bandwagon size prediction");
  cascade_cmd->require_subcommand(1);
  std::string cas_input, cas_out = "matrix.csv";
  std::int64_t cas_window = 5, cas_horizon = 120, cas_final = kFinalAllMinutes;
  std::int64_t cas_resamples = 1000;
  double cas_percentile = 50.0;
  auto* build_cmd =
      cascade_cmd->add_subcommand("build", "train a prediction matrix");
  build_cmd->add_option("--input", cas_input, "training corpus")->required();
  build_cmd->add_option("--window-min", cas_window)->capture_default_str();
  build_cmd->add_option("--horizon-min", cas_horizon)->capture_default_str();
  build_cmd->add_option("--final-min", cas_final,
                        "final cutoff in minutes, -1 = all comments seen");
  build_cmd->add_option("--resamples", cas_resamples)->capture_default_str();
  build_cmd->add_option("--percentile", cas_percentile)->capture_default_str();
  build_cmd->add_option("--out", cas_out, "matrix file")->capture_default_str();

  auto* predict_cmd =
      cascade_cmd->add_subcommand("predict", "query a prediction matrix");
  std::string predict_matrix;
  std::int64_t predict_minutes = 120, predict_count = 0;
  predict_cmd->add_option("--matrix", predict_matrix)->required();
  predict_cmd->add_option("--observed-min", predict_minutes)
      ->capture_default_str();
  predict_cmd->add_option("--count", predict_count, "observed comment count")
      ->required();

  auto* cv_cmd = cascade_cmd->add_subcommand(
      "cv", "train on one corpus, score another");
  std::string cv_train, cv_test;
  cv_cmd->add_option("--train", cv_train)->required();
  cv_cmd->add_option("--test", cv_test)->required();
  cv_cmd->add_option("--window-min", cas_window)->capture_default_str();
  cv_cmd->add_option("--horizon-min", cas_horizon)->capture_default_str();
  cv_cmd->add_option("--final-min", cas_final);
  cv_cmd->add_option("--resamples", cas_resamples)->capture_default_str();
  cv_cmd->add_option("--percentile", cas_percentile)->capture_default_str();

  // stats compare
  auto* stats_cmd = app.add_subcommand("stats", "distribution comparisons");
  stats_cmd->require_subcommand(1);
  auto* compare_cmd = stats_cmd->add_subcommand(
      "compare", "summarize and KS-test two corpora");
  std::string stats_targets, stats_nontargets, stats_out;
  std::int64_t stats_final = kFinalAllMinutes;
  compare_cmd->add_option("--targets", stats_targets)->required();
  compare_cmd->add_option("--nontargets", stats_nontargets)->required();
  compare_cmd->add_option("--final-min", stats_final);
  compare_cmd->add_option("--out", stats_out, "output CSV (default stdout)");

  // ir extract | stages
  auto* ir_cmd = app.add_subcommand("ir", "per-comment influence features");
  ir_cmd->require_subcommand(1);
  auto* extract_cmd =
      ir_cmd->add_subcommand("extract", "build the URL-comment dataset");
  std::string ir_input, ir_whitelist, ir_blacklist, ir_out;
  std::int64_t ir_delta_t = 60, ir_k = 60;
  extract_cmd->add_option("--input", ir_input, "corpus file")->required();
  extract_cmd->add_option("--whitelist-file", ir_whitelist)->required();
  extract_cmd->add_option("--blacklist-dir", ir_blacklist)->required();
  extract_cmd->add_option("--delta-t-s", ir_delta_t, "window seconds")
      ->capture_default_str();
  extract_cmd->add_option("--k", ir_k, "vector length")->capture_default_str();
  extract_cmd->add_option("--out", ir_out, "output CSV (default stdout)");

  auto* stages_cmd = ir_cmd->add_subcommand(
      "stages", "per-class CDF of comment position ratios");
  std::string stages_input, stages_out;
  stages_cmd->add_option("--input", stages_input, "dataset CSV from extract")
      ->required();
  stages_cmd->add_option("--out", stages_out, "output CSV (default stdout)");

  // learn train | eval
  auto* learn_cmd = app.add_subcommand("learn", "direction classifiers");
  learn_cmd->require_subcommand(1);
  auto* train_cmd = learn_cmd->add_subcommand("train", "fit a model");
  std::string train_model = "adaboost", train_input, train_class, train_out;
  std::int64_t train_estimators = 50;
  double train_lr = 1.0;
  bool train_balance = false;
  train_cmd->add_option("--model", train_model, "gnb or adaboost")
      ->check(CLI::IsMember({"gnb", "adaboost"}))
      ->capture_default_str();
  train_cmd->add_option("--train", train_input, "dataset CSV")->required();
  train_cmd->add_option("--class", train_class,
                        "restrict training rows to one label class");
  train_cmd->add_option("--n-estimators", train_estimators)
      ->capture_default_str();
  train_cmd->add_option("--learning-rate", train_lr)->capture_default_str();
  train_cmd->add_flag("--balance", train_balance,
                      "subsample the majority direction");
  train_cmd->add_option("--out", train_out, "model file")->required();

  auto* eval_cmd = learn_cmd->add_subcommand("eval", "score a model");
  std::string eval_model_file, eval_input, eval_class, eval_out;
  eval_cmd->add_option("--model-file", eval_model_file)->required();
  eval_cmd->add_option("--test", eval_input, "dataset CSV")->required();
  eval_cmd->add_option("--class", eval_class,
                       "restrict test rows to one label class");
  eval_cmd->add_option("--out", eval_out, "output CSV (default stdout)");

  // synth
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_config, synth_out, synth_truth;
  synth_cmd->add_option("--config", synth_config)->required();
  synth_cmd->add_option("--out", synth_out, "corpus file")->required();
  synth_cmd->add_option("--truth", synth_truth, "ground-truth CSV");

  // pipeline
  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "full labeling-to-learning run");
  PipelineParams pp;
  pipeline_cmd->add_option("--input", pp.corpus_path, "corpus file")
      ->required();
  pipeline_cmd->add_option("--whitelist-file", pp.whitelist_path)->required();
  pipeline_cmd->add_option("--blacklist-dir", pp.blacklist_dir)->required();
  pipeline_cmd->add_option("--window-min", pp.window_minutes)
      ->capture_default_str();
  pipeline_cmd->add_option("--horizon-min", pp.horizon_minutes)
      ->capture_default_str();
  pipeline_cmd->add_option("--final-min", pp.final_minutes,
                           "final cutoff, -1 = all comments seen");
  pipeline_cmd->add_option("--resamples", pp.resamples)->capture_default_str();
  pipeline_cmd->add_option("--percentile", pp.percentile)
      ->capture_default_str();
  pipeline_cmd->add_option("--delta-t-s", pp.delta_t_seconds)
      ->capture_default_str();
  pipeline_cmd->add_option("--k", pp.piv_k)->capture_default_str();
  pipeline_cmd->add_option("--n-estimators", pp.n_estimators)
      ->capture_default_str();
  pipeline_cmd->add_option("--learning-rate", pp.learning_rate)
      ->capture_default_str();
  pipeline_cmd->add_flag("--balance", pp.balance,
                         "subsample the majority direction when training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  int threads = static_cast<int>(resolve_thread_count(
      threads_flag > 0 ? static_cast<unsigned>(threads_flag) : 0));

  try {
    if (validate_cmd->parsed()) {
      auto threads_parsed = load_corpus(validate_input);
      std::size_t activities = 0;
      for (const auto& t : threads_parsed) activities += t.activities.size();
      std::cout << "ok: " << threads_parsed.size() << " threads, "
                << activities << " activities\n";
    } else if (label_cmd->parsed()) {
      auto corpus = load_corpus(label_input);
      auto whitelist = load_whitelist_file(label_whitelist);
      auto blacklist = load_blacklist_dir(label_blacklist);
      std::ostringstream out;
      out << "post_id,value,worst\n";
      for (const auto& t : corpus) {
        ThreadLabel label = label_thread(t, whitelist, blacklist);
        const char* worst = label.worst == WorstClass::Critical ? "critical"
                            : label.worst == WorstClass::Light  ? "light"
                                                                : "none";
        out << csv_escape(t.post_id) << ','
            << (label.value == ThreadValue::Target ? "target" : "nontarget")
            << ',' << worst << '\n';
      }
      deliver(label_out, out.str());
    } else if (build_cmd->parsed()) {
      auto corpus = load_corpus(cas_input);
      auto d = build_distribution_matrix(corpus, cas_window, cas_horizon,
                                         cas_final);
      auto m = build_prediction_matrix(d, cas_resamples, cas_percentile, seed,
                                       threads);
      write_prediction_matrix(m, cas_out);
      std::cout << "wrote " << m.cells.size() << " cells to " << cas_out
                << "\n";
    } else if (predict_cmd->parsed()) {
      auto m = read_prediction_matrix(predict_matrix);
      auto bound = predict_final(m, predict_minutes, predict_count);
      if (bound) {
        std::cout << *bound << "\n";
      } else {
        std::cout << "unpredictable\n";
      }
    } else if (cv_cmd->parsed()) {
      auto train = load_corpus(cv_train);
      auto test = load_corpus(cv_test);
      CascadeCV cv = cross_validate(train, test, cas_window, cas_horizon,
                                    cas_final, cas_resamples, cas_percentile,
                                    seed, threads);
      std::cout << "precision_hits,predictable,total\n"
                << cv.precision_hits << ',' << cv.predictable << ','
                << cv.total << "\n";
    } else if (compare_cmd->parsed()) {
      auto targets = load_corpus(stats_targets);
      auto nontargets = load_corpus(stats_nontargets);
      auto [ts, ns, ks] = compare_cascades(targets, nontargets, stats_final);
      std::ostringstream out;
      out << "group,n,mean,se,min,max,ks_d,ks_p\n";
      auto row = [&](const char* name, const SummaryStats& s) {
        out << name << ',' << s.n << ',' << format_num(s.mean) << ','
            << format_num(s.dispersion) << ',' << format_num(s.min) << ','
            << format_num(s.max) << ',' << format_num(ks.d_statistic) << ','
            << format_num(ks.p_value) << '\n';
      };
      row("target", ts);
      row("nontarget", ns);
      deliver(stats_out, out.str());
    } else if (extract_cmd->parsed()) {
      auto corpus = load_corpus(ir_input);
      auto whitelist = load_whitelist_file(ir_whitelist);
      auto blacklist = load_blacklist_dir(ir_blacklist);
      auto records = extract_ir_dataset(corpus, whitelist, blacklist,
                                        ir_delta_t, ir_k, threads);
      deliver(ir_out, ir_csv_string(records));
    } else if (stages_cmd->parsed()) {
      auto records = read_ir_csv(stages_input);
      std::ostringstream out;
      out << "label_class,position_ratio,cumulative_fraction\n";
      for (const auto& row : stage_cdf(records)) {
        out << row.label_class << ',' << format_num(row.position_ratio) << ','
            << format_num(row.cumulative_fraction) << '\n';
      }
      deliver(stages_out, out.str());
    } else if (train_cmd->parsed()) {
      auto records = filter_class(read_ir_csv(train_input), train_class);
      if (records.empty()) throw Error("no training records after filtering");
      if (train_balance) records = balance_records(records, seed);
      FeatureMatrix data = to_features(records);
      if (train_model == "gnb") {
        write_gnb(train_gnb(data), train_out);
      } else {
        write_ensemble(train_adaboost(data, train_estimators, train_lr),
                       train_out);
      }
      std::cout << "wrote model to " << train_out << "\n";
    } else if (eval_cmd->parsed()) {
      auto records = filter_class(read_ir_csv(eval_input), eval_class);
      if (records.empty()) throw Error("no test records after filtering");
      FeatureMatrix data = to_features(records);
      std::ifstream probe(eval_model_file);
      if (!probe) throw Error("cannot open model file: " + eval_model_file);
      std::string first;
      std::getline(probe, first);
      probe.close();
      std::vector<IrDirection> pred;
      const char* name;
      if (trim(first) == "gnb") {
        GnbModel model = read_gnb(eval_model_file);
        for (const auto& row : data.rows) pred.push_back(predict_gnb(model, row));
        name = "gnb";
      } else {
        StumpEnsemble model = read_ensemble(eval_model_file);
        for (const auto& row : data.rows) {
          pred.push_back(predict_adaboost(model, row));
        }
        name = "adaboost";
      }
      deliver(eval_out, metrics_table(name, evaluate(pred, data.labels)));
    } else if (synth_cmd->parsed()) {
      SynthConfig cfg = parse_synth_config(synth_config);
      if (app.count("--seed") > 0) cfg.seed = seed;
      auto [corpus, truth] = generate(cfg, threads);
      emit(corpus, synth_out);
      if (!synth_truth.empty()) write_ground_truth(truth, synth_truth);
      std::size_t activities = 0;
      for (const auto& t : corpus) activities += t.activities.size();
      std::cout << "wrote " << corpus.size() << " threads, " << activities
                << " activities to " << synth_out << "\n";
    } else if (pipeline_cmd->parsed()) {
      pp.seed = seed;
      pp.threads = threads;
      pp.command_line = join_args(argc, argv);
      pp.out_dir = out_dir;
      auto written = run_pipeline(pp);
      for (const auto& name : written) {
        std::cout << pp.out_dir << "/" << name << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
