#include "cascadia/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascadia/cascade.hpp"
#include "cascadia/error.hpp"
#include "cascadia/influence.hpp"
#include "cascadia/ingest.hpp"
#include "cascadia/learn.hpp"
#include "cascadia/stats.hpp"
#include "cascadia/urlclass.hpp"
#include "cascadia/util.hpp"
#include "json.hpp"

namespace cascadia {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

std::string metrics_rows(const char* classifier, const Metrics& m) {
  std::ostringstream out;
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

std::string cv_row(const char* direction, const CascadeCV& cv) {
  std::ostringstream out;
  out << direction << ',' << cv.precision_hits << ',' << cv.predictable << ','
      << cv.total;
  out << ',';
  if (cv.predictable > 0) {
    out << format_num(100.0 * static_cast<double>(cv.precision_hits) /
                      static_cast<double>(cv.predictable));
  }
  out << ',';
  if (cv.total > 0) {
    out << format_num(100.0 * static_cast<double>(cv.predictable) /
                      static_cast<double>(cv.total));
  }
  out << '\n';
  return out.str();
}

std::string summary_row(const char* group, const SummaryStats& s,
                        const KsResult& ks) {
  std::ostringstream out;
  out << group << ',' << s.n << ',' << format_num(s.mean) << ','
      << format_num(s.dispersion) << ',' << format_num(s.min) << ','
      << format_num(s.max) << ',' << format_num(ks.d_statistic) << ','
      << format_num(ks.p_value) << '\n';
  return out.str();
}

}  // namespace

std::vector<std::string> run_pipeline(const PipelineParams& p) {
  std::string started = utc_now();

  // Every report is computed first; files appear only after the last stage
  // has succeeded, so failures leave the output directory untouched.
  std::vector<PostThread> threads = stage("ingest", [&] {
    std::ifstream in(p.corpus_path);
    if (!in) throw Error("cannot open corpus: " + p.corpus_path);
    auto parsed = parse_thread_file(in);
    if (parsed.empty()) throw Error("no threads");
    return parsed;
  });

  std::vector<std::string> whitelist;
  BlacklistIndex blacklist;
  stage("label", [&] {
    whitelist = load_whitelist_file(p.whitelist_path);
    blacklist = load_blacklist_dir(p.blacklist_dir);
    return 0;
  });

  std::string labels_csv;
  std::vector<PostThread> targets, nontargets;
  stage("label", [&] {
    std::ostringstream out;
    out << "post_id,value,worst\n";
    for (const auto& t : threads) {
      ThreadLabel label = label_thread(t, whitelist, blacklist);
      const char* worst = label.worst == WorstClass::Critical ? "critical"
                          : label.worst == WorstClass::Light  ? "light"
                                                              : "none";
      out << csv_escape(t.post_id) << ','
          << (label.value == ThreadValue::Target ? "target" : "nontarget")
          << ',' << worst << '\n';
      (label.value == ThreadValue::Target ? targets : nontargets).push_back(t);
    }
    labels_csv = out.str();
    return 0;
  });

  std::string cascade_csv = stage("cascade", [&] {
    if (targets.empty() || nontargets.empty()) {
      throw Error("need both target and non-target threads");
    }
    CascadeCV t2n = cross_validate(targets, nontargets, p.window_minutes,
                                   p.horizon_minutes, p.final_minutes,
                                   p.resamples, p.percentile, p.seed,
                                   p.threads);
    CascadeCV n2t = cross_validate(nontargets, targets, p.window_minutes,
                                   p.horizon_minutes, p.final_minutes,
                                   p.resamples, p.percentile, p.seed,
                                   p.threads);
    std::string out =
        "direction,precision_hits,predictable,total,precision_pct,"
        "predictable_pct\n";
    out += cv_row("target_to_nontarget", t2n);
    out += cv_row("nontarget_to_target", n2t);
    return out;
  });

  std::string stats_csv = stage("stats", [&] {
    auto [ts, ns, ks] = compare_cascades(targets, nontargets, p.final_minutes);
    std::string out = "group,n,mean,se,min,max,ks_d,ks_p\n";
    out += summary_row("target", ts, ks);
    out += summary_row("nontarget", ns, ks);
    return out;
  });

  std::vector<IrRecord> records = stage("ir", [&] {
    return extract_ir_dataset(threads, whitelist, blacklist, p.delta_t_seconds,
                              p.piv_k, p.threads);
  });

  auto [learn_light_csv, learn_critical_csv] = stage("learn", [&] {
    std::vector<IrRecord> benign, light, critical;
    for (const auto& r : records) {
      if (r.label.cls == UrlClass::Benign) benign.push_back(r);
      else if (r.label.cls == UrlClass::Light) light.push_back(r);
      else if (r.label.cls == UrlClass::Critical) critical.push_back(r);
    }
    auto table = [&](const std::vector<IrRecord>& test) {
      std::string out = "classifier,class,precision,recall,f1,support\n";
      out += metrics_rows(
          "gnb", run_experiment(benign, test, ClassifierKind::Gnb,
                                p.n_estimators, p.learning_rate, p.balance,
                                p.seed));
      out += metrics_rows(
          "adaboost", run_experiment(benign, test, ClassifierKind::AdaBoost,
                                     p.n_estimators, p.learning_rate,
                                     p.balance, p.seed));
      return out;
    };
    return std::pair<std::string, std::string>{table(light), table(critical)};
  });

  std::string stage_csv = stage("stages", [&] {
    std::string out = "label_class,position_ratio,cumulative_fraction\n";
    for (const auto& row : stage_cdf(records)) {
      out += row.label_class + ',' + format_num(row.position_ratio) + ',' +
             format_num(row.cumulative_fraction) + '\n';
    }
    return out;
  });

  std::vector<std::pair<std::string, std::string>> reports = {
      {"labels.csv", labels_csv},
      {"cascade_cv.csv", cascade_csv},
      {"stats_compare.csv", stats_csv},
      {"learn_light.csv", learn_light_csv},
      {"learn_critical.csv", learn_critical_csv},
      {"stage_cdf.csv", stage_csv},
  };

  std::vector<std::string> written;
  try {
    fs::create_directories(p.out_dir);
    for (const auto& [name, contents] : reports) {
      atomic_write_file((fs::path(p.out_dir) / name).string(), contents);
      written.push_back(name);
    }
    write_ir_csv((fs::path(p.out_dir) / "ir_dataset.csv").string(), records);
    written.push_back("ir_dataset.csv");

    nlohmann::ordered_json manifest;
    manifest["tool"] = "cascadia";
    manifest["version"] = kVersion;
    manifest["command"] = p.command_line;
    manifest["seed"] = p.seed;
    manifest["threads"] = p.threads;
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    manifest["params"] = {
        {"window_minutes", p.window_minutes},
        {"horizon_minutes", p.horizon_minutes},
        {"final_minutes", p.final_minutes},
        {"resamples", p.resamples},
        {"percentile", p.percentile},
        {"delta_t_seconds", p.delta_t_seconds},
        {"piv_k", p.piv_k},
        {"n_estimators", p.n_estimators},
        {"learning_rate", p.learning_rate},
        {"balance", p.balance},
    };
    nlohmann::ordered_json inputs;
    inputs["corpus"] = fnv1a64_hex(read_file(p.corpus_path));
    inputs["whitelist"] = fnv1a64_hex(read_file(p.whitelist_path));
    std::string blacklist_all;
    std::vector<fs::path> domain_files;
    for (const auto& entry : fs::recursive_directory_iterator(p.blacklist_dir)) {
      if (entry.is_regular_file()) domain_files.push_back(entry.path());
    }
    std::sort(domain_files.begin(), domain_files.end());
    for (const auto& f : domain_files) blacklist_all += read_file(f.string());
    inputs["blacklist_dir"] = fnv1a64_hex(blacklist_all);
    manifest["inputs"] = inputs;
    nlohmann::ordered_json digests;
    for (const auto& name : written) {
      digests[name] =
          fnv1a64_hex(read_file((fs::path(p.out_dir) / name).string()));
    }
    manifest["reports"] = digests;
    atomic_write_file((fs::path(p.out_dir) / "manifest.json").string(),
                      manifest.dump(2) + "\n");
    written.push_back("manifest.json");
  } catch (const std::exception& e) {
    for (const auto& name : written) {
      std::error_code ec;
      fs::remove(fs::path(p.out_dir) / name, ec);
    }
    throw Error(std::string("stage report: ") + e.what());
  }
  return written;
}

}  // namespace cascadia
