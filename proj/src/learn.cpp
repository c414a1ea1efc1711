#include "cascadia/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

namespace cascadia {

namespace {

constexpr double kMinEps = 1e-10;

void check_uniform(const FeatureMatrix& data) {
  if (data.rows.size() != data.labels.size()) {
    throw Error("feature rows and labels differ in length");
  }
  if (data.rows.empty()) throw Error("empty training data");
  std::size_t k = data.rows.front().size();
  for (const auto& row : data.rows) {
    if (row.size() != k) throw Error("ragged feature rows");
  }
}

bool has_both_classes(const std::vector<IrDirection>& labels) {
  bool inc = false, dec = false;
  for (auto l : labels) {
    (l == IrDirection::Increase ? inc : dec) = true;
  }
  return inc && dec;
}

}  // namespace

std::vector<double> normalize_piv(const Piv& piv) {
  double sum = 0.0;
  for (auto c : piv.components) sum += static_cast<double>(c);
  std::vector<double> out(piv.components.size(), 0.0);
  if (sum > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<double>(piv.components[i]) / sum;
    }
  }
  return out;
}

GnbModel train_gnb(const FeatureMatrix& data) {
  check_uniform(data);
  if (!has_both_classes(data.labels)) {
    throw Error("training data must contain both labels");
  }
  const std::size_t k = data.rows.front().size();
  const std::size_t n = data.rows.size();

  // Smoothing floor follows the pooled spread of the data so it stays
  // negligible next to real variance.
  std::vector<double> pooled_mean(k, 0.0), pooled_var(k, 0.0);
  for (const auto& row : data.rows) {
    for (std::size_t f = 0; f < k; ++f) pooled_mean[f] += row[f];
  }
  for (std::size_t f = 0; f < k; ++f) pooled_mean[f] /= static_cast<double>(n);
  for (const auto& row : data.rows) {
    for (std::size_t f = 0; f < k; ++f) {
      double d = row[f] - pooled_mean[f];
      pooled_var[f] += d * d;
    }
  }
  double max_var = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    max_var = std::max(max_var, pooled_var[f] / static_cast<double>(n));
  }
  double smoothing = 1e-9 * max_var;
  if (smoothing <= 0.0) smoothing = 1e-9;

  GnbModel model;
  for (IrDirection cls : {IrDirection::Increase, IrDirection::Decrease}) {
    GnbClass& slot =
        cls == IrDirection::Increase ? model.increase : model.decrease;
    slot.mean.assign(k, 0.0);
    slot.variance.assign(k, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (data.labels[i] != cls) continue;
      ++count;
      for (std::size_t f = 0; f < k; ++f) slot.mean[f] += data.rows[i][f];
    }
    for (std::size_t f = 0; f < k; ++f) {
      slot.mean[f] /= static_cast<double>(count);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (data.labels[i] != cls) continue;
      for (std::size_t f = 0; f < k; ++f) {
        double d = data.rows[i][f] - slot.mean[f];
        slot.variance[f] += d * d;
      }
    }
    for (std::size_t f = 0; f < k; ++f) {
      slot.variance[f] =
          slot.variance[f] / static_cast<double>(count) + smoothing;
    }
    slot.prior = static_cast<double>(count) / static_cast<double>(n);
  }
  return model;
}

IrDirection predict_gnb(const GnbModel& model, const std::vector<double>& x) {
  if (x.size() != model.increase.mean.size()) {
    throw Error("feature dimension mismatch");
  }
  auto log_joint = [&](const GnbClass& c) {
    double s = std::log(c.prior);
    for (std::size_t f = 0; f < x.size(); ++f) {
      double d = x[f] - c.mean[f];
      s += -0.5 * std::log(2.0 * M_PI * c.variance[f]) -
           d * d / (2.0 * c.variance[f]);
    }
    return s;
  };
  return log_joint(model.increase) > log_joint(model.decrease)
             ? IrDirection::Increase
             : IrDirection::Decrease;
}

StumpEnsemble train_adaboost(const FeatureMatrix& data,
                             std::int64_t n_estimators, double learning_rate) {
  check_uniform(data);
  if (!has_both_classes(data.labels)) {
    throw Error("training data must contain both labels");
  }
  if (n_estimators < 1) throw Error("estimator count must be positive");

  const std::size_t n = data.rows.size();
  const std::size_t k = data.rows.front().size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = data.labels[i] == IrDirection::Increase ? 1.0 : -1.0;
  }

  // Sort orders never change across rounds; compute them once.
  std::vector<std::vector<std::size_t>> order(k);
  for (std::size_t f = 0; f < k; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::size_t a, std::size_t b) {
                       return data.rows[a][f] < data.rows[b][f];
                     });
  }

  StumpEnsemble model;
  model.learning_rate = learning_rate;
  model.n_estimators = n_estimators;

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const double inf = std::numeric_limits<double>::infinity();

  for (std::int64_t round = 0; round < n_estimators; ++round) {
    double w_pos = 0.0, w_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w_total += w[i];
      if (y[i] > 0) w_pos += w[i];
    }
    double w_neg = w_total - w_pos;

    // Exhaustive stump search. err_pos is the weighted error of the
    // polarity-+1 stump (predict Increase above the threshold); the opposite
    // polarity errs on exactly the complementary weight.
    double best_err = inf;
    Stump best;
    auto consider = [&](std::size_t f, double threshold, double below_pos,
                        double below_neg) {
      double err_pos = (w_neg - below_neg) + below_pos;
      double err_neg = w_total - err_pos;
      if (err_pos < best_err) {
        best_err = err_pos;
        best = {f, threshold, 1, 0.0};
      }
      if (err_neg < best_err) {
        best_err = err_neg;
        best = {f, threshold, -1, 0.0};
      }
    };
    for (std::size_t f = 0; f < k; ++f) {
      consider(f, -inf, 0.0, 0.0);
      double below_pos = 0.0, below_neg = 0.0;
      std::size_t i = 0;
      while (i < n) {
        double v = data.rows[order[f][i]][f];
        while (i < n && data.rows[order[f][i]][f] == v) {
          std::size_t idx = order[f][i];
          (y[idx] > 0 ? below_pos : below_neg) += w[idx];
          ++i;
        }
        if (i < n) {
          double next = data.rows[order[f][i]][f];
          double mid = v + (next - v) / 2.0;
          if (!(mid >= v && mid < next)) mid = v;
          consider(f, mid, below_pos, below_neg);
        }
      }
      consider(f, inf, below_pos, below_neg);
    }

    double eps = best_err / w_total;
    // The sweep accumulates weights in a different order than w_total, so a
    // perfect stump can surface as eps = +/-1e-17 and a hopeless one as
    // 0.5 - 1e-17. Snap both to their exact boundary.
    if (eps < 1e-12) eps = 0.0;
    if (eps >= 0.5 - 1e-12) break;
    double eps_c = std::max(eps, kMinEps);
    best.alpha = learning_rate * 0.5 * std::log((1.0 - eps_c) / eps_c);
    model.stumps.push_back(best);
    model.round_errors.push_back(eps);
    if (eps <= 0.0) break;

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double h = data.rows[i][best.feature] > best.threshold
                     ? static_cast<double>(best.polarity)
                     : static_cast<double>(-best.polarity);
      w[i] *= std::exp(-best.alpha * y[i] * h);
      sum += w[i];
    }
    for (auto& wi : w) wi /= sum;
  }
  return model;
}

IrDirection predict_adaboost(const StumpEnsemble& model,
                             const std::vector<double>& x) {
  double vote = 0.0;
  for (const auto& s : model.stumps) {
    if (s.feature >= x.size()) throw Error("feature dimension mismatch");
    double h = x[s.feature] > s.threshold ? 1.0 : -1.0;
    vote += s.alpha * h * static_cast<double>(s.polarity);
  }
  return vote > 0.0 ? IrDirection::Increase : IrDirection::Decrease;
}

Metrics evaluate(const std::vector<IrDirection>& pred,
                 const std::vector<IrDirection>& truth) {
  if (pred.size() != truth.size()) throw Error("prediction count mismatch");
  if (pred.empty()) throw Error("nothing to evaluate");

  auto score = [&](IrDirection cls) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      bool is_cls = truth[i] == cls;
      bool said_cls = pred[i] == cls;
      if (is_cls) ++support;
      if (said_cls && is_cls) ++tp;
      if (said_cls && !is_cls) ++fp;
      if (!said_cls && is_cls) ++fn;
    }
    ClassMetrics m;
    m.support = support;
    m.precision = tp + fp == 0 ? 0.0
                               : static_cast<double>(tp) /
                                     static_cast<double>(tp + fp);
    m.recall = tp + fn == 0
                   ? 0.0
                   : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
  };

  Metrics out;
  out.increase = score(IrDirection::Increase);
  out.decrease = score(IrDirection::Decrease);
  double n = static_cast<double>(pred.size());
  auto blend = [&](double a, double b) {
    return (a * static_cast<double>(out.increase.support) +
            b * static_cast<double>(out.decrease.support)) /
           n;
  };
  out.weighted_avg.precision =
      blend(out.increase.precision, out.decrease.precision);
  out.weighted_avg.recall = blend(out.increase.recall, out.decrease.recall);
  out.weighted_avg.f1 = blend(out.increase.f1, out.decrease.f1);
  out.weighted_avg.support = pred.size();
  return out;
}

FeatureMatrix to_features(const std::vector<IrRecord>& records) {
  FeatureMatrix m;
  m.rows.reserve(records.size());
  m.labels.reserve(records.size());
  for (const auto& rec : records) {
    m.rows.push_back(normalize_piv(rec.piv));
    m.labels.push_back(rec.sample.label);
  }
  return m;
}

std::vector<IrRecord> balance_records(const std::vector<IrRecord>& records,
                                      std::uint64_t seed) {
  std::vector<std::size_t> inc, dec;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (records[i].sample.label == IrDirection::Increase ? inc : dec).push_back(i);
  }
  auto& majority = inc.size() > dec.size() ? inc : dec;
  std::size_t keep = std::min(inc.size(), dec.size());
  if (keep == 0 || majority.size() <= keep) return records;
  Rng rng(mix_seed(seed, 0xba1a5cedull, 0));
  for (std::size_t i = majority.size() - 1; i > 0; --i) {
    std::size_t j = rng.next_below(i + 1);
    std::swap(majority[i], majority[j]);
  }
  majority.resize(keep);
  std::vector<std::size_t> all = inc;
  all.insert(all.end(), dec.begin(), dec.end());
  std::sort(all.begin(), all.end());
  std::vector<IrRecord> kept;
  kept.reserve(all.size());
  for (auto i : all) kept.push_back(records[i]);
  return kept;
}

Metrics run_experiment(const std::vector<IrRecord>& train_benign,
                       const std::vector<IrRecord>& test,
                       ClassifierKind classifier, std::int64_t n_estimators,
                       double learning_rate, bool balance,
                       std::uint64_t seed) {
  if (train_benign.empty()) throw Error("empty training set");
  if (test.empty()) throw Error("empty test set");

  std::vector<IrRecord> train =
      balance ? balance_records(train_benign, seed) : train_benign;

  FeatureMatrix train_m = to_features(train);
  FeatureMatrix test_m = to_features(test);

  std::vector<IrDirection> pred;
  pred.reserve(test_m.rows.size());
  if (classifier == ClassifierKind::Gnb) {
    GnbModel model = train_gnb(train_m);
    for (const auto& row : test_m.rows) pred.push_back(predict_gnb(model, row));
  } else {
    StumpEnsemble model =
        train_adaboost(train_m, n_estimators, learning_rate);
    for (const auto& row : test_m.rows) {
      pred.push_back(predict_adaboost(model, row));
    }
  }
  return evaluate(pred, test_m.labels);
}

void write_gnb(const GnbModel& model, const std::string& path) {
  std::ostringstream out;
  out << "gnb\n";
  out << "features = " << model.increase.mean.size() << '\n';
  auto emit = [&](const char* name, const GnbClass& c) {
    out << "class " << name << '\n';
    out << "prior = " << format_full(c.prior) << '\n';
    out << "mean =";
    for (double v : c.mean) out << ' ' << format_full(v);
    out << '\n';
    out << "variance =";
    for (double v : c.variance) out << ' ' << format_full(v);
    out << '\n';
  };
  emit("increase", model.increase);
  emit("decrease", model.decrease);
  atomic_write_file(path, out.str());
}

GnbModel read_gnb(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "gnb") {
    throw Error("not a gnb model file: " + path);
  }
  GnbModel model;
  GnbClass* current = nullptr;
  auto parse_vec = [](const std::string& s) {
    std::vector<double> v;
    std::istringstream ss(s);
    double x;
    while (ss >> x) v.push_back(x);
    return v;
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("class ", 0) == 0) {
      std::string name = trim(line.substr(6));
      if (name == "increase") current = &model.increase;
      else if (name == "decrease") current = &model.decrease;
      else throw Error("unknown class in model file: " + name);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "features") continue;
    if (!current) throw Error("model field before class header: " + key);
    try {
      if (key == "prior") current->prior = std::stod(value);
      else if (key == "mean") current->mean = parse_vec(value);
      else if (key == "variance") current->variance = parse_vec(value);
    } catch (const std::exception&) {
      throw Error("bad model line: " + line);
    }
  }
  if (model.increase.mean.empty() || model.decrease.mean.empty()) {
    throw Error("incomplete gnb model: " + path);
  }
  return model;
}

void write_ensemble(const StumpEnsemble& model, const std::string& path) {
  std::ostringstream out;
  out << "adaboost\n";
  out << "n_estimators = " << model.n_estimators << '\n';
  out << "learning_rate = " << format_full(model.learning_rate) << '\n';
  out << "feature,threshold,polarity,alpha\n";
  for (const auto& s : model.stumps) {
    out << s.feature << ',' << format_full(s.threshold) << ',' << s.polarity
        << ',' << format_full(s.alpha) << '\n';
  }
  atomic_write_file(path, out.str());
}

StumpEnsemble read_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "adaboost") {
    throw Error("not an adaboost model file: " + path);
  }
  StumpEnsemble model;
  bool in_stumps = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line == "feature,threshold,polarity,alpha") {
      in_stumps = true;
      continue;
    }
    if (!in_stumps) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      try {
        if (key == "n_estimators") model.n_estimators = std::stoll(value);
        else if (key == "learning_rate") model.learning_rate = std::stod(value);
      } catch (const std::exception&) {
        throw Error("bad model line: " + line);
      }
      continue;
    }
    auto f = csv_split(line);
    if (f.size() != 4) throw Error("bad stump line: " + line);
    try {
      Stump s;
      s.feature = static_cast<std::size_t>(std::stoull(f[0]));
      s.threshold = std::stod(f[1]);
      s.polarity = std::stoi(f[2]);
      s.alpha = std::stod(f[3]);
      model.stumps.push_back(s);
    } catch (const std::exception&) {
      throw Error("bad stump line: " + line);
    }
  }
  return model;
}

}  // namespace cascadia
