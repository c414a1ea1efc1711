#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascadia/influence.hpp"

namespace cascadia {

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<IrDirection> labels;
};

struct GnbClass {
  double prior = 0.0;
  std::vector<double> mean;
  std::vector<double> variance;  // after smoothing, strictly positive
};

struct GnbModel {
  GnbClass increase;
  GnbClass decrease;
};

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;  // vote for Increase when x[feature] > threshold
  double alpha = 0.0;
};

struct StumpEnsemble {
  std::vector<Stump> stumps;
  double learning_rate = 1.0;
  std::int64_t n_estimators = 50;
  std::vector<double> round_errors;  // weighted error of each kept round
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  ClassMetrics increase;
  ClassMetrics decrease;
  ClassMetrics weighted_avg;  // support-weighted; support = total samples
};

// L1: divide by the component sum; the zero vector stays zero.
std::vector<double> normalize_piv(const Piv& piv);

GnbModel train_gnb(const FeatureMatrix& data);
IrDirection predict_gnb(const GnbModel& model, const std::vector<double>& x);

StumpEnsemble train_adaboost(const FeatureMatrix& data,
                             std::int64_t n_estimators = 50,
                             double learning_rate = 1.0);
IrDirection predict_adaboost(const StumpEnsemble& model,
                             const std::vector<double>& x);

Metrics evaluate(const std::vector<IrDirection>& pred,
                 const std::vector<IrDirection>& truth);

enum class ClassifierKind { Gnb, AdaBoost };

// Normalized PIVs from the records; labels from each record's IR direction.
FeatureMatrix to_features(const std::vector<IrRecord>& records);

// Subsamples the majority direction down to the minority count (seeded
// shuffle, original order preserved among the kept records).
std::vector<IrRecord> balance_records(const std::vector<IrRecord>& records,
                                      std::uint64_t seed);

// Train on benign records, evaluate on the test records. balance subsamples
// the training majority class down to the minority count (seeded shuffle).
Metrics run_experiment(const std::vector<IrRecord>& train_benign,
                       const std::vector<IrRecord>& test,
                       ClassifierKind classifier, std::int64_t n_estimators,
                       double learning_rate, bool balance, std::uint64_t seed);

void write_gnb(const GnbModel& model, const std::string& path);
GnbModel read_gnb(const std::string& path);
void write_ensemble(const StumpEnsemble& model, const std::string& path);
StumpEnsemble read_ensemble(const std::string& path);

}  // namespace cascadia
