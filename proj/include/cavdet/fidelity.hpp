// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cavdet/count_stream.hpp"

namespace cavdet {

// Units follow the comparison-table convention: rates in counts/ms,
// measurement windows in us. Conversions happen inside these functions only.
struct DetectorRates {
  double signal_per_ms = 0.0;      // S (or S1, the <N_eff>=1 rate)
  double background_per_ms = 0.0;  // B
  double prior_bright = 0.5;       // p

  void validate() const;
};

// eta = 1 - exp(-S1 T): probability of >= 1 signal photon in T.
double efficiency(const DetectorRates& rates, double t_us);

// F_K = (1-p) Q(K, BT) + p [1 - Q(K, (S+B)T)] with Q the regularized upper
// incomplete gamma, i.e. the Poisson CDF below threshold K.
double fidelity(const DetectorRates& rates, int k_threshold, double t_us);

struct FidelityOptimum {
  double t_max_us = 0.0;
  double f_max = 0.0;
};

// Bracketed 1-D maximization of F_K over T. For p = 1/2 the optimum has the
// closed form T = K ln(1 + S/B) / S, which seeds the bracket.
FidelityOptimum optimal_time(const DetectorRates& rates, int k_threshold);

// Closed-form argmax, valid whenever the stationary point is interior:
// T* = [K ln((S+B)/B) + ln(p/(1-p))] / S.
double optimal_time_closed_form(const DetectorRates& rates, int k_threshold);

// Outcome probabilities for the two states x two identifications. Rows are
// the identified state, columns the actual state; diagonal = correct.
struct ConfusionTable {
  double dark_identified_dark = 0.0;
  double dark_identified_bright = 0.0;
  double bright_identified_dark = 0.0;
  double bright_identified_bright = 0.0;

  double fidelity() const {
    return dark_identified_dark + bright_identified_bright;
  }
};
ConfusionTable confusion_table(const DetectorRates& rates, int k_threshold,
                               double t_us);

struct FidelityCurve {
  int k_threshold = 1;
  std::vector<double> t_us;
  std::vector<double> f;
  FidelityOptimum optimum;
};
FidelityCurve fidelity_curve(const DetectorRates& rates, int k_threshold,
                             double t_max_us, int n_points = 256);

struct EmpiricalFidelity {
  double fraction_correct = 0.0;
  double std_error = 0.0;   // binomial, normal approximation
  double resolution = 0.0;  // 1 / n_trials
  size_t n_trials = 0;
};

// Classify each labelled trial by counts within [0, T] against threshold K.
EmpiricalFidelity fidelity_from_counts(const CountStream& bright,
                                       const CountStream& dark,
                                       int k_threshold, double t_us);

}  // namespace cavdet
