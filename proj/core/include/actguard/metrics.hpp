#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "actguard/types.hpp"

namespace actguard::metrics {

/// One episode's scalar uncertainty score with its outcome label.
struct OutcomeScore {
  double score = 0.0;
  Outcome outcome = Outcome::Failure;
};

/// Spearman rank correlation between scores and outcomes (Success = 1,
/// Failure = 0), with average ranks for ties. Requires at least two pairs
/// and variation in both coordinates.
double spearman_rho(const std::vector<OutcomeScore>& pairs);

/// Probability that a failure score exceeds a success score, ties counted
/// half: (#{f > s} + 0.5 #{f = s}) / (|F| |S|). Pairwise computation.
double vargha_delaney_a12(const std::vector<double>& failure_scores,
                          const std::vector<double>& success_scores);

/// Effect size d = 2 |a12 - 1/2|.
double cohens_d_from_a12(double a12);

/// Area under the ROC curve with failures as the positive class, computed
/// by the rank-sum route (average ranks for ties). Numerically equal to
/// vargha_delaney_a12 on the same groups.
double roc_auc(const std::vector<OutcomeScore>& pairs);

/// Summary table over one episode-score file. failure_exceeds is the raw
/// probability P(failure score > success score); the table reports both its
/// lower-is-better complement (a12_low) and itself as AUC, so the two
/// orientations cannot be confused.
struct UncertaintyReport {
  std::string score_kind;
  std::size_t n_success = 0;
  std::size_t n_failure = 0;
  double spearman = 0.0;        ///< signed rho
  double failure_exceeds = 0.0; ///< pairwise A12, failure-exceeds orientation
  double a12_low = 0.0;         ///< 1 - failure_exceeds
  double cohens_d = 0.0;
  double auc = 0.0;             ///< rank-sum AUC; equals failure_exceeds
};

/// Computes all metrics for one set of labeled episode scores. The AUC comes
/// from the rank-sum route and A12 from the pairwise route, so the report
/// itself cross-checks the two implementations.
UncertaintyReport compute_report(const std::vector<OutcomeScore>& pairs,
                                 const std::string& score_kind);

/// Aligned plain-text table (|rho|, A12, d, AUC columns).
std::string report_to_text(const UncertaintyReport& report);

/// JSON document with the same content, stable key order.
std::string report_to_json(const UncertaintyReport& report);

}  // namespace actguard::metrics
