#include "actguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "actguard/errors.hpp"

namespace actguard::metrics {

namespace {

void check_finite(const std::vector<double>& scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidInputError("scores contain a non-finite value");
    }
  }
}

/// Ranks 1..n with ties receiving the average of the ranks they span.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    // Positions i..j (0-based) share the average rank in 1-based terms.
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

double spearman_rho(const std::vector<OutcomeScore>& pairs) {
  if (pairs.size() < 2) {
    throw InvalidInputError("spearman_rho requires at least two pairs");
  }
  std::vector<double> scores;
  std::vector<double> outcomes;
  scores.reserve(pairs.size());
  outcomes.reserve(pairs.size());
  for (const auto& p : pairs) {
    scores.push_back(p.score);
    outcomes.push_back(p.outcome == Outcome::Success ? 1.0 : 0.0);
  }
  check_finite(scores);
  const bool scores_vary =
      *std::max_element(scores.begin(), scores.end()) >
      *std::min_element(scores.begin(), scores.end());
  const bool outcomes_vary =
      *std::max_element(outcomes.begin(), outcomes.end()) >
      *std::min_element(outcomes.begin(), outcomes.end());
  if (!scores_vary || !outcomes_vary) {
    throw UndefinedCorrelationError(
        "correlation is undefined when scores or outcomes are constant");
  }
  return pearson(average_ranks(scores), average_ranks(outcomes));
}

double vargha_delaney_a12(const std::vector<double>& failure_scores,
                          const std::vector<double>& success_scores) {
  if (failure_scores.empty() || success_scores.empty()) {
    throw InvalidInputError("both score groups must be non-empty");
  }
  check_finite(failure_scores);
  check_finite(success_scores);
  double wins = 0.0;
  for (double f : failure_scores) {
    for (double s : success_scores) {
      if (f > s) {
        wins += 1.0;
      } else if (f == s) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(failure_scores.size()) *
                 static_cast<double>(success_scores.size()));
}

double cohens_d_from_a12(double a12) {
  if (!(a12 >= 0.0 && a12 <= 1.0)) {
    throw InvalidInputError("a12 must lie in [0, 1]");
  }
  return 2.0 * std::abs(a12 - 0.5);
}

double roc_auc(const std::vector<OutcomeScore>& pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  std::size_t n_failure = 0;
  for (const auto& p : pairs) {
    scores.push_back(p.score);
    n_failure += p.outcome == Outcome::Failure ? 1 : 0;
  }
  check_finite(scores);
  const std::size_t n_success = pairs.size() - n_failure;
  if (n_failure == 0 || n_success == 0) {
    throw InvalidInputError("roc_auc requires both outcome classes");
  }
  // Rank-sum (Mann-Whitney) formulation with average ranks for ties.
  const std::vector<double> ranks = average_ranks(scores);
  double failure_rank_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].outcome == Outcome::Failure) {
      failure_rank_sum += ranks[i];
    }
  }
  const auto nf = static_cast<double>(n_failure);
  const auto ns = static_cast<double>(n_success);
  return (failure_rank_sum - nf * (nf + 1.0) / 2.0) / (nf * ns);
}

UncertaintyReport compute_report(const std::vector<OutcomeScore>& pairs,
                                 const std::string& score_kind) {
  std::vector<double> failures;
  std::vector<double> successes;
  for (const auto& p : pairs) {
    (p.outcome == Outcome::Failure ? failures : successes).push_back(p.score);
  }
  UncertaintyReport report;
  report.score_kind = score_kind;
  report.n_success = successes.size();
  report.n_failure = failures.size();
  report.spearman = spearman_rho(pairs);
  report.failure_exceeds = vargha_delaney_a12(failures, successes);
  report.a12_low = 1.0 - report.failure_exceeds;
  report.cohens_d = cohens_d_from_a12(report.failure_exceeds);
  report.auc = roc_auc(pairs);
  return report;
}

std::string report_to_text(const UncertaintyReport& report) {
  char buffer[256];
  std::string out;
  out += "score            n_succ  n_fail  |rho|    A12      d        AUC\n";
  std::snprintf(buffer, sizeof(buffer),
                "%-16s %-7zu %-7zu %-8.4f %-8.4f %-8.4f %-8.4f\n",
                report.score_kind.c_str(), report.n_success, report.n_failure,
                std::abs(report.spearman), report.a12_low, report.cohens_d,
                report.auc);
  out += buffer;
  out += "(A12 is lower-is-better: A12 = 1 - AUC by construction)\n";
  return out;
}

std::string report_to_json(const UncertaintyReport& report) {
  nlohmann::json j;
  j["score_kind"] = report.score_kind;
  j["n_success"] = report.n_success;
  j["n_failure"] = report.n_failure;
  j["spearman"] = report.spearman;
  j["spearman_abs"] = std::abs(report.spearman);
  j["failure_exceeds"] = report.failure_exceeds;
  j["a12_low"] = report.a12_low;
  j["cohens_d"] = report.cohens_d;
  j["auc"] = report.auc;
  return j.dump(2) + "\n";
}

}  // namespace actguard::metrics
