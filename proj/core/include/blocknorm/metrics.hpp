#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "blocknorm/scoring.hpp"

namespace blocknorm {

struct EvalResult {
    double auroc = 0.0;
    double fpr_at_tpr = 0.0;
    double target_tpr = kDefaultTargetTpr;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
};

// Probability that an ID score outranks an OOD score, ties counting one half
// (Mann-Whitney U / (n_id * n_ood)), from mid-ranks of the pooled sample in
// O((n+m) log(n+m)). InputError when either side is empty or non-finite.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

// Fraction of OOD scores >= calibrate_threshold(id_scores, target_tpr).
double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double target_tpr = kDefaultTargetTpr);

EvalResult evaluate(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double target_tpr = kDefaultTargetTpr);

struct EvalReport {
    ScoreMethod method = ScoreMethod::FeatureNorm;
    double target_tpr = kDefaultTargetTpr;
    std::map<std::string, EvalResult> per_set;
    // Arithmetic means over OOD sets.
    double mean_auroc = 0.0;
    double mean_fpr_at_tpr = 0.0;
};

// Evaluates every OOD set of a score set against its ID scores.
// InputError when there are no OOD sets or any set is empty.
EvalReport evaluate_scores(const ScoreSet& scores, double target_tpr = kDefaultTargetTpr);

}  // namespace blocknorm
