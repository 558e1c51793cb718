#include "blocknorm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "blocknorm/errors.hpp"

namespace blocknorm {

namespace {

void check_scores(std::span<const double> scores, const char* side) {
    if (scores.empty()) throw InputError(std::string(side) + " scores are empty");
    for (double s : scores) {
        if (!std::isfinite(s)) throw InputError(std::string("non-finite ") + side + " score");
    }
}

}  // namespace

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    check_scores(id_scores, "ID");
    check_scores(ood_scores, "OOD");
    const std::size_t n = id_scores.size(), m = ood_scores.size();

    struct Item {
        double score;
        bool is_id;
    };
    std::vector<Item> pooled;
    pooled.reserve(n + m);
    for (double s : id_scores) pooled.push_back({s, true});
    for (double s : ood_scores) pooled.push_back({s, false});
    std::sort(pooled.begin(), pooled.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

    // Sum of ID mid-ranks (1-based); each tie group shares (first + last) / 2.
    // Twice the rank keeps everything integral until the final division.
    double id_rank_sum_x2 = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        std::size_t ids = 0;
        while (j < pooled.size() && pooled[j].score == pooled[i].score) {
            ids += pooled[j].is_id ? 1 : 0;
            ++j;
        }
        id_rank_sum_x2 += static_cast<double>(ids) * static_cast<double>(i + 1 + j);
        i = j;
    }
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    const double u_x2 = id_rank_sum_x2 - dn * (dn + 1.0);
    return u_x2 / (2.0 * dn * dm);
}

double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores, double target_tpr) {
    check_scores(ood_scores, "OOD");
    const double gamma = calibrate_threshold(id_scores, target_tpr);
    std::size_t false_pos = 0;
    for (double s : ood_scores) {
        if (decide(s, gamma) == Decision::ID) ++false_pos;
    }
    return static_cast<double>(false_pos) / static_cast<double>(ood_scores.size());
}

EvalResult evaluate(std::span<const double> id_scores, std::span<const double> ood_scores, double target_tpr) {
    EvalResult r;
    r.auroc = auroc(id_scores, ood_scores);
    r.fpr_at_tpr = fpr_at_tpr(id_scores, ood_scores, target_tpr);
    r.target_tpr = target_tpr;
    r.n_id = id_scores.size();
    r.n_ood = ood_scores.size();
    return r;
}

EvalReport evaluate_scores(const ScoreSet& scores, double target_tpr) {
    if (scores.ood_scores.empty()) throw InputError("score set has no OOD sets");
    EvalReport report;
    report.method = scores.method;
    report.target_tpr = target_tpr;
    double auroc_sum = 0.0, fpr_sum = 0.0;
    for (const auto& [name, ood] : scores.ood_scores) {
        if (ood.empty()) throw InputError("OOD set '" + name + "' is empty");
        EvalResult r = evaluate(scores.id_scores, ood, target_tpr);
        auroc_sum += r.auroc;
        fpr_sum += r.fpr_at_tpr;
        report.per_set.emplace(name, r);
    }
    const auto k = static_cast<double>(report.per_set.size());
    report.mean_auroc = auroc_sum / k;
    report.mean_fpr_at_tpr = fpr_sum / k;
    return report;
}

}  // namespace blocknorm
