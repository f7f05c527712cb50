#include "evisec/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <set>

namespace evisec {

namespace {

void check_nonempty(std::span<const double> id_scores, std::span<const double> ood_scores) {
    if (id_scores.empty() || ood_scores.empty())
        throw ValidationError("metric needs at least one score in each class");
}

// counts at threshold th with rule score >= th -> flagged positive
struct Counts {
    long tp = 0, fp = 0;
};

Counts counts_at(std::span<const double> id_scores, std::span<const double> ood_scores,
                 double th) {
    Counts c;
    for (double s : ood_scores) c.tp += s >= th;
    for (double s : id_scores) c.fp += s >= th;
    return c;
}

}  // namespace

double aggregate_window_score(std::span<const double> per_target_u, Aggregation mode) {
    if (per_target_u.empty()) throw ValidationError("aggregate_window_score: empty input");
    if (mode == Aggregation::max)
        return *std::max_element(per_target_u.begin(), per_target_u.end());
    double sum = 0.0;
    for (double u : per_target_u) sum += u;
    return sum / static_cast<double>(per_target_u.size());
}

DetectionResult detect(double score, double gamma) {
    return {score, gamma, score >= gamma ? 1 : 0};
}

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    check_nonempty(id_scores, ood_scores);
    std::vector<double> id_sorted(id_scores.begin(), id_scores.end());
    std::sort(id_sorted.begin(), id_sorted.end());
    double wins = 0.0;
    for (double s : ood_scores) {
        const auto lo = std::lower_bound(id_sorted.begin(), id_sorted.end(), s);
        const auto hi = std::upper_bound(id_sorted.begin(), id_sorted.end(), s);
        wins += static_cast<double>(lo - id_sorted.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return wins / (static_cast<double>(id_scores.size()) * static_cast<double>(ood_scores.size()));
}

double aupr(std::span<const double> id_scores, std::span<const double> ood_scores) {
    check_nonempty(id_scores, ood_scores);
    std::set<double, std::greater<>> thresholds(ood_scores.begin(), ood_scores.end());
    thresholds.insert(id_scores.begin(), id_scores.end());
    const double m = static_cast<double>(ood_scores.size());
    double area = 0.0, prev_recall = 0.0;
    for (double th : thresholds) {
        const Counts c = counts_at(id_scores, ood_scores, th);
        if (c.tp + c.fp == 0) continue;
        const double recall = c.tp / m;
        const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

double fpr95(std::span<const double> id_scores, std::span<const double> ood_scores) {
    check_nonempty(id_scores, ood_scores);
    std::set<double> thresholds(ood_scores.begin(), ood_scores.end());
    thresholds.insert(id_scores.begin(), id_scores.end());
    const double m = static_cast<double>(ood_scores.size());
    const double n = static_cast<double>(id_scores.size());
    double best = 1.0;
    for (double th : thresholds) {
        const Counts c = counts_at(id_scores, ood_scores, th);
        if (c.tp / m >= 0.95) best = std::min(best, c.fp / n);
    }
    return best;
}

double f1(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw ValidationError("f1: prediction/label length mismatch");
    if (predictions.empty()) throw ValidationError("f1: empty input");
    int k = 0;
    for (size_t i = 0; i < labels.size(); ++i)
        k = std::max({k, predictions[i] + 1, labels[i] + 1});
    double macro = 0.0;
    for (int c = 0; c < k; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < labels.size(); ++i) {
            const bool p = predictions[i] == c, l = labels[i] == c;
            tp += p && l;
            fp += p && !l;
            fn += !p && l;
        }
        const double denom = 2.0 * tp + fp + fn;
        macro += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return macro / k;
}

std::vector<double> baseline_scores(const Mat& logits, BaselineKind kind) {
    std::vector<double> out;
    out.reserve(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Vec row = logits.row(i).transpose();
        Vec p = (row.array() - row.maxCoeff()).exp();
        p /= p.sum();
        if (kind == BaselineKind::msp) {
            out.push_back(1.0 - p.maxCoeff());
        } else {
            double h = 0.0;
            for (Eigen::Index j = 0; j < p.size(); ++j)
                if (p(j) > 0.0) h -= p(j) * std::log(p(j));
            out.push_back(h);
        }
    }
    return out;
}

std::vector<CurvePoint> detection_curve(std::span<const double> id_scores,
                                        std::span<const double> ood_scores) {
    check_nonempty(id_scores, ood_scores);
    std::set<double, std::greater<>> thresholds(ood_scores.begin(), ood_scores.end());
    thresholds.insert(id_scores.begin(), id_scores.end());
    const double m = static_cast<double>(ood_scores.size());
    const double n = static_cast<double>(id_scores.size());
    std::vector<CurvePoint> curve;
    for (double th : thresholds) {
        const Counts c = counts_at(id_scores, ood_scores, th);
        CurvePoint pt{};
        pt.threshold = th;
        pt.tpr = c.tp / m;
        pt.fpr = c.fp / n;
        pt.recall = pt.tpr;
        pt.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 1.0;
        curve.push_back(pt);
    }
    return curve;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "threshold,tpr,fpr,precision,recall\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& p : curve)
        out << p.threshold << "," << p.tpr << "," << p.fpr << "," << p.precision << ","
            << p.recall << "\n";
}

void write_scores_csv(std::ostream& out, std::span<const double> scores) {
    out << std::hexfloat;
    for (double s : scores) out << s << "\n";
}

std::vector<double> read_scores_csv(std::istream& in) {
    std::vector<double> scores;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        scores.push_back(std::strtod(line.c_str(), nullptr));
    }
    return scores;
}

}  // namespace evisec
