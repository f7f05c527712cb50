#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evisec/common.hpp"

namespace evisec {

enum class Aggregation { mean, max };
enum class BaselineKind { msp, entropy };

struct DetectionResult {
    double score = 0.0;
    double threshold = 0.5;
    int flag = 0;  // 1 iff score >= threshold
};

struct MetricsReport {
    double auroc = 0.0;
    double aupr = 0.0;
    double fpr95 = 0.0;
    double f1 = 0.0;
    int num_id = 0;
    int num_ood = 0;
};

struct CurvePoint {
    double threshold, tpr, fpr, precision, recall;
};

double aggregate_window_score(std::span<const double> per_target_u, Aggregation mode);

DetectionResult detect(double score, double gamma = 0.5);

// OOD is the positive class throughout; higher score = more OOD.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);
double aupr(std::span<const double> id_scores, std::span<const double> ood_scores);
double fpr95(std::span<const double> id_scores, std::span<const double> ood_scores);

// macro-averaged over classes
double f1(const std::vector<int>& predictions, const std::vector<int>& labels);

// one score per logits row; msp = 1 - max softmax, entropy = Shannon
// entropy of the softmax
std::vector<double> baseline_scores(const Mat& logits, BaselineKind kind);

std::vector<CurvePoint> detection_curve(std::span<const double> id_scores,
                                        std::span<const double> ood_scores);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

void write_scores_csv(std::ostream& out, std::span<const double> scores);
std::vector<double> read_scores_csv(std::istream& in);

}  // namespace evisec
