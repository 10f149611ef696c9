#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synapseroute {

struct TrainMeta {
    std::uint64_t seed = 0;
    double l2_lambda = 1.0;
    int max_iters = 500;
    int converged_at_iter = 0;  // iterations actually run
    std::size_t train_size = 0;
    std::string timestamp;  // filled by callers that care; empty keeps artifacts reproducible
};

// Logistic-regression router: probability that a question should go to the
// thinking mode.
struct RouterModel {
    std::size_t dim = 0;
    std::vector<double> weights;
    double bias = 0.0;
    double threshold = 0.5;
    std::string positive_class = "thinking";
    std::string embedding_model_id;
    TrainMeta train_meta;

    void validate() const;
};

struct TrainConfig {
    double l2_lambda = 1.0;
    int max_iters = 500;
    double tolerance = 1e-8;  // on per-iteration loss decrease
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic full-batch gradient descent on the L2-regularized logistic
// loss (bias unpenalized), zero-initialized, with a guaranteed-monotone step
// rule. The model's threshold is left at 0.5; callers pick a real one via
// select_threshold_max_f1. Pass loss_trace to capture the per-iteration loss
// sequence (element 0 = loss at zero weights).
RouterModel train_logistic(const std::vector<std::vector<float>>& features,
                           const std::vector<int>& targets, const TrainConfig& config,
                           std::vector<double>* loss_trace = nullptr);

double predict_proba(const RouterModel& model, const std::vector<float>& x);

// Maximizes F1 of the positive class over candidate thresholds (midpoints of
// consecutive distinct probabilities, plus 0 and 1). Ties prefer the larger
// threshold, i.e. routing fewer items to the expensive mode.
double select_threshold_max_f1(const std::vector<double>& probs, const std::vector<int>& targets);

// Area under the ROC curve via rank summation (ties count half).
double auc(const std::vector<double>& probs, const std::vector<int>& targets);

// F1 of predicting positive when prob >= threshold; helper shared with the
// threshold search and its tests.
double f1_at_threshold(const std::vector<double>& probs, const std::vector<int>& targets,
                       double threshold);

void save_model(const RouterModel& model, const std::filesystem::path& path);
RouterModel load_model(const std::filesystem::path& path);

}  // namespace synapseroute
