// Point-cloud segmentation network over per-cell features: per-stage
// farthest-point-sampled centers, KNN grouping, a learnable affine
// normalization of grouped features, residual MLP blocks before and after
// max-pool aggregation, and an inverse-distance feature-propagation decoder
// back to every cell.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "meshres/features.hpp"
#include "meshres/tensor.hpp"

namespace meshres {

struct ModelConfig {
    int stages = 2;
    std::vector<int> channels = {32, 64};           // width per stage
    std::vector<double> center_fractions = {0.25, 0.0625}; // of input cell count
    int k_neighbors = 16;
    int pre_blocks = 2;
    int pos_blocks = 2;
    int num_classes = kNumClasses;
    int input_dims = kFeatureDims;
    double affine_eps = 1e-5;

    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

struct ModelParams {
    ModelConfig config;
    std::uint32_t version = 1;
    std::vector<std::pair<std::string, Tensor>> tensors; // fixed order

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
};

// Seeded parameter initialization (uniform He-style fan-in scaling; affine
// alpha = 1, beta = 0, biases = 0).
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

struct TrainConfig {
    int epochs = 200;
    double lr0 = 0.001;
    int lr_step = 120;
    double lr_gamma = 0.5;
    int batch_size = 16;
    std::uint64_t seed = 0;

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

// Greedy farthest-point sampling over 3D points, seeded at index 0; ties
// take the smallest index.
std::vector<int> fps(const std::vector<Vec3>& points, int m);

// Exact k nearest neighbors per query, ascending distance, ties to the
// smaller index.
std::vector<std::vector<int>> knn(const std::vector<Vec3>& points,
                                  const std::vector<Vec3>& queries, int k);

// Standalone geometric affine: group_feats (m*k) x c flattened, center_feats
// m x c. out = alpha * (f_ij - f_i) / (sigma + eps) + beta with sigma the
// population std over every (f_ij - f_i) entry.
std::vector<double> geometric_affine(const std::vector<double>& group_feats,
                                     const std::vector<double>& center_feats, int m, int k,
                                     int c, const std::vector<double>& alpha,
                                     const std::vector<double>& beta, double eps);

// Geometry-dependent, parameter-independent part of a forward pass; safe to
// compute once per surface and reuse across epochs.
struct GroupingPlan {
    int n_cells = 0;
    std::vector<std::vector<int>> centers;    // per stage, indices into the previous level
    std::vector<std::vector<int>> group_nbrs; // per stage, m*k indices into the previous level
    std::vector<int> group_k;                 // group size per stage (k, fewer on tiny inputs)
    std::vector<std::vector<int>> prop_nbrs;  // per level, |level| * prop_k into level+1
    std::vector<std::vector<double>> prop_w;  // matching normalized IDW weights
    std::vector<int> prop_k;                  // neighbors used per level (3, fewer when tiny)
};

GroupingPlan build_grouping(const std::vector<Vec3>& cell_positions, const ModelConfig& config);

// Logits for every cell, N x num_classes. Deterministic given (params,
// features). The plan must have been built for these features' barycenters.
std::vector<double> forward(const FeatureMatrix& features, const ModelParams& params,
                            const GroupingPlan& plan);
std::vector<double> forward(const FeatureMatrix& features, const ModelParams& params);

// Mean cross-entropy of logits (N x c) against labels.
double loss_ce(const std::vector<double>& logits, int num_classes,
               const std::vector<ClassId>& labels);

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long t = 0;
};

// Standard Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
void adam_step(ModelParams& params, AdamState& state, double lr);

double lr_schedule(int epoch, const TrainConfig& config);

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss; // empty when no validation set
    int best_epoch = -1;
};

// Mini-batch training; returns the parameters at the best validation loss
// (final parameters when `val` is empty). Deterministic for a fixed seed.
std::pair<ModelParams, TrainHistory> train(const std::vector<LabeledFeatures>& train_set,
                                           const std::vector<LabeledFeatures>& val_set,
                                           const ModelConfig& model_config,
                                           const TrainConfig& train_config);

struct Prediction {
    std::vector<ClassId> labels;
    std::vector<double> probabilities; // N x num_classes
};

Prediction predict(const ModelParams& params, const FeatureMatrix& features);

struct InferenceTiming {
    double mean_ms = 0.0, p50_ms = 0.0, min_ms = 0.0;
    int repeats = 0;
    int cells = 0;
};

// Wall-clock per full forward pass (grouping included); one warm-up run is
// excluded from the statistics.
InferenceTiming measure_inference(const ModelParams& params, const FeatureMatrix& features,
                                  int repeats);

// MRCK checkpoint: {"MRCK", version u32, config JSON, tensor count u32},
// then per tensor: name, rank, dims, f64 little-endian values.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

} // namespace meshres
