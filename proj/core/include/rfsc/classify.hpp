#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfsc/math.hpp"

namespace rfsc {

enum class SvmKernel { Linear, Rbf };

std::string kernel_name(SvmKernel kernel);
SvmKernel kernel_from_name(const std::string& name);

struct SvmParams {
  double c = 1e5;
  SvmKernel kernel = SvmKernel::Linear;
  double gamma = 1e-4;  // rbf width; recorded but inert for linear
  double tol = 1e-3;  // KKT violation tolerance for the solver
  // iteration cap, max_passes * n working-set steps; generous because
  // pairwise steps crawl through the flat dual valleys that show up
  // with low-rank kernels and large C
  int max_passes = 10000;
};

double kernel_value(SvmKernel kernel, double gamma, std::span<const double> a,
                    std::span<const double> b);

/// Solution of one soft-margin binary problem, labels in {+1, -1}.
/// Solved by sequential minimal optimization with second-order
/// working-set selection and maintained gradient.
struct BinarySvc {
  std::vector<double> alpha;  // one dual variable per training row
  double bias = 0.0;
  double objective = 0.0;  // dual objective at the solution
  std::size_t iterations = 0;
  bool converged = false;
};

BinarySvc solve_binary_svc(const Matrix& x, const std::vector<int>& y,
                           const SvmParams& params);

/// One one-vs-one machine. Linear machines are condensed to a weight
/// vector; rbf machines keep their support vectors and dual coefficients.
struct PairwiseMachine {
  std::size_t class_a = 0;  // positive decision votes class_a
  std::size_t class_b = 0;
  std::vector<double> weights;
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double bias = 0.0;
};

struct SvmModel {
  std::vector<std::string> classes;        // sorted lexicographically
  std::vector<PairwiseMachine> machines;   // all pairs (a, b) with a < b
  SvmParams params;
  std::size_t feature_count = 0;
};

/// Trains a one-vs-one multiclass soft-margin classifier. Deterministic:
/// identical inputs give an identical model.
SvmModel svm_train(const Matrix& x, const std::vector<std::string>& labels,
                   const SvmParams& params);

double machine_decision(const PairwiseMachine& machine, const SvmParams& params,
                        std::span<const double> row);

std::vector<std::string> svm_predict(const SvmModel& model, const Matrix& x);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  bool precision_defined = false;  // false when the class was never predicted
  bool recall_defined = false;     // false when the class never occurs
};

struct EvalMetrics {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<int>> confusion;  // [true index][predicted index]
};

EvalMetrics evaluate_predictions(const std::vector<std::string>& classes,
                                 const std::vector<std::string>& y_true,
                                 const std::vector<std::string>& y_pred);

EvalMetrics svm_evaluate(const SvmModel& model, const Matrix& x,
                         const std::vector<std::string>& labels);

/// Stratified fold assignment: fold_of[i] in [0, folds) with each
/// class spread evenly. Throws StratificationError when a class has
/// fewer members than folds.
std::vector<std::size_t> stratified_folds(const std::vector<std::string>& labels,
                                          std::size_t folds, std::uint64_t seed);

struct GridPoint {
  SvmParams params;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  SvmParams best;
  std::vector<GridPoint> table;  // one row per grid point, in grid order
};

/// Mean cross-validated accuracy per grid point; best point wins with
/// ties broken by smaller C, then linear before rbf, then smaller gamma.
GridSearchResult grid_search_cv(const Matrix& x, const std::vector<std::string>& labels,
                                const std::vector<SvmParams>& grid, std::size_t folds,
                                std::uint64_t seed);

std::vector<SvmParams> default_svm_grid(double tol = 1e-3, int max_passes = 10000);

}  // namespace rfsc
