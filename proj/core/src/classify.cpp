#include "rfsc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rfsc/errors.hpp"
#include "rfsc/rng.hpp"

namespace rfsc {

std::string kernel_name(SvmKernel kernel) {
  return kernel == SvmKernel::Linear ? "linear" : "rbf";
}

SvmKernel kernel_from_name(const std::string& name) {
  if (name == "linear") return SvmKernel::Linear;
  if (name == "rbf") return SvmKernel::Rbf;
  throw InvalidArgument("unknown kernel '" + name + "' (linear, rbf)");
}

double kernel_value(SvmKernel kernel, double gamma, std::span<const double> a,
                    std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("kernel: vector length mismatch");
  if (kernel == SvmKernel::Linear) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

void validate_params(const SvmParams& p) {
  if (!(p.c > 0.0)) throw InvalidArgument("svm: C must be > 0");
  if (p.kernel == SvmKernel::Rbf && !(p.gamma > 0.0))
    throw InvalidArgument("svm: rbf gamma must be > 0");
  if (!(p.tol > 0.0)) throw InvalidArgument("svm: tolerance must be > 0");
  if (p.max_passes < 1) throw InvalidArgument("svm: max_passes must be >= 1");
}

}  // namespace

BinarySvc solve_binary_svc(const Matrix& x, const std::vector<int>& y,
                           const SvmParams& params) {
  validate_params(params);
  const std::size_t n = x.rows();
  if (y.size() != n) throw ShapeError("svm: label count does not match row count");
  if (n < 2) throw InvalidArgument("svm: need at least 2 samples");
  bool has_pos = false, has_neg = false;
  for (const int yi : y) {
    if (yi == 1)
      has_pos = true;
    else if (yi == -1)
      has_neg = true;
    else
      throw InvalidArgument("svm: binary labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DegenerateDataError("svm: single-class input");
  for (std::size_t i = 0; i < n; ++i)
    for (const double v : x.row(i))
      if (!std::isfinite(v)) throw DataError("svm: non-finite feature value");

  // dense kernel matrix; pairwise problems in this pipeline are small
  // enough that precomputing it wins over any caching scheme
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel_value(params.kernel, params.gamma, x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  const double c = params.c;
  // minimize 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij; grad_i starts at -1
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const auto in_up = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
  };
  const auto in_low = [&](std::size_t t) {
    return (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0);
  };

  BinarySvc out;
  out.alpha.resize(n);
  const std::size_t max_iter = static_cast<std::size_t>(params.max_passes) * n;
  std::size_t iter = 0;
  double m_up = 0.0, m_low = 0.0;
  for (;; ++iter) {
    // maximal violation: i maximizes -y G over the upward-feasible set
    std::size_t i = n;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) m_low = v;
    }
    if (i == n || m_up - m_low <= params.tol) {
      out.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    // second-order choice of j: best one-step decrease of the objective
    std::size_t j = n;
    double best = 0.0;
    const double kii = k(i, i);
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double vt = -y[t] * grad[t];
      const double b = m_up - vt;
      if (b <= 0.0) continue;
      double a = kii + k(t, t) - 2.0 * k(i, t);
      if (a <= 0.0) a = 1e-12;
      const double gain = b * b / a;
      if (gain > best) {
        best = gain;
        j = t;
      }
    }
    if (j == n) {
      out.converged = true;  // no admissible partner below tolerance
      break;
    }

    // two-variable subproblem along alpha_i += y_i d, alpha_j -= y_j d
    double a = kii + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = 1e-12;
    const double vj = -y[j] * grad[j];
    double d = (m_up - vj) / a;
    const double hi_i = y[i] == 1 ? c - alpha[i] : alpha[i];
    const double hi_j = y[j] == 1 ? alpha[j] : c - alpha[j];
    d = std::min(d, std::min(hi_i, hi_j));

    alpha[i] += y[i] * d;
    alpha[j] -= y[j] * d;
    alpha[i] = std::clamp(alpha[i], 0.0, c);
    alpha[j] = std::clamp(alpha[j], 0.0, c);
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * d * (k(i, t) - k(j, t));
  }

  out.iterations = iter;
  out.bias = (m_up + m_low) / 2.0;
  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (1.0 - grad[t]);
  out.objective = 0.5 * obj;
  std::copy(alpha.begin(), alpha.end(), out.alpha.begin());
  return out;
}

SvmModel svm_train(const Matrix& x, const std::vector<std::string>& labels,
                   const SvmParams& params) {
  validate_params(params);
  const std::size_t n = x.rows();
  if (labels.size() != n) throw ShapeError("svm: label count does not match row count");
  if (n < 2) throw InvalidArgument("svm: need at least 2 samples");

  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    throw DegenerateDataError("svm: training data has a single class");

  SvmModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  model.params = params;
  model.feature_count = x.cols();

  std::vector<std::size_t> label_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]);
    label_index[i] = static_cast<std::size_t>(it - model.classes.begin());
  }

  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> rows;
      std::vector<int> y;
      for (std::size_t i = 0; i < n; ++i) {
        if (label_index[i] == a || label_index[i] == b) {
          rows.push_back(i);
          y.push_back(label_index[i] == a ? 1 : -1);
        }
      }
      Matrix sub(rows.size(), x.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = x.row(rows[r]);
        std::copy(src.begin(), src.end(), sub.row(r).begin());
      }
      const BinarySvc sol = solve_binary_svc(sub, y, params);

      PairwiseMachine machine;
      machine.class_a = a;
      machine.class_b = b;
      machine.bias = sol.bias;
      if (params.kernel == SvmKernel::Linear) {
        machine.weights.assign(x.cols(), 0.0);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const double coef = sol.alpha[r] * y[r];
          if (coef == 0.0) continue;
          const auto src = sub.row(r);
          for (std::size_t cidx = 0; cidx < x.cols(); ++cidx)
            machine.weights[cidx] += coef * src[cidx];
        }
      } else {
        std::vector<std::size_t> sv;
        for (std::size_t r = 0; r < rows.size(); ++r)
          if (sol.alpha[r] > 0.0) sv.push_back(r);
        machine.support_vectors = Matrix(sv.size(), x.cols());
        machine.dual_coef.resize(sv.size());
        for (std::size_t s = 0; s < sv.size(); ++s) {
          const auto src = sub.row(sv[s]);
          std::copy(src.begin(), src.end(), machine.support_vectors.row(s).begin());
          machine.dual_coef[s] = sol.alpha[sv[s]] * y[sv[s]];
        }
      }
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

double machine_decision(const PairwiseMachine& machine, const SvmParams& params,
                        std::span<const double> row) {
  if (!machine.weights.empty()) {
    return dot(machine.weights, row) + machine.bias;
  }
  double acc = machine.bias;
  for (std::size_t s = 0; s < machine.support_vectors.rows(); ++s)
    acc += machine.dual_coef[s] *
           kernel_value(params.kernel, params.gamma, machine.support_vectors.row(s), row);
  return acc;
}

std::vector<std::string> svm_predict(const SvmModel& model, const Matrix& x) {
  if (x.cols() != model.feature_count)
    throw ShapeError("svm predict: input has " + std::to_string(x.cols()) +
                     " features, model expects " + std::to_string(model.feature_count));
  std::vector<std::string> out;
  out.reserve(x.rows());
  std::vector<int> votes(model.classes.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& machine : model.machines) {
      const double dec = machine_decision(machine, model.params, x.row(i));
      ++votes[dec > 0.0 ? machine.class_a : machine.class_b];
    }
    // max_element keeps the first maximum, so vote ties resolve to the
    // lowest class index
    const auto best = std::max_element(votes.begin(), votes.end());
    out.push_back(model.classes[static_cast<std::size_t>(best - votes.begin())]);
  }
  return out;
}

EvalMetrics evaluate_predictions(const std::vector<std::string>& classes,
                                 const std::vector<std::string>& y_true,
                                 const std::vector<std::string>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw ShapeError("evaluate: prediction count does not match label count");
  if (y_true.empty()) throw EmptyInputError("evaluate: no samples");

  const auto index_of = [&](const std::string& label) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw DataError("evaluate: label '" + label + "' not among model classes");
    return static_cast<std::size_t>(it - classes.begin());
  };

  EvalMetrics m;
  m.classes = classes;
  m.confusion.assign(classes.size(), std::vector<int>(classes.size(), 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const std::size_t t = index_of(y_true[i]);
    const std::size_t p = index_of(y_pred[i]);
    ++m.confusion[t][p];
    if (t == p) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

  m.per_class.resize(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    long pred_total = 0, true_total = 0;
    for (std::size_t t = 0; t < classes.size(); ++t) {
      pred_total += m.confusion[t][c];
      true_total += m.confusion[c][t];
    }
    ClassMetrics& cm = m.per_class[c];
    if (pred_total > 0) {
      cm.precision = static_cast<double>(m.confusion[c][c]) / static_cast<double>(pred_total);
      cm.precision_defined = true;
    }
    if (true_total > 0) {
      cm.recall = static_cast<double>(m.confusion[c][c]) / static_cast<double>(true_total);
      cm.recall_defined = true;
    }
  }
  return m;
}

EvalMetrics svm_evaluate(const SvmModel& model, const Matrix& x,
                         const std::vector<std::string>& labels) {
  if (x.rows() != labels.size())
    throw ShapeError("evaluate: label count does not match row count");
  return evaluate_predictions(model.classes, labels, svm_predict(model, x));
}

std::vector<std::size_t> stratified_folds(const std::vector<std::string>& labels,
                                          std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation: need at least 2 folds");
  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<std::size_t> fold_of(labels.size(), 0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == classes[c]) members.push_back(i);
    if (members.size() < folds)
      throw StratificationError("cross-validation: class '" + classes[c] + "' has " +
                                std::to_string(members.size()) + " samples, fewer than " +
                                std::to_string(folds) + " folds");
    Rng rng(derive_seed(seed, c));
    rng.shuffle(members);
    for (std::size_t t = 0; t < members.size(); ++t) fold_of[members[t]] = t % folds;
  }
  return fold_of;
}

GridSearchResult grid_search_cv(const Matrix& x, const std::vector<std::string>& labels,
                                const std::vector<SvmParams>& grid, std::size_t folds,
                                std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("grid search: empty parameter grid");
  const auto fold_of = stratified_folds(labels, folds, seed);

  GridSearchResult result;
  result.table.reserve(grid.size());
  for (const SvmParams& params : grid) {
    double acc_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        (fold_of[i] == f ? test_rows : train_rows).push_back(i);

      Matrix train_x(train_rows.size(), x.cols());
      std::vector<std::string> train_y(train_rows.size());
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        const auto src = x.row(train_rows[r]);
        std::copy(src.begin(), src.end(), train_x.row(r).begin());
        train_y[r] = labels[train_rows[r]];
      }
      Matrix test_x(test_rows.size(), x.cols());
      std::vector<std::string> test_y(test_rows.size());
      for (std::size_t r = 0; r < test_rows.size(); ++r) {
        const auto src = x.row(test_rows[r]);
        std::copy(src.begin(), src.end(), test_x.row(r).begin());
        test_y[r] = labels[test_rows[r]];
      }

      const SvmModel model = svm_train(train_x, train_y, params);
      const auto pred = svm_predict(model, test_x);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == test_y[i]) ++correct;
      acc_sum += static_cast<double>(correct) / static_cast<double>(test_rows.size());
    }
    result.table.push_back({params, acc_sum / static_cast<double>(folds)});
  }

  const auto better = [](const GridPoint& a, const GridPoint& b) {
    if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    if (a.params.c != b.params.c) return a.params.c < b.params.c;
    if (a.params.kernel != b.params.kernel) return a.params.kernel == SvmKernel::Linear;
    return a.params.gamma < b.params.gamma;
  };
  const GridPoint* best = &result.table.front();
  for (const GridPoint& p : result.table)
    if (better(p, *best)) best = &p;
  result.best = best->params;
  return result;
}

std::vector<SvmParams> default_svm_grid(double tol, int max_passes) {
  std::vector<SvmParams> grid;
  for (const double c : {0.1, 1.0, 100.0, 1e5}) {
    SvmParams lin;
    lin.c = c;
    lin.kernel = SvmKernel::Linear;
    lin.gamma = 1e-4;
    lin.tol = tol;
    lin.max_passes = max_passes;
    grid.push_back(lin);
    for (const double gamma : {1e-4, 1e-2, 1.0}) {
      SvmParams rbf = lin;
      rbf.kernel = SvmKernel::Rbf;
      rbf.gamma = gamma;
      grid.push_back(rbf);
    }
  }
  return grid;
}

}  // namespace rfsc
