#ifndef SNVRG_OBJECTIVES_HPP
#define SNVRG_OBJECTIVES_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace snvrg {

using Vector = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;  // 0-based component indices

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite-sum objective F(x) = (1/n) sum_i f_i(x).
///
/// Implementations are immutable after construction and may be shared
/// between concurrent runs. Gradient evaluations are not counted here; see
/// GradientOracle for the counting layer.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string family() const = 0;

  virtual double component_value(std::size_t i, const Vector& x) const = 0;
  /// out += scale * grad f_i(x)
  virtual void add_component_gradient(std::size_t i, const Vector& x,
                                      double scale, Vector& out) const = 0;

  Vector component_gradient(std::size_t i, const Vector& x) const;
  double value(const Vector& x) const;
  /// Exact grad F(x); never counted.
  Vector gradient(const Vector& x) const;

  /// Gradient-Lipschitz constant valid for every component f_i.
  double smoothness_bound() const { return smoothness_; }
  std::optional<double> optimum_value() const { return optimum_value_; }
  std::optional<double> strong_convexity() const { return strong_convexity_; }
  std::optional<double> gradient_dominance() const { return gradient_dominance_; }
  /// Known minimizer, when the family admits one in closed form.
  const std::optional<Vector>& minimizer() const { return minimizer_; }

  void check_point(const Vector& x) const;

 protected:
  double smoothness_ = 1.0;
  std::optional<double> optimum_value_;
  std::optional<double> strong_convexity_;
  std::optional<double> gradient_dominance_;
  std::optional<Vector> minimizer_;
};

/// Least squares f_i(x) = 0.5 (a_i^T x - b_i)^2. With a full-column-rank
/// design F is lambda-strongly convex and 1/(2 lambda)-gradient dominated.
class QuadraticProblem final : public FiniteSumProblem {
 public:
  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  QuadraticProblem(RowMatrix design, Vector targets);

  std::size_t size() const override { return static_cast<std::size_t>(design_.rows()); }
  std::size_t dim() const override { return static_cast<std::size_t>(design_.cols()); }
  std::string family() const override { return "pl-quadratic"; }

  double component_value(std::size_t i, const Vector& x) const override;
  void add_component_gradient(std::size_t i, const Vector& x, double scale,
                              Vector& out) const override;

  const RowMatrix& design() const { return design_; }
  const Vector& targets() const { return targets_; }

 private:
  RowMatrix design_;
  Vector targets_;
};

/// Logistic loss with the smooth nonconvex penalty
///   f_i(x) = log(1 + exp(-b_i a_i^T x)) + alpha sum_j x_j^2 / (1 + x_j^2).
class NonconvexLogisticProblem final : public FiniteSumProblem {
 public:
  using RowMatrix = QuadraticProblem::RowMatrix;

  NonconvexLogisticProblem(RowMatrix features, Vector labels, double alpha);

  std::size_t size() const override { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const override { return static_cast<std::size_t>(features_.cols()); }
  std::string family() const override { return "nonconvex-logistic"; }

  double component_value(std::size_t i, const Vector& x) const override;
  void add_component_gradient(std::size_t i, const Vector& x, double scale,
                              Vector& out) const override;

  double alpha() const { return alpha_; }

 private:
  RowMatrix features_;
  Vector labels_;
  double alpha_;
};

/// Isotropic quadratics f_i(x) = 0.5 h_i ||x||^2 + c_i^T x, small enough to
/// check by hand.
class ToyProblem final : public FiniteSumProblem {
 public:
  ToyProblem(std::vector<double> curvatures, std::vector<Vector> linear_terms);

  std::size_t size() const override { return curvatures_.size(); }
  std::size_t dim() const override { return dim_; }
  std::string family() const override { return "scalar-toy"; }

  double component_value(std::size_t i, const Vector& x) const override;
  void add_component_gradient(std::size_t i, const Vector& x, double scale,
                              Vector& out) const override;

 private:
  std::vector<double> curvatures_;
  std::vector<Vector> linear_terms_;
  std::size_t dim_;
};

/// Monotone count of stochastic component-gradient evaluations.
class EvalCounter {
 public:
  std::uint64_t counted() const { return counted_; }
  bool exempt_active() const { return exempt_depth_ > 0; }
  void add(std::uint64_t units) {
    if (exempt_depth_ == 0) counted_ += units;
  }

  /// While alive, evaluations routed through this counter are not counted.
  class ExemptScope {
   public:
    explicit ExemptScope(EvalCounter& counter) : counter_(counter) { ++counter_.exempt_depth_; }
    ~ExemptScope() { --counter_.exempt_depth_; }
    ExemptScope(const ExemptScope&) = delete;
    ExemptScope& operator=(const ExemptScope&) = delete;

   private:
    EvalCounter& counter_;
  };

 private:
  std::uint64_t counted_ = 0;
  int exempt_depth_ = 0;
};

/// Counting gradient oracle: a problem plus the counter owned by one run.
/// One component-gradient evaluation costs one unit; a difference term
/// costs two units per index.
class GradientOracle {
 public:
  GradientOracle(const FiniteSumProblem& problem, EvalCounter& counter)
      : problem_(problem), counter_(counter) {}

  const FiniteSumProblem& problem() const { return problem_; }
  EvalCounter& counter() const { return counter_; }

  Vector full_gradient(const Vector& x) const;
  Vector batch_gradient(std::span<const std::size_t> indices, const Vector& x) const;
  Vector batch_gradient_difference(std::span<const std::size_t> indices,
                                   const Vector& x, const Vector& y) const;
  /// (1/n) sum_i ||grad f_i(x) - grad F(x)||^2; measurement-exempt.
  double variance_at(const Vector& x) const;

 private:
  void check_indices(std::span<const std::size_t> indices) const;

  const FiniteSumProblem& problem_;
  EvalCounter& counter_;
};

struct ProblemSpec {
  std::string family;
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  double alpha = 0.1;
};

std::unique_ptr<FiniteSumProblem> make_problem(const ProblemSpec& spec);

/// Starting point shared by every run on a given problem spec.
Vector default_start_point(const ProblemSpec& spec);

}  // namespace snvrg

#endif  // SNVRG_OBJECTIVES_HPP
