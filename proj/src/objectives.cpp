#include "snvrg/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "snvrg/sampling.hpp"

namespace snvrg {
namespace {

// Stream labels under the problem seed.
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kPlantedStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kStartStream = 4;

constexpr double kQuadraticNoise = 0.1;
constexpr double kLabelFlipRate = 0.1;

QuadraticProblem::RowMatrix normalized_gaussian_rows(RngStream& rng, std::size_t n,
                                                     std::size_t d) {
  QuadraticProblem::RowMatrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = rng.normal();
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return rows;
}

Vector gaussian_vector(RngStream& rng, std::size_t d) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
  return v;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Vector FiniteSumProblem::component_gradient(std::size_t i, const Vector& x) const {
  check_point(x);
  if (i >= size()) throw InputError("component index out of range");
  Vector out = Vector::Zero(x.size());
  add_component_gradient(i, x, 1.0, out);
  return out;
}

double FiniteSumProblem::value(const Vector& x) const {
  check_point(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += component_value(i, x);
  return acc / static_cast<double>(size());
}

Vector FiniteSumProblem::gradient(const Vector& x) const {
  check_point(x);
  Vector out = Vector::Zero(x.size());
  const double w = 1.0 / static_cast<double>(size());
  for (std::size_t i = 0; i < size(); ++i) add_component_gradient(i, x, w, out);
  return out;
}

void FiniteSumProblem::check_point(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw InputError("dimension mismatch: expected " + std::to_string(dim()) + ", got " +
                     std::to_string(x.size()));
  }
}

// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(RowMatrix design, Vector targets)
    : design_(std::move(design)), targets_(std::move(targets)) {
  if (design_.rows() == 0 || design_.cols() == 0) throw InputError("empty design");
  if (targets_.size() != design_.rows()) throw InputError("targets/design size mismatch");

  // Each gradient a_i (a_i^T x - b_i) is ||a_i||^2-Lipschitz.
  smoothness_ = design_.rowwise().squaredNorm().maxCoeff();

  const double n = static_cast<double>(design_.rows());
  const Eigen::MatrixXd gram = design_.transpose() * design_ / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (lambda_min > 1e-12 * std::max(1.0, lambda_max)) {
    strong_convexity_ = lambda_min;
    gradient_dominance_ = 1.0 / (2.0 * lambda_min);
    Vector rhs = design_.transpose() * targets_ / n;
    Vector xstar = gram.ldlt().solve(rhs);
    optimum_value_ = value(xstar);
    minimizer_ = std::move(xstar);
  }
}

double QuadraticProblem::component_value(std::size_t i, const Vector& x) const {
  const double r = design_.row(static_cast<Eigen::Index>(i)).dot(x) - targets_(static_cast<Eigen::Index>(i));
  return 0.5 * r * r;
}

void QuadraticProblem::add_component_gradient(std::size_t i, const Vector& x, double scale,
                                              Vector& out) const {
  const auto row = design_.row(static_cast<Eigen::Index>(i));
  const double r = row.dot(x) - targets_(static_cast<Eigen::Index>(i));
  out.noalias() += (scale * r) * row.transpose();
}

// ---------------------------------------------------------------------------

NonconvexLogisticProblem::NonconvexLogisticProblem(RowMatrix features, Vector labels,
                                                   double alpha)
    : features_(std::move(features)), labels_(std::move(labels)), alpha_(alpha) {
  if (features_.rows() == 0 || features_.cols() == 0) throw InputError("empty features");
  if (labels_.size() != features_.rows()) throw InputError("labels/features size mismatch");
  if (alpha_ < 0.0) throw InputError("alpha must be non-negative");
  // logistic curvature <= ||a_i||^2 / 4; |d^2/dx^2 x^2/(1+x^2)| <= 2.
  smoothness_ = features_.rowwise().squaredNorm().maxCoeff() / 4.0 + 2.0 * alpha_;
}

double NonconvexLogisticProblem::component_value(std::size_t i, const Vector& x) const {
  const auto idx = static_cast<Eigen::Index>(i);
  const double margin = labels_(idx) * features_.row(idx).dot(x);
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double sq = x(j) * x(j);
    penalty += sq / (1.0 + sq);
  }
  return softplus(-margin) + alpha_ * penalty;
}

void NonconvexLogisticProblem::add_component_gradient(std::size_t i, const Vector& x,
                                                      double scale, Vector& out) const {
  const auto idx = static_cast<Eigen::Index>(i);
  const auto row = features_.row(idx);
  const double b = labels_(idx);
  const double margin = b * row.dot(x);
  out.noalias() += (-scale * b * sigmoid(-margin)) * row.transpose();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double denom = 1.0 + x(j) * x(j);
    out(j) += scale * alpha_ * 2.0 * x(j) / (denom * denom);
  }
}

// ---------------------------------------------------------------------------

ToyProblem::ToyProblem(std::vector<double> curvatures, std::vector<Vector> linear_terms)
    : curvatures_(std::move(curvatures)), linear_terms_(std::move(linear_terms)) {
  if (curvatures_.empty()) throw InputError("toy problem needs at least one component");
  if (linear_terms_.size() != curvatures_.size()) {
    throw InputError("toy problem: curvature/linear term count mismatch");
  }
  dim_ = static_cast<std::size_t>(linear_terms_.front().size());
  if (dim_ == 0) throw InputError("toy problem: zero dimension");
  double max_h = 0.0;
  double mean_h = 0.0;
  Vector mean_c = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < curvatures_.size(); ++i) {
    if (static_cast<std::size_t>(linear_terms_[i].size()) != dim_) {
      throw InputError("toy problem: inconsistent dimensions");
    }
    max_h = std::max(max_h, std::abs(curvatures_[i]));
    mean_h += curvatures_[i];
    mean_c += linear_terms_[i];
  }
  mean_h /= static_cast<double>(curvatures_.size());
  mean_c /= static_cast<double>(curvatures_.size());
  // Linear-only toys still need L > 0 for step-size rules.
  smoothness_ = max_h > 0.0 ? max_h : 1.0;
  if (mean_h > 0.0) {
    strong_convexity_ = mean_h;
    gradient_dominance_ = 1.0 / (2.0 * mean_h);
    Vector xstar = -mean_c / mean_h;
    optimum_value_ = value(xstar);
    minimizer_ = std::move(xstar);
  }
}

double ToyProblem::component_value(std::size_t i, const Vector& x) const {
  return 0.5 * curvatures_[i] * x.squaredNorm() + linear_terms_[i].dot(x);
}

void ToyProblem::add_component_gradient(std::size_t i, const Vector& x, double scale,
                                        Vector& out) const {
  out.noalias() += (scale * curvatures_[i]) * x + scale * linear_terms_[i];
}

// ---------------------------------------------------------------------------

Vector GradientOracle::full_gradient(const Vector& x) const {
  problem_.check_point(x);
  counter_.add(problem_.size());
  return problem_.gradient(x);
}

Vector GradientOracle::batch_gradient(std::span<const std::size_t> indices,
                                      const Vector& x) const {
  problem_.check_point(x);
  check_indices(indices);
  Vector out = Vector::Zero(x.size());
  const double w = 1.0 / static_cast<double>(indices.size());
  for (auto i : indices) problem_.add_component_gradient(i, x, w, out);
  counter_.add(indices.size());
  return out;
}

Vector GradientOracle::batch_gradient_difference(std::span<const std::size_t> indices,
                                                 const Vector& x, const Vector& y) const {
  problem_.check_point(x);
  problem_.check_point(y);
  check_indices(indices);
  Vector out = Vector::Zero(x.size());
  const double w = 1.0 / static_cast<double>(indices.size());
  // Per-index difference so identical points cancel exactly.
  Vector gx(x.size());
  Vector gy(x.size());
  for (auto i : indices) {
    gx.setZero();
    gy.setZero();
    problem_.add_component_gradient(i, x, 1.0, gx);
    problem_.add_component_gradient(i, y, 1.0, gy);
    out.noalias() += w * (gx - gy);
  }
  counter_.add(2 * indices.size());
  return out;
}

double GradientOracle::variance_at(const Vector& x) const {
  problem_.check_point(x);
  const Vector mean = problem_.gradient(x);
  double acc = 0.0;
  Vector g(x.size());
  for (std::size_t i = 0; i < problem_.size(); ++i) {
    g.setZero();
    problem_.add_component_gradient(i, x, 1.0, g);
    acc += (g - mean).squaredNorm();
  }
  return acc / static_cast<double>(problem_.size());
}

void GradientOracle::check_indices(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw InputError("index set must be non-empty");
  const std::size_t n = problem_.size();
  std::vector<bool> seen(n, false);
  for (auto i : indices) {
    if (i >= n) throw InputError("index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    if (seen[i]) throw InputError("duplicate index " + std::to_string(i));
    seen[i] = true;
  }
}

// ---------------------------------------------------------------------------

std::unique_ptr<FiniteSumProblem> make_problem(const ProblemSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw InputError("problem spec: n and d must be positive");
  RngStream root(spec.seed);

  if (spec.family == "pl-quadratic") {
    if (spec.n < spec.d) throw InputError("pl-quadratic: need n >= d for a full-rank design");
    RngStream design_rng = root.child(kDesignStream);
    RngStream planted_rng = root.child(kPlantedStream);
    RngStream noise_rng = root.child(kNoiseStream);
    auto design = normalized_gaussian_rows(design_rng, spec.n, spec.d);
    const Vector planted = gaussian_vector(planted_rng, spec.d);
    Vector targets = design * planted;
    for (Eigen::Index i = 0; i < targets.size(); ++i) targets(i) += kQuadraticNoise * noise_rng.normal();
    return std::make_unique<QuadraticProblem>(std::move(design), std::move(targets));
  }

  if (spec.family == "nonconvex-logistic") {
    RngStream design_rng = root.child(kDesignStream);
    RngStream planted_rng = root.child(kPlantedStream);
    RngStream noise_rng = root.child(kNoiseStream);
    auto features = normalized_gaussian_rows(design_rng, spec.n, spec.d);
    const Vector planted = gaussian_vector(planted_rng, spec.d);
    Vector labels(static_cast<Eigen::Index>(spec.n));
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      double label = features.row(i).dot(planted) >= 0.0 ? 1.0 : -1.0;
      if (noise_rng.uniform01() < kLabelFlipRate) label = -label;
      labels(i) = label;
    }
    return std::make_unique<NonconvexLogisticProblem>(std::move(features), std::move(labels),
                                                      spec.alpha);
  }

  if (spec.family == "scalar-toy") {
    RngStream design_rng = root.child(kDesignStream);
    std::vector<double> curvatures(spec.n);
    std::vector<Vector> linear(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
      curvatures[i] = 0.5 + 1.5 * design_rng.uniform01();
      linear[i] = gaussian_vector(design_rng, spec.d);
    }
    return std::make_unique<ToyProblem>(std::move(curvatures), std::move(linear));
  }

  throw InputError("unknown problem family '" + spec.family + "'");
}

Vector default_start_point(const ProblemSpec& spec) {
  RngStream rng = RngStream(spec.seed).child(kStartStream);
  return gaussian_vector(rng, spec.d);
}

}  // namespace snvrg
