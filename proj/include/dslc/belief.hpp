#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "dslc/graph.hpp"

namespace dslc {

/// Squared-exponential kernel sigma_v^2 * exp(-d^2 / (2 l^2)) over vertex positions.
struct KernelSpec {
  double variance = 1.0;
  double length_scale = 0.1;
};

struct Sample {
  VertexId vertex = 0;
  double value = 0.0;
};

inline constexpr double kDefaultJitter = 1e-10;

/// Multivariate Gaussian belief over the per-vertex field values.
///
/// State is the prior (mean, covariance and its inverse), the per-vertex
/// sample counts and sums, and the derived posterior. The precision is kept
/// as prior precision plus count / noise_variance on the diagonal. Covariance
/// and mean are recomputed from the prior covariance after each update batch
/// (conditioning on the per-vertex sample means), which stays accurate even
/// when the prior precision is badly conditioned.
class GaussianBelief {
 public:
  /// prior_covariance must be symmetric positive definite; it is used as given.
  GaussianBelief(Eigen::MatrixXd prior_covariance, Eigen::VectorXd prior_mean,
                 double noise_variance);

  std::size_t size() const { return static_cast<std::size_t>(prior_mean_.size()); }
  double noise_variance() const { return noise_variance_; }
  /// Upper bound on the prior marginal variances (their maximum).
  double prior_variance_bound() const { return prior_variance_bound_; }

  const Eigen::VectorXd& prior_mean() const { return prior_mean_; }
  const Eigen::MatrixXd& prior_covariance() const { return prior_covariance_; }
  const Eigen::MatrixXd& prior_precision() const { return prior_precision_; }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  double variance(VertexId v) const { return covariance_(static_cast<Eigen::Index>(v),
                                                         static_cast<Eigen::Index>(v)); }
  std::vector<double> variances() const;
  double max_variance() const { return covariance_.diagonal().maxCoeff(); }

  std::span<const std::size_t> sample_counts() const { return counts_; }
  std::span<const double> sample_sums() const { return sums_; }
  std::size_t total_samples() const;

  /// Adds every sample, then refreshes mean and covariance once.
  /// Throws ValidationError on a bad vertex id or non-finite value; the
  /// belief is unchanged in that case.
  void update(std::span<const Sample> samples);

 private:
  void refresh();

  Eigen::VectorXd prior_mean_;
  Eigen::MatrixXd prior_covariance_;
  Eigen::MatrixXd prior_precision_;
  double noise_variance_;
  double prior_variance_bound_;

  std::vector<std::size_t> counts_;
  std::vector<double> sums_;

  Eigen::MatrixXd precision_;
  Eigen::MatrixXd covariance_;
  Eigen::VectorXd mean_;
};

/// Kernel prior over g with constant mean. jitter * variance is added to the
/// covariance diagonal before inversion. Throws RuntimeError if the jittered
/// covariance is still not positive definite.
GaussianBelief prior_from_kernel(const WeightedGraph& g, const KernelSpec& kernel,
                                 double prior_mean, double noise_variance,
                                 double jitter = kDefaultJitter);

/// Value-semantic single-sample update.
GaussianBelief posterior_update(GaussianBelief belief, VertexId v, double y);

/// Vertex of maximum marginal variance; lowest index wins ties.
VertexId greedy_next_vertex(const GaussianBelief& belief);

/// Greedy sampling sequence. per_agent is filled by split_by_owner.
struct SamplePlan {
  std::vector<VertexId> sequence;
  std::vector<std::vector<VertexId>> per_agent;
  double final_max_variance = 0.0;
};

/// Greedy variance-only simulation until every marginal variance is at most
/// threshold. cap = 0 means 10 * |V| samples. Throws RuntimeError if the cap
/// is reached first.
SamplePlan plan_to_threshold(const GaussianBelief& belief, double threshold, std::size_t cap = 0);

/// Fills plan.per_agent[r] with the plan entries owned by agent r, in plan order.
void split_by_owner(SamplePlan& plan, std::span<const std::size_t> owner, std::size_t num_agents);

/// Information gained about the field by sampling the given sequence from
/// belief: 1/2 sum_k log(1 + var_{i_k}(k-1) / noise_variance).
double mutual_information(const GaussianBelief& belief, std::span<const VertexId> plan);

/// Maximum mutual_information over all multisets of n vertices. Throws
/// RuntimeError when |V|^n exceeds cap.
double gamma_bruteforce(const GaussianBelief& belief, std::size_t n,
                        std::size_t cap = 1'000'000);

/// Upper bound on the greedy maximum variance after n samples given the
/// maximal information gain gamma_n.
double greedy_variance_bound(double prior_variance_bound, double noise_variance, std::size_t n,
                    double gamma_n);
double greedy_variance_bound(const GaussianBelief& belief, std::size_t n, double gamma_n);

/// CSV with header "vertex,mu,var".
void write_belief_csv(const GaussianBelief& belief, const std::filesystem::path& path);

}  // namespace dslc
