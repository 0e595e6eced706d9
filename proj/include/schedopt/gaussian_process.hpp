#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "schedopt/common.hpp"
#include "schedopt/distance.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Added to the Gram diagonal on top of the noise variance.
inline constexpr double kGramJitter = 1e-9;
/// Lower bound on the fitted noise variance.
inline constexpr double kMinNoiseVariance = 1e-6;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GPHyperparameters {
    double outputscale = 1.0;                    // k(x, x)
    double noise_variance = kMinNoiseVariance;   // added to the Gram diagonal
    std::vector<double> lengthscales;            // one per parameter
};

/// Matérn-5/2 correlation at scaled distance d: (1 + √5 d + 5d²/3) e^{-√5 d}.
double matern52(double scaled_distance);

/// Weighted Euclidean norm of per-parameter distances, sqrt(Σ s_i / l_i²) with
/// s_i = squared_kernel_distance (d_i² for numeric and categorical parameters,
/// the normalized semimetric for permutations).
double scaled_distance(const SearchSpace& space, const Configuration& a, const Configuration& b,
                       std::span<const double> lengthscales);

/// outputscale · matern52(scaled_distance(a, b)).
double kernel(const SearchSpace& space, const Configuration& a, const Configuration& b, const GPHyperparameters& h);

/// Gamma(shape, rate) prior placed on every lengthscale.
struct LengthscalePrior {
    double shape = 2.0;
    double rate = 2.0;

    double log_density(double lengthscale) const;
    double quantile(double probability) const;
};

/// Training inputs with their pairwise per-parameter squared kernel distances, so
/// the Gram matrix for new hyperparameters costs O(n² D).
class GPDataset {
public:
    GPDataset(const SearchSpace& space, std::span<const Configuration> inputs, std::span<const double> targets);

    std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
    std::size_t dimension() const { return squared_distances_.size(); }
    const Eigen::VectorXd& targets() const { return targets_; }
    const ConfigurationEncoder& encoder() const { return encoder_; }
    const RowMatrix& encoded() const { return encoded_; }
    const Eigen::MatrixXd& squared_distances(std::size_t p) const { return squared_distances_[p]; }

    /// Noise-free Gram matrix.
    Eigen::MatrixXd gram(const GPHyperparameters& h) const;

private:
    ConfigurationEncoder encoder_;
    RowMatrix encoded_;  // one row per input
    Eigen::VectorXd targets_;
    std::vector<Eigen::MatrixXd> squared_distances_;
};

/// log N(y | 0, K + (σ_ε + jitter) I). Throws NumericError when the matrix is
/// not positive definite.
double log_marginal_likelihood(const GPDataset& data, const GPHyperparameters& h);

/// Log marginal likelihood plus Σ_i log prior(l_i); the prior term is skipped
/// when `prior` is null.
double log_marginal_posterior(const GPDataset& data, const GPHyperparameters& h, const LengthscalePrior* prior);

struct GPFitOptions {
    LengthscalePrior prior;
    bool use_prior = true;
    /// Off: a single quasi-Newton run from a fixed default start.
    bool multistart = true;
    std::size_t samples = 64;
    std::size_t top = 8;
    std::size_t max_iterations = 50;
    double gradient_tolerance = 1e-6;
};

/// Search box, in log space, for (outputscale, noise, lengthscales...).
struct HyperparameterBox {
    std::vector<double> lower;
    std::vector<double> upper;
};
HyperparameterBox hyperparameter_box(std::size_t dimension, const GPFitOptions& options);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Optional natural-log transform of the objective, used only when every
/// observed value is strictly positive.
struct OutputTransform {
    bool log = false;

    static OutputTransform choose(std::span<const double> y, bool allow_log);
    double apply(double y) const;
};

/// GP posterior over a fixed training set. Outputs are standardized to zero
/// mean and unit variance internally (scale 1 when all outputs are equal);
/// predictions are returned in the units of the targets passed in.
class GPModel {
public:
    /// MAP hyperparameters by multistart quasi-Newton ascent on the log
    /// marginal posterior. Needs at least two inputs.
    static GPModel fit(const SearchSpace& space, std::span<const Configuration> inputs, std::span<const double> targets,
                       const GPFitOptions& options, Rng& rng);

    /// Posterior for given hyperparameters (expressed for standardized
    /// outputs when `standardize` is true, raw outputs otherwise).
    static GPModel condition(const SearchSpace& space, std::span<const Configuration> inputs,
                             std::span<const double> targets, const GPHyperparameters& h, bool standardize = true);

    /// Latent posterior; `include_noise` adds the noise variance.
    Prediction predict(const Configuration& x, bool include_noise = false) const;

    const GPHyperparameters& hyperparameters() const { return hyper_; }
    double output_mean() const { return y_mean_; }
    double output_scale() const { return y_scale_; }
    /// Objective value of the selected hyperparameters (NaN for `condition`).
    double log_posterior() const { return log_posterior_; }
    std::size_t size() const { return static_cast<std::size_t>(alpha_.size()); }

private:
    GPModel() = default;
    void factorize(const GPDataset& data);

    ConfigurationEncoder encoder_;
    RowMatrix encoded_;
    GPHyperparameters hyper_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    double log_posterior_ = 0.0;
};

}  // namespace schedopt
