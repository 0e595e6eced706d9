#include "schedopt/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace schedopt {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

double matern52(double d) {
    const double r = kSqrt5 * d;
    return (1.0 + r + r * r / 3.0) * std::exp(-r);
}

double scaled_distance(const SearchSpace& space, const Configuration& a, const Configuration& b,
                       std::span<const double> lengthscales) {
    double sum = 0.0;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        sum += squared_kernel_distance(space.parameter(i), a.values[i], b.values[i]) /
               (lengthscales[i] * lengthscales[i]);
    }
    return std::sqrt(sum);
}

double kernel(const SearchSpace& space, const Configuration& a, const Configuration& b, const GPHyperparameters& h) {
    return h.outputscale * matern52(scaled_distance(space, a, b, h.lengthscales));
}

double LengthscalePrior::log_density(double l) const {
    if (!(l > 0.0)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(l) - rate * l;
}

double LengthscalePrior::quantile(double probability) const {
    boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
    return boost::math::quantile(dist, probability);
}

GPDataset::GPDataset(const SearchSpace& space, std::span<const Configuration> inputs, std::span<const double> targets)
    : encoder_(space) {
    if (inputs.size() != targets.size()) throw ValidationError("GP dataset: inputs and targets differ in length");
    const auto n = static_cast<Eigen::Index>(inputs.size());
    encoded_.resize(n, static_cast<Eigen::Index>(encoder_.width()));
    const std::size_t width = encoder_.width();
    auto row = [&](Eigen::Index i) { return std::span<double>(encoded_.row(i).data(), width); };
    for (Eigen::Index i = 0; i < n; ++i) encoder_.encode_into(inputs[i], row(i));
    targets_ = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);

    squared_distances_.assign(space.dimension(), Eigen::MatrixXd::Zero(n, n));
    for (std::size_t p = 0; p < space.dimension(); ++p) {
        auto& m = squared_distances_[p];
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                m(i, j) = m(j, i) = encoder_.squared_distance(p, row(i), row(j));
            }
        }
    }
}

Eigen::MatrixXd GPDataset::gram(const GPHyperparameters& h) const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t p = 0; p < dimension(); ++p) r2 += squared_distances_[p] / (h.lengthscales[p] * h.lengthscales[p]);
    return r2.unaryExpr([&](double v) { return h.outputscale * matern52(std::sqrt(v)); });
}

namespace {

/// Log posterior and its gradient in θ = (log σ, log σ_ε, log l_1, ..., log l_D).
struct PosteriorObjective {
    const GPDataset& data;
    const LengthscalePrior* prior;

    static GPHyperparameters unpack(const Eigen::VectorXd& theta) {
        GPHyperparameters h;
        h.outputscale = std::exp(theta[0]);
        h.noise_variance = std::exp(theta[1]);
        h.lengthscales.resize(static_cast<std::size_t>(theta.size() - 2));
        for (Eigen::Index i = 2; i < theta.size(); ++i) h.lengthscales[i - 2] = std::exp(theta[i]);
        return h;
    }

    double value(const GPHyperparameters& h, Eigen::VectorXd* grad) const {
        const auto n = static_cast<Eigen::Index>(data.size());
        const std::size_t dim = data.dimension();
        std::vector<double> inv_l2(dim);
        for (std::size_t p = 0; p < dim; ++p) inv_l2[p] = 1.0 / (h.lengthscales[p] * h.lengthscales[p]);

        // Kernel matrix and, for the gradient, σ (5/3) (1 + r) e^{-r}, which
        // times D_p² / l_p² is d k / d log l_p. Filled from the lower triangle.
        Eigen::MatrixXd k(n, n);
        Eigen::MatrixXd dk;
        if (grad) dk.resize(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j; i < n; ++i) {
                double r2 = 0.0;
                for (std::size_t p = 0; p < dim; ++p) r2 += data.squared_distances(p)(i, j) * inv_l2[p];
                const double r = std::sqrt(5.0 * r2);
                const double e = std::exp(-r);
                k(i, j) = k(j, i) = h.outputscale * (1.0 + r + r * r / 3.0) * e;
                if (grad) dk(i, j) = dk(j, i) = h.outputscale * (5.0 / 3.0) * (1.0 + r) * e;
            }
        }

        Eigen::MatrixXd ky = k;
        ky.diagonal().array() += h.noise_variance + kGramJitter;
        Eigen::LLT<Eigen::MatrixXd> llt(ky);
        if (llt.info() != Eigen::Success) throw NumericError("Gram matrix is not positive definite");
        const Eigen::VectorXd& y = data.targets();
        const Eigen::VectorXd alpha = llt.solve(y);
        const auto& l = llt.matrixLLT();
        double log_det_half = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(l(i, i) > 0.0)) throw NumericError("Gram matrix is not positive definite");
            log_det_half += std::log(l(i, i));
        }
        double result = -0.5 * y.dot(alpha) - log_det_half - 0.5 * static_cast<double>(n) * kLog2Pi;
        if (prior) {
            for (double ls : h.lengthscales) result += prior->log_density(ls);
        }
        if (!std::isfinite(result)) throw NumericError("log marginal posterior is not finite");
        if (!grad) return result;

        // W = α αᵀ - (K + σ_ε I)⁻¹; d LML / d θ_j = ½ tr(W dK/dθ_j).
        Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
        llt.solveInPlace(w);
        w = -w;
        w.noalias() += alpha * alpha.transpose();
        grad->resize(static_cast<Eigen::Index>(dim + 2));
        (*grad)[0] = 0.5 * (w.array() * k.array()).sum();
        (*grad)[1] = 0.5 * h.noise_variance * w.trace();
        dk.array() *= w.array();
        for (std::size_t p = 0; p < dim; ++p) {
            double g = 0.5 * (dk.array() * data.squared_distances(p).array()).sum() * inv_l2[p];
            if (prior) g += (prior->shape - 1.0) - prior->rate * h.lengthscales[p];
            (*grad)[static_cast<Eigen::Index>(p + 2)] = g;
        }
        return result;
    }
};

/// Maps an unconstrained vector u to θ inside the box through a logistic
/// squashing per coordinate.
struct BoxMap {
    const HyperparameterBox& box;

    double sigmoid(double u) const { return 1.0 / (1.0 + std::exp(-u)); }

    Eigen::VectorXd to_theta(const double* u, std::size_t n) const {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            theta[static_cast<Eigen::Index>(i)] = box.lower[i] + (box.upper[i] - box.lower[i]) * sigmoid(u[i]);
        return theta;
    }

    double dtheta_du(double u, std::size_t i) const {
        const double s = sigmoid(u);
        return (box.upper[i] - box.lower[i]) * s * (1.0 - s);
    }

    double to_u(double theta, std::size_t i) const {
        double t = (theta - box.lower[i]) / (box.upper[i] - box.lower[i]);
        t = std::clamp(t, 1e-6, 1.0 - 1e-6);
        return std::log(t / (1.0 - t));
    }
};

struct GslContext {
    const PosteriorObjective* objective;
    const BoxMap* map;
};

constexpr double kPenalty = 1e10;

std::vector<double> copy_vector(const gsl_vector* v) {
    std::vector<double> out(v->size);
    for (std::size_t i = 0; i < v->size; ++i) out[i] = gsl_vector_get(v, i);
    return out;
}

double gsl_f(const gsl_vector* u, void* params) {
    auto* ctx = static_cast<GslContext*>(params);
    const auto uu = copy_vector(u);
    const Eigen::VectorXd theta = ctx->map->to_theta(uu.data(), uu.size());
    try {
        return -ctx->objective->value(PosteriorObjective::unpack(theta), nullptr);
    } catch (const NumericError&) {
        return kPenalty;
    }
}

void gsl_fdf(const gsl_vector* u, void* params, double* f, gsl_vector* g) {
    auto* ctx = static_cast<GslContext*>(params);
    const auto uu = copy_vector(u);
    const Eigen::VectorXd theta = ctx->map->to_theta(uu.data(), uu.size());
    Eigen::VectorXd grad;
    try {
        *f = -ctx->objective->value(PosteriorObjective::unpack(theta), &grad);
        for (std::size_t i = 0; i < u->size; ++i)
            gsl_vector_set(g, i, -grad[static_cast<Eigen::Index>(i)] * ctx->map->dtheta_du(uu[i], i));
    } catch (const NumericError&) {
        *f = kPenalty;
        gsl_vector_set_zero(g);
    }
}

void gsl_df(const gsl_vector* u, void* params, gsl_vector* g) {
    double f = 0.0;
    gsl_fdf(u, params, &f, g);
}

/// Quasi-Newton (BFGS) ascent from `start`; returns the best θ seen and its value.
std::pair<Eigen::VectorXd, double> ascend(const PosteriorObjective& objective, const BoxMap& map,
                                          const Eigen::VectorXd& start, double start_value,
                                          const GPFitOptions& options) {
    const std::size_t n = static_cast<std::size_t>(start.size());
    GslContext ctx{&objective, &map};
    gsl_multimin_function_fdf fdf;
    fdf.n = n;
    fdf.f = &gsl_f;
    fdf.df = &gsl_df;
    fdf.fdf = &gsl_fdf;
    fdf.params = &ctx;

    gsl_vector* x = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, map.to_u(start[static_cast<Eigen::Index>(i)], i));
    gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
    gsl_multimin_fdfminimizer_set(s, &fdf, x, 0.1, 0.1);

    Eigen::VectorXd best = start;
    double best_value = start_value;
    auto consider = [&]() {
        const double value = -gsl_multimin_fdfminimizer_minimum(s);
        if (std::isfinite(value) && value > best_value && value > -kPenalty / 2) {
            best_value = value;
            best = map.to_theta(copy_vector(gsl_multimin_fdfminimizer_x(s)).data(), n);
        }
    };
    consider();
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        const int status = gsl_multimin_fdfminimizer_iterate(s);
        consider();
        if (status != GSL_SUCCESS) break;
        if (gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(s), options.gradient_tolerance) ==
            GSL_SUCCESS)
            break;
    }
    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(x);
    return {best, best_value};
}

}  // namespace

double log_marginal_likelihood(const GPDataset& data, const GPHyperparameters& h) {
    return PosteriorObjective{data, nullptr}.value(h, nullptr);
}

double log_marginal_posterior(const GPDataset& data, const GPHyperparameters& h, const LengthscalePrior* prior) {
    return PosteriorObjective{data, prior}.value(h, nullptr);
}

HyperparameterBox hyperparameter_box(std::size_t dimension, const GPFitOptions& options) {
    HyperparameterBox box;
    box.lower = {std::log(0.05), std::log(kMinNoiseVariance)};
    box.upper = {std::log(20.0), std::log(1.0)};
    double lo = std::log(0.01);
    double hi = std::log(100.0);
    if (options.use_prior) {
        lo = std::log(options.prior.quantile(0.001));
        hi = std::log(options.prior.quantile(0.999));
    }
    for (std::size_t i = 0; i < dimension; ++i) {
        box.lower.push_back(lo);
        box.upper.push_back(hi);
    }
    return box;
}

OutputTransform OutputTransform::choose(std::span<const double> y, bool allow_log) {
    OutputTransform t;
    t.log = allow_log && !y.empty() && std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
    return t;
}

double OutputTransform::apply(double y) const { return log ? std::log(y) : y; }

namespace {

std::pair<double, double> standardization(std::span<const double> y) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    const double scale = var > 1e-24 ? std::sqrt(var) : 1.0;
    return {mean, scale};
}

}  // namespace

void GPModel::factorize(const GPDataset& data) {
    encoder_ = data.encoder();
    encoded_ = data.encoded();
    Eigen::MatrixXd ky = data.gram(hyper_);
    ky.diagonal().array() += hyper_.noise_variance + kGramJitter;
    chol_.compute(ky);
    if (chol_.info() != Eigen::Success) throw NumericError("Gram matrix is not positive definite");
    alpha_ = chol_.solve(data.targets());
}

GPModel GPModel::condition(const SearchSpace& space, std::span<const Configuration> inputs,
                           std::span<const double> targets, const GPHyperparameters& h, bool standardize) {
    GPModel model;
    std::vector<double> y(targets.begin(), targets.end());
    if (standardize && !y.empty()) {
        std::tie(model.y_mean_, model.y_scale_) = standardization(y);
        for (double& v : y) v = (v - model.y_mean_) / model.y_scale_;
    }
    model.hyper_ = h;
    model.log_posterior_ = std::numeric_limits<double>::quiet_NaN();
    model.factorize(GPDataset(space, inputs, y));
    return model;
}

GPModel GPModel::fit(const SearchSpace& space, std::span<const Configuration> inputs, std::span<const double> targets,
                     const GPFitOptions& options, Rng& rng) {
    if (inputs.size() < 2) throw ValidationError("GP fit needs at least two observations");
    static const auto previous_handler = gsl_set_error_handler_off();
    (void)previous_handler;

    GPModel model;
    std::vector<double> y(targets.begin(), targets.end());
    std::tie(model.y_mean_, model.y_scale_) = standardization(y);
    for (double& v : y) v = (v - model.y_mean_) / model.y_scale_;
    const GPDataset data(space, inputs, y);

    const std::size_t dim = space.dimension();
    const HyperparameterBox box = hyperparameter_box(dim, options);
    const LengthscalePrior* prior = options.use_prior ? &options.prior : nullptr;
    const PosteriorObjective objective{data, prior};
    const BoxMap map{box};
    const auto eval = [&](const Eigen::VectorXd& theta) {
        try {
            return objective.value(PosteriorObjective::unpack(theta), nullptr);
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    std::vector<std::pair<Eigen::VectorXd, double>> starts;
    if (options.multistart) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t s = 0; s < options.samples; ++s) {
            Eigen::VectorXd theta(static_cast<Eigen::Index>(dim + 2));
            for (std::size_t i = 0; i < dim + 2; ++i)
                theta[static_cast<Eigen::Index>(i)] = box.lower[i] + (box.upper[i] - box.lower[i]) * unit(rng);
            starts.emplace_back(theta, eval(theta));
        }
        std::stable_sort(starts.begin(), starts.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        starts.resize(std::min(starts.size(), options.top));
    } else {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(dim + 2));
        theta[0] = 0.0;
        theta[1] = std::log(1e-2);
        for (std::size_t i = 0; i < dim; ++i)
            theta[static_cast<Eigen::Index>(i + 2)] = std::clamp(0.0, box.lower[i + 2], box.upper[i + 2]);
        starts.emplace_back(theta, eval(theta));
    }

    Eigen::VectorXd best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& [theta, value] : starts) {
        if (!std::isfinite(value)) continue;
        auto [candidate, candidate_value] = ascend(objective, map, theta, value, options);
        if (candidate_value > best_value) {
            best_value = candidate_value;
            best = candidate;
        }
    }
    if (!std::isfinite(best_value)) throw NumericError("every GP hyperparameter candidate failed numerically");

    model.hyper_ = PosteriorObjective::unpack(best);
    model.hyper_.noise_variance = std::max(model.hyper_.noise_variance, kMinNoiseVariance);
    model.log_posterior_ = best_value;
    model.factorize(data);
    return model;
}

Prediction GPModel::predict(const Configuration& x, bool include_noise) const {
    const auto n = static_cast<Eigen::Index>(alpha_.size());
    const std::vector<double> ex = encoder_.encode(x);
    Eigen::VectorXd kstar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::span<const double> row(encoded_.row(i).data(), encoder_.width());
        double sum = 0.0;
        for (std::size_t p = 0; p < encoder_.dimension(); ++p) {
            sum += encoder_.squared_distance(p, ex, row) / (hyper_.lengthscales[p] * hyper_.lengthscales[p]);
        }
        kstar[i] = hyper_.outputscale * matern52(std::sqrt(sum));
    }
    const double mean = kstar.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(kstar);
    double variance = std::max(0.0, hyper_.outputscale - v.squaredNorm());
    if (include_noise) variance += hyper_.noise_variance;
    return {mean * y_scale_ + y_mean_, variance * y_scale_ * y_scale_};
}

}  // namespace schedopt
