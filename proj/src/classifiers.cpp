#include "genefilter/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

namespace genefilter::classifiers {

namespace {

Eigen::Map<const Vector> as_vector(std::span<const double> values) {
    return {values.data(), static_cast<Index>(values.size())};
}

void require_query(std::span<const double> query, Index expected, const char* who) {
    if (static_cast<Index>(query.size()) != expected)
        throw InvalidInput(std::string(who) + ": query has " + std::to_string(query.size()) + " features, model expects " +
                           std::to_string(expected));
}

double log_sum_exp(std::span<const double> values) {
    const double top = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - top);
    return top + std::log(acc);
}

double logistic(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

// log(1 + exp(a)) without overflow
double softplus(double a) {
    return std::max(a, 0.0) + std::log1p(std::exp(-std::fabs(a)));
}

} // namespace

void TrainSet::validate() const {
    if (features.rows() == 0 || features.cols() == 0) throw InvalidInput("train set: empty feature matrix");
    if (static_cast<Index>(labels.size()) != features.rows())
        throw InvalidInput("train set: label count does not match sample count");
    std::array<Index, 2> counts{0, 0};
    for (int label : labels) {
        if (label != 0 && label != 1) throw InvalidInput("train set: labels must be 0 or 1");
        ++counts[static_cast<std::size_t>(label)];
    }
    if (counts[0] == 0 || counts[1] == 0) throw InvalidInput("train set: both classes must be present");
    if (!features.allFinite()) throw InvalidInput("train set: non-finite feature values");
}

// ---------------------------------------------------------------------------
// KNN

int knn_classify(const TrainSet& train, std::span<const double> query, int k) {
    require_query(query, train.feature_count(), "knn_classify");
    const Index n = train.sample_count();
    if (k < 1 || k > n) throw InvalidInput("knn_classify: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    const auto q = as_vector(query);

    std::vector<double> distance(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) distance[static_cast<std::size_t>(i)] = (train.features.row(i).transpose() - q).norm();
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](Index a, Index b) {
        const double da = distance[static_cast<std::size_t>(a)];
        const double db = distance[static_cast<std::size_t>(b)];
        return da != db ? da < db : a < b;
    });

    std::array<int, 2> votes{0, 0};
    std::array<double, 2> summed{0.0, 0.0};
    for (int r = 0; r < k; ++r) {
        const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]);
        const auto c = static_cast<std::size_t>(train.labels[i]);
        ++votes[c];
        summed[c] += distance[i];
    }
    if (votes[0] != votes[1]) return votes[1] > votes[0] ? 1 : 0;
    return summed[1] < summed[0] ? 1 : 0;
}

// ---------------------------------------------------------------------------
// SVM

SvmConvergenceError::SvmConvergenceError(double violation, long iterations)
    : std::runtime_error("svm_train: no convergence after " + std::to_string(iterations) +
                         " iterations (max KKT violation " + std::to_string(violation) + ")"),
      violation_(violation) {}

SvmModel svm_train(const TrainSet& train, double C) {
    train.validate();
    if (!(C > 0.0)) throw InvalidInput("svm_train: C must be positive");
    const Index n = train.sample_count();
    const Matrix kernel = train.features * train.features.transpose();
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = train.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);  // gradient of 0.5 a'Qa - e'a
    constexpr double kTau = 1e-12;

    auto in_up = [&](Index t) { return (y(t) > 0 && alpha(t) < C) || (y(t) < 0 && alpha(t) > 0); };
    auto in_low = [&](Index t) { return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < C); };

    long iteration = 0;
    double gap = 0.0;
    while (true) {
        Index i = -1;
        Index j = -1;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            const double v = -y(t) * grad(t);
            if (in_up(t) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low(t) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        gap = (i < 0 || j < 0) ? 0.0 : m_up - m_low;
        if (gap < kSvmTolerance) break;
        if (iteration >= kSvmMaxIterations) throw SvmConvergenceError(gap, iteration);
        ++iteration;

        const double q_ii = kernel(i, i);
        const double q_jj = kernel(j, j);
        const double q_ij = y(i) * y(j) * kernel(i, j);
        const double old_i = alpha(i);
        const double old_j = alpha(j);
        if (y(i) != y(j)) {
            double quad = q_ii + q_jj + 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = -diff;
            }
            if (diff > 0.0) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = C - diff;
                }
            } else if (alpha(j) > C) {
                alpha(j) = C;
                alpha(i) = C + diff;
            }
        } else {
            double quad = q_ii + q_jj - 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > C) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = sum - C;
                }
            } else if (alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = sum;
            }
            if (sum > C) {
                if (alpha(j) > C) {
                    alpha(j) = C;
                    alpha(i) = sum - C;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = sum;
            }
        }
        const double d_i = alpha(i) - old_i;
        const double d_j = alpha(j) - old_j;
        for (Index t = 0; t < n; ++t) {
            grad(t) += y(t) * (y(i) * kernel(i, t) * d_i + y(j) * kernel(j, t) * d_j);
        }
    }

    SvmModel model;
    model.C = C;
    model.iterations = iteration;
    model.max_kkt_violation = gap;
    model.weights = Vector::Zero(train.feature_count());
    for (Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0) {
            model.support_indices.push_back(t);
            model.dual_coefficients.push_back(alpha(t));
            model.weights += alpha(t) * y(t) * train.features.row(t).transpose();
        }
    }

    double free_sum = 0.0;
    int free_count = 0;
    for (Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0 && alpha(t) < C) {
            free_sum += y(t) - train.features.row(t).dot(model.weights);
            ++free_count;
        }
    }
    if (free_count > 0) {
        model.bias = free_sum / free_count;
    } else {
        double max_negative = -std::numeric_limits<double>::infinity();
        double min_positive = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            const double v = train.features.row(t).dot(model.weights);
            if (y(t) < 0) max_negative = std::max(max_negative, v);
            else min_positive = std::min(min_positive, v);
        }
        model.bias = -(max_negative + min_positive) / 2.0;
    }
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> query) {
    require_query(query, model.weights.size(), "svm_predict");
    return model.weights.dot(as_vector(query)) + model.bias;
}

int svm_predict(const SvmModel& model, std::span<const double> query) {
    return svm_decision(model, query) > 0.0 ? 1 : 0;
}

std::string format_svm_json(const SvmModel& model) {
    nlohmann::ordered_json json;
    json["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    json["bias"] = model.bias;
    json["support_indices"] = model.support_indices;
    json["dual_coefficients"] = model.dual_coefficients;
    json["C"] = model.C;
    return json.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// NBC

double silverman_bandwidth(std::span<const double> values, double multiplier) {
    if (values.empty()) throw InvalidInput("silverman_bandwidth: no values");
    const double n = static_cast<double>(values.size());
    double variance = 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (values.size() > 1 && *lo != *hi) {
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        for (double v : values) variance += (v - mean) * (v - mean);
        variance /= n - 1.0;
    }
    const double sigma = std::sqrt(std::max(variance, kVarianceFloor));
    return multiplier * 1.06 * sigma * std::pow(n, -0.2);
}

NbcModel nbc_train(const TrainSet& train, double bandwidth_multiplier) {
    train.validate();
    if (!(bandwidth_multiplier > 0.0)) throw InvalidInput("nbc_train: bandwidth multiplier must be positive");
    NbcModel model;
    const Index d = train.feature_count();
    std::array<double, 2> counts{0.0, 0.0};
    for (int label : train.labels) counts[static_cast<std::size_t>(label)] += 1.0;
    for (std::size_t c = 0; c < 2; ++c) {
        model.samples[c].assign(static_cast<std::size_t>(d), {});
        model.bandwidths[c].assign(static_cast<std::size_t>(d), 0.0);
        model.priors[c] = counts[c] / static_cast<double>(train.sample_count());
    }
    for (Index i = 0; i < train.sample_count(); ++i) {
        const auto c = static_cast<std::size_t>(train.labels[static_cast<std::size_t>(i)]);
        for (Index f = 0; f < d; ++f) model.samples[c][static_cast<std::size_t>(f)].push_back(train.features(i, f));
    }
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < static_cast<std::size_t>(d); ++f) {
            model.bandwidths[c][f] = silverman_bandwidth(model.samples[c][f], bandwidth_multiplier);
        }
    }
    return model;
}

NbcPrediction nbc_predict(const NbcModel& model, std::span<const double> query) {
    require_query(query, model.feature_count(), "nbc_predict");
    const double log_norm = 0.5 * std::log(2.0 * M_PI);
    std::array<double, 2> log_joint{};
    std::vector<double> terms;
    for (std::size_t c = 0; c < 2; ++c) {
        double total = std::log(model.priors[c]);
        for (std::size_t f = 0; f < query.size(); ++f) {
            const auto& values = model.samples[c][f];
            const double h = model.bandwidths[c][f];
            terms.resize(values.size());
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double z = (query[f] - values[i]) / h;
                terms[i] = -0.5 * z * z;
            }
            total += log_sum_exp(terms) - std::log(static_cast<double>(values.size())) - std::log(h) - log_norm;
        }
        log_joint[c] = total;
    }
    const double evidence = log_sum_exp(log_joint);
    NbcPrediction out;
    out.posterior = {std::exp(log_joint[0] - evidence), std::exp(log_joint[1] - evidence)};
    out.label = log_joint[1] > log_joint[0] ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// MLP

MlpObjective::MlpObjective(const TrainSet& train, int hidden_count, double lambda)
    : train_(train), hidden_(hidden_count), lambda_(lambda) {
    if (hidden_count < 1) throw InvalidInput("mlp: hidden_count must be at least 1");
    if (!(lambda >= 0.0)) throw InvalidInput("mlp: lambda must be non-negative");
}

Index MlpObjective::parameter_count() const {
    const Index d = train_.feature_count();
    return hidden_ * d + 2 * hidden_ + 1;
}

MlpModel MlpObjective::unpack(const Vector& p) const {
    const Index d = train_.feature_count();
    const Index h = hidden_;
    MlpModel m;
    m.hidden_count = hidden_;
    m.lambda = lambda_;
    m.hidden_weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p.data(), h, d);
    m.hidden_bias = p.segment(h * d, h);
    m.output_weights = p.segment(h * d + h, h);
    m.output_bias = p(h * d + 2 * h);
    return m;
}

Vector MlpObjective::pack(const MlpModel& m) const {
    const Index d = train_.feature_count();
    const Index h = hidden_;
    Vector p(parameter_count());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p.data(), h, d) = m.hidden_weights;
    p.segment(h * d, h) = m.hidden_bias;
    p.segment(h * d + h, h) = m.output_weights;
    p(h * d + 2 * h) = m.output_bias;
    return p;
}

double MlpObjective::value(const Vector& params) const {
    Vector unused;
    return value_and_gradient(params, unused);
}

double MlpObjective::value_and_gradient(const Vector& params, Vector& gradient) const {
    const Index d = train_.feature_count();
    const Index h = hidden_;
    const Index n = train_.sample_count();
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> w1(params.data(), h, d);
    const auto b1 = params.segment(h * d, h);
    const auto w2 = params.segment(h * d + h, h);
    const double b2 = params(h * d + 2 * h);

    Matrix hidden = (train_.features * w1.transpose()).rowwise() + b1.transpose();
    hidden = hidden.unaryExpr([](double a) { return logistic(a); });
    const Vector activation = (hidden * w2).array() + b2;

    double loss = 0.0;
    Vector delta_out(n);
    for (Index i = 0; i < n; ++i) {
        const double target = train_.labels[static_cast<std::size_t>(i)];
        const double a = activation(i);
        loss += softplus(a) - target * a;
        delta_out(i) = logistic(a) - target;
    }
    loss += 0.5 * lambda_ * (w1.squaredNorm() + w2.squaredNorm());

    gradient.resize(parameter_count());
    const Matrix delta_hidden = ((delta_out * w2.transpose()).array() * hidden.array() * (1.0 - hidden.array())).matrix();
    Eigen::Map<RowMajor>(gradient.data(), h, d) = delta_hidden.transpose() * train_.features + lambda_ * w1;
    gradient.segment(h * d, h) = delta_hidden.colwise().sum().transpose();
    gradient.segment(h * d + h, h) = hidden.transpose() * delta_out + lambda_ * w2;
    gradient(h * d + 2 * h) = delta_out.sum();
    return loss;
}

MlpModel mlp_train(const TrainSet& train, int hidden_count, double lambda, std::uint64_t seed) {
    train.validate();
    const MlpObjective objective(train, hidden_count, lambda);
    const Index d = train.feature_count();
    const Index h = hidden_count;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    MlpModel init;
    init.hidden_weights.resize(h, d);
    init.hidden_bias.resize(h);
    init.output_weights.resize(h);
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(d));
    const double hid_scale = 1.0 / std::sqrt(static_cast<double>(h));
    for (Index r = 0; r < h; ++r) {
        for (Index c = 0; c < d; ++c) init.hidden_weights(r, c) = unit(rng) * in_scale;
        init.hidden_bias(r) = unit(rng) * in_scale;
    }
    for (Index r = 0; r < h; ++r) init.output_weights(r) = unit(rng) * hid_scale;
    init.output_bias = unit(rng) * hid_scale;

    // Scaled conjugate gradient (Moller 1993).
    constexpr double kSigma0 = 1e-4;
    constexpr double kBetaMin = 1e-15;
    constexpr double kBetaMax = 1e100;
    const Index n_params = objective.parameter_count();

    auto checked = [](double f) {
        if (!std::isfinite(f)) throw std::runtime_error("mlp_train: non-finite loss (check input normalization)");
        return f;
    };

    Vector x = objective.pack(init);
    Vector grad_new;
    double f_old = checked(objective.value_and_gradient(x, grad_new));
    Vector grad_old = grad_new;
    Vector direction = -grad_new;
    Vector grad_plus;
    bool success = true;
    Index n_success = 0;
    double beta = 1.0;
    double mu = 0.0;
    double kappa = 0.0;
    double theta = 0.0;

    std::vector<double> trace{f_old};
    int iteration = 0;
    while (iteration < kMlpMaxIterations && grad_new.norm() >= kMlpGradientTolerance) {
        ++iteration;
        if (success) {
            mu = direction.dot(grad_new);
            if (mu >= 0.0) {
                direction = -grad_new;
                mu = direction.dot(grad_new);
            }
            kappa = direction.squaredNorm();
            if (kappa < std::numeric_limits<double>::epsilon()) break;
            const double sigma = kSigma0 / std::sqrt(kappa);
            objective.value_and_gradient(x + sigma * direction, grad_plus);
            theta = direction.dot(grad_plus - grad_new) / sigma;
        }
        double delta = theta + beta * kappa;
        if (delta <= 0.0) {
            delta = beta * kappa;
            beta -= theta / kappa;
        }
        const double step = -mu / delta;
        const Vector x_new = x + step * direction;
        const double f_new = checked(objective.value(x_new));
        const double comparison = 2.0 * (f_new - f_old) / (step * mu);
        if (comparison >= 0.0) {
            success = true;
            ++n_success;
            x = x_new;
            trace.push_back(f_new);
            f_old = f_new;
            grad_old = grad_new;
            objective.value_and_gradient(x, grad_new);
            if (grad_new.squaredNorm() == 0.0) break;
        } else {
            success = false;
        }
        if (comparison < 0.25) beta = std::min(4.0 * beta, kBetaMax);
        if (comparison > 0.75) beta = std::max(0.5 * beta, kBetaMin);
        if (n_success == n_params) {
            direction = -grad_new;
            n_success = 0;
        } else if (success) {
            const double gamma = (grad_old - grad_new).dot(grad_new) / mu;
            direction = gamma * direction - grad_new;
        }
    }

    MlpModel model = objective.unpack(x);
    model.loss_trace = std::move(trace);
    model.iterations = iteration;
    return model;
}

MlpPrediction mlp_predict(const MlpModel& model, std::span<const double> query) {
    require_query(query, model.input_count(), "mlp_predict");
    const auto q = as_vector(query);
    const Vector hidden = (model.hidden_weights * q + model.hidden_bias).unaryExpr([](double a) { return logistic(a); });
    const double output = logistic(model.output_weights.dot(hidden) + model.output_bias);
    MlpPrediction out;
    out.label = output > 0.5 ? 1 : 0;
    // Saturated outputs stay strictly inside (0, 1).
    out.probability = std::clamp(output, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    return out;
}

std::string format_mlp_json(const MlpModel& model) {
    nlohmann::ordered_json json;
    json["hidden_count"] = model.hidden_count;
    std::vector<std::vector<double>> w1(static_cast<std::size_t>(model.hidden_weights.rows()));
    for (Index r = 0; r < model.hidden_weights.rows(); ++r) {
        for (Index c = 0; c < model.hidden_weights.cols(); ++c) w1[static_cast<std::size_t>(r)].push_back(model.hidden_weights(r, c));
    }
    json["hidden_weights"] = w1;
    json["hidden_bias"] = std::vector<double>(model.hidden_bias.begin(), model.hidden_bias.end());
    json["output_weights"] = std::vector<double>(model.output_weights.begin(), model.output_weights.end());
    json["output_bias"] = model.output_bias;
    json["lambda"] = model.lambda;
    return json.dump(2) + "\n";
}

} // namespace genefilter::classifiers
