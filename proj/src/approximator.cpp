#include "distexp/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace distexp {

namespace {

// Output layer weights start small so the head biases set the initial distribution.
constexpr double kHeadInitScale = 0.1;

double softplus(double x)
{
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x)
{
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double inverse_softplus(double y)
{
    return y > 30.0 ? y : std::log(std::expm1(y));
}

std::vector<double> softmax(std::span<const double> logits)
{
    const double hi = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - hi);
        total += p[i];
    }
    for (double &x : p) {
        x /= total;
    }
    return p;
}

// d(loss)/d(logits) given d(loss)/d(probs) for a softmax layer.
void softmax_backward(std::span<const double> probs, std::span<const double> grad_probs, std::span<double> out)
{
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        dot += probs[i] * grad_probs[i];
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        out[i] = probs[i] * grad_probs[i] - probs[i] * dot;
    }
}

Eigen::MatrixXd elu(const Eigen::MatrixXd &z)
{
    return (z.array() > 0.0).select(z, z.array().exp() - 1.0);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd &m)
{
    return nlohmann::json{{"rows", m.rows()},
                          {"cols", m.cols()},
                          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json &j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::invalid_argument("checkpoint: matrix size mismatch");
    }
    return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

}  // namespace

int HeadSpec::output_size() const
{
    switch (family) {
    case Family::gaussian:
        return 2;
    case Family::categorical:
        return n_bins;
    case Family::mixture:
        return 3 * n_components;
    }
    return 0;
}

void HeadSpec::validate() const
{
    if (family == Family::categorical && n_bins < 2) {
        throw std::invalid_argument("head.n_bins must be >= 2");
    }
    if (family == Family::mixture && n_components < 1) {
        throw std::invalid_argument("head.n_components must be >= 1");
    }
    if (!(z_min < z_max)) {
        throw std::invalid_argument("head.z_min must be below head.z_max");
    }
}

void ApproximatorConfig::validate() const
{
    head.validate();
    if (state_dim < 1 || n_actions < 1 || hidden_units < 1 || hidden_layers < 0) {
        throw std::invalid_argument("approximator: invalid network dimensions");
    }
    if (!(grad_clip > 0.0) || !(sigma_floor > 0.0)) {
        throw std::invalid_argument("approximator: grad_clip and sigma_floor must be positive");
    }
    if (loss == LossKind::sample_nll && (head.family == Family::categorical || nll_samples < 1)) {
        throw std::invalid_argument("approximator: sample NLL needs a density head and nll_samples >= 1");
    }
}

Mlp::Mlp(int input_dim, int hidden_units, int hidden_layers, int output_dim, Rng &rng)
{
    int fan_in = input_dim;
    for (int l = 0; l <= hidden_layers; ++l) {
        const bool is_head = l == hidden_layers;
        const int fan_out = is_head ? output_dim : hidden_units;
        const double w_limit = is_head ? kHeadInitScale * std::sqrt(3.0 / fan_in) : std::sqrt(6.0 / fan_in);
        const double b_limit = is_head ? 0.0 : 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> w_dist(-w_limit, w_limit);
        std::uniform_real_distribution<double> b_dist(-b_limit, b_limit);

        Layer layer;
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
                layer.weights(r, c) = w_dist(rng);
            }
        }
        layer.bias.resize(fan_out);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = b_limit > 0.0 ? b_dist(rng) : 0.0;
        }
        layer.m_weights = Eigen::MatrixXd::Zero(fan_out, fan_in);
        layer.v_weights = Eigen::MatrixXd::Zero(fan_out, fan_in);
        layer.m_bias = Eigen::VectorXd::Zero(fan_out);
        layer.v_bias = Eigen::VectorXd::Zero(fan_out);
        layers_.push_back(std::move(layer));
        fan_in = fan_out;
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd &x, Cache *cache) const
{
    if (cache) {
        cache->activations.clear();
        cache->activations.push_back(x);
    }
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = layers_[l].weights * h;
        z.colwise() += layers_[l].bias;
        if (l + 1 == layers_.size()) {
            return z;
        }
        h = elu(z);
        if (cache) {
            cache->activations.push_back(h);
        }
    }
    return h;
}

void Mlp::backward(const Cache &cache, const Eigen::MatrixXd &grad_output, Gradients &grads) const
{
    Eigen::MatrixXd delta = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Eigen::MatrixXd &input = cache.activations[l];
        grads.weights[l].noalias() += delta * input.transpose();
        grads.bias[l] += delta.rowwise().sum();
        if (l == 0) {
            break;
        }
        Eigen::MatrixXd upstream = layers_[l].weights.transpose() * delta;
        // ELU'(z) = 1 for z > 0, else elu(z) + 1.
        delta = (input.array() > 0.0).select(upstream, upstream.array() * (input.array() + 1.0));
    }
}

Mlp::Gradients Mlp::zero_gradients() const
{
    Gradients g;
    for (const auto &layer : layers_) {
        g.weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
        g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
    return g;
}

void Mlp::adam_update(const Gradients &grads, double lr, double beta1, double beta2, double eps, std::int64_t step)
{
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const double step_size = lr * std::sqrt(c2) / c1;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Layer &layer = layers_[l];
        layer.m_weights = beta1 * layer.m_weights + (1.0 - beta1) * grads.weights[l];
        layer.v_weights = beta2 * layer.v_weights + (1.0 - beta2) * grads.weights[l].cwiseAbs2();
        layer.weights.array() -= step_size * layer.m_weights.array() / (layer.v_weights.array().sqrt() + eps);

        layer.m_bias = beta1 * layer.m_bias + (1.0 - beta1) * grads.bias[l];
        layer.v_bias = beta2 * layer.v_bias + (1.0 - beta2) * grads.bias[l].cwiseAbs2();
        layer.bias.array() -= step_size * layer.m_bias.array() / (layer.v_bias.array().sqrt() + eps);
    }
}

Approximator::Approximator(ApproximatorConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed)
{
    config_.validate();
    for (int a = 0; a < config_.n_actions; ++a) {
        networks_.emplace_back(
            config_.state_dim, config_.hidden_units, config_.hidden_layers, config_.head.output_size(), rng_);
    }
    apply_head_init_bias();
}

void Approximator::apply_head_init_bias()
{
    const HeadSpec &h = config_.head;
    const double sigma_bias = inverse_softplus(1.0 - config_.sigma_floor);
    for (Mlp &net : networks_) {
        Eigen::VectorXd &bias = net.layers().back().bias;
        switch (h.family) {
        case Family::gaussian:
            bias(0) = 0.0;
            bias(1) = sigma_bias;
            break;
        case Family::categorical:
            bias.setZero();
            break;
        case Family::mixture: {
            const int m = h.n_components;
            const double width = (h.z_max - h.z_min) / m;
            for (int i = 0; i < m; ++i) {
                bias(i) = 0.0;
                bias(m + i) = h.z_min + (i + 0.5) * width;
                bias(2 * m + i) = sigma_bias;
            }
            break;
        }
        }
    }
}

ReturnDistribution Approximator::head_to_dist(std::span<const double> raw) const
{
    const HeadSpec &h = config_.head;
    switch (h.family) {
    case Family::gaussian:
        return GaussianDist{raw[0], softplus(raw[1]) + config_.sigma_floor};
    case Family::categorical:
        return CategoricalDist{h.z_min, h.z_max, softmax(raw)};
    case Family::mixture: {
        const auto m = static_cast<std::size_t>(h.n_components);
        std::vector<double> mus(raw.begin() + m, raw.begin() + 2 * m);
        std::vector<double> sigmas(m);
        for (std::size_t i = 0; i < m; ++i) {
            sigmas[i] = softplus(raw[2 * m + i]) + config_.sigma_floor;
        }
        return MixtureDist{softmax(raw.subspan(0, m)), std::move(mus), std::move(sigmas)};
    }
    }
    throw std::logic_error("head_to_dist: unknown family");
}

std::vector<double> Approximator::head_backward(std::span<const double> raw, std::span<const double> dist_grad) const
{
    const HeadSpec &h = config_.head;
    std::vector<double> out(raw.size());
    switch (h.family) {
    case Family::gaussian:
        out[0] = dist_grad[0];
        out[1] = dist_grad[1] * sigmoid(raw[1]);
        break;
    case Family::categorical:
        softmax_backward(softmax(raw), dist_grad, out);
        break;
    case Family::mixture: {
        const auto m = static_cast<std::size_t>(h.n_components);
        const auto weights = softmax(raw.subspan(0, m));
        softmax_backward(weights, dist_grad.subspan(0, m), std::span<double>(out).subspan(0, m));
        for (std::size_t i = 0; i < m; ++i) {
            out[m + i] = dist_grad[m + i];
            out[2 * m + i] = dist_grad[2 * m + i] * sigmoid(raw[2 * m + i]);
        }
        break;
    }
    }
    return out;
}

Eigen::MatrixXd Approximator::encode_batch(std::span<const StateEncoding> states) const
{
    Eigen::MatrixXd x(config_.state_dim, static_cast<Eigen::Index>(states.size()));
    for (std::size_t c = 0; c < states.size(); ++c) {
        if (static_cast<int>(states[c].size()) != config_.state_dim) {
            throw std::invalid_argument("approximator: state encoding has wrong length");
        }
        for (int r = 0; r < config_.state_dim; ++r) {
            x(r, static_cast<Eigen::Index>(c)) = states[c][static_cast<std::size_t>(r)];
        }
    }
    return x;
}

ReturnDistribution Approximator::predict(const StateEncoding &state, int action) const
{
    return predict_batch(std::span(&state, 1), action).front();
}

std::vector<ReturnDistribution> Approximator::predict_all(const StateEncoding &state) const
{
    std::vector<ReturnDistribution> out;
    out.reserve(static_cast<std::size_t>(config_.n_actions));
    for (int a = 0; a < config_.n_actions; ++a) {
        out.push_back(predict(state, a));
    }
    return out;
}

std::vector<ReturnDistribution> Approximator::predict_batch(std::span<const StateEncoding> states, int action) const
{
    if (action < 0 || action >= config_.n_actions) {
        throw std::out_of_range("approximator: action index out of range");
    }
    const Eigen::MatrixXd raw = networks_[static_cast<std::size_t>(action)].forward(encode_batch(states));
    std::vector<ReturnDistribution> out;
    out.reserve(states.size());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        out.push_back(head_to_dist(std::span<const double>(raw.col(c).data(), static_cast<std::size_t>(raw.rows()))));
    }
    return out;
}

LossValue Approximator::example_loss(const ReturnDistribution &prediction, const BellmanTarget &target)
{
    if (family_of(prediction) != family_of(target.dist)) {
        throw std::invalid_argument("train_step: target family does not match the head");
    }
    if (config_.loss == LossKind::sample_nll) {
        std::vector<double> samples(static_cast<std::size_t>(config_.nll_samples));
        for (double &z : samples) {
            z = sample(target.dist, rng_);
        }
        LossValue lv = sample_nll_grad(prediction, 0.0, 1.0, samples);
        const double k = static_cast<double>(samples.size());
        lv.value /= k;
        for (double &g : lv.gradients) {
            g /= k;
        }
        return lv;
    }
    switch (family_of(prediction)) {
    case Family::gaussian:
        return gaussian_cross_entropy_grad(std::get<GaussianDist>(target.dist), std::get<GaussianDist>(prediction));
    case Family::categorical:
        return categorical_cross_entropy_grad(std::get<CategoricalDist>(target.dist),
                                              std::get<CategoricalDist>(prediction));
    case Family::mixture:
        return mixture_l2_objective_grad(std::get<MixtureDist>(target.dist), std::get<MixtureDist>(prediction));
    }
    throw std::logic_error("example_loss: unknown family");
}

TrainStats Approximator::train_step(std::span<const TrainingExample> batch, double lr)
{
    if (batch.empty()) {
        throw std::invalid_argument("train_step: empty minibatch");
    }
    const auto n = static_cast<double>(batch.size());
    const int out_dim = config_.head.output_size();

    std::vector<Mlp::Gradients> grads;
    grads.reserve(networks_.size());
    for (const Mlp &net : networks_) {
        grads.push_back(net.zero_gradients());
    }

    TrainStats stats;
    double loss_sum = 0.0;
    for (int a = 0; a < config_.n_actions; ++a) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (batch[i].action == a) {
                idx.push_back(i);
            } else if (batch[i].action < 0 || batch[i].action >= config_.n_actions) {
                throw std::out_of_range("train_step: action index out of range");
            }
        }
        if (idx.empty()) {
            continue;
        }
        std::vector<StateEncoding> states;
        states.reserve(idx.size());
        for (std::size_t i : idx) {
            states.push_back(batch[i].state);
        }
        const Mlp &net = networks_[static_cast<std::size_t>(a)];
        Mlp::Cache cache;
        const Eigen::MatrixXd raw = net.forward(encode_batch(states), &cache);
        if (!raw.allFinite()) {
            loss_sum = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        Eigen::MatrixXd grad_out(out_dim, raw.cols());
        for (Eigen::Index c = 0; c < raw.cols(); ++c) {
            const std::span<const double> raw_col(raw.col(c).data(), static_cast<std::size_t>(out_dim));
            const ReturnDistribution pred = head_to_dist(raw_col);
            const LossValue lv = example_loss(pred, batch[idx[static_cast<std::size_t>(c)]].target);
            loss_sum += lv.value;
            const std::vector<double> g = head_backward(raw_col, lv.gradients);
            for (int r = 0; r < out_dim; ++r) {
                grad_out(r, c) = g[static_cast<std::size_t>(r)];
            }
        }
        net.backward(cache, grad_out, grads[static_cast<std::size_t>(a)]);
    }
    stats.mean_loss = loss_sum / n;

    double sq = 0.0;
    for (const auto &g : grads) {
        for (const auto &w : g.weights) {
            sq += w.squaredNorm();
        }
        for (const auto &b : g.bias) {
            sq += b.squaredNorm();
        }
    }
    stats.grad_norm = std::sqrt(sq);
    if (!std::isfinite(stats.mean_loss) || !std::isfinite(stats.grad_norm)) {
        std::ostringstream msg;
        msg << "non-finite update skipped at step " << step_ << ": loss=" << stats.mean_loss
            << " grad_norm=" << stats.grad_norm << " batch=" << batch.size();
        stats.diagnostics = msg.str();
        return stats;
    }

    const double scale = stats.grad_norm > config_.grad_clip ? config_.grad_clip / stats.grad_norm : 1.0;
    stats.clipped_norm = stats.grad_norm * scale;
    ++step_;
    for (std::size_t a = 0; a < networks_.size(); ++a) {
        if (scale != 1.0) {
            for (auto &w : grads[a].weights) {
                w *= scale;
            }
            for (auto &b : grads[a].bias) {
                b *= scale;
            }
        }
        networks_[a].adam_update(
            grads[a], lr, config_.adam_beta1, config_.adam_beta2, config_.adam_epsilon, step_);
    }
    stats.applied = true;
    return stats;
}

nlohmann::json head_spec_to_json(const HeadSpec &h)
{
    return nlohmann::json{{"family", family_name(h.family)},
                          {"n_bins", h.n_bins},
                          {"z_min", h.z_min},
                          {"z_max", h.z_max},
                          {"n_components", h.n_components}};
}

HeadSpec head_spec_from_json(const nlohmann::json &j)
{
    HeadSpec h;
    h.family = parse_family(j.at("family").get<std::string>());
    h.n_bins = j.at("n_bins").get<int>();
    h.z_min = j.at("z_min").get<double>();
    h.z_max = j.at("z_max").get<double>();
    h.n_components = j.at("n_components").get<int>();
    return h;
}

nlohmann::json Approximator::to_json() const
{
    nlohmann::json cfg{{"state_dim", config_.state_dim},
                       {"n_actions", config_.n_actions},
                       {"head", head_spec_to_json(config_.head)},
                       {"hidden_units", config_.hidden_units},
                       {"hidden_layers", config_.hidden_layers},
                       {"grad_clip", config_.grad_clip},
                       {"sigma_floor", config_.sigma_floor},
                       {"adam_beta1", config_.adam_beta1},
                       {"adam_beta2", config_.adam_beta2},
                       {"adam_epsilon", config_.adam_epsilon},
                       {"loss", config_.loss == LossKind::sample_nll ? "sample_nll" : "closed_form"},
                       {"nll_samples", config_.nll_samples}};
    nlohmann::json nets = nlohmann::json::array();
    for (const Mlp &net : networks_) {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto &l : net.layers()) {
            layers.push_back({{"weights", matrix_to_json(l.weights)},
                              {"bias", matrix_to_json(l.bias)},
                              {"m_weights", matrix_to_json(l.m_weights)},
                              {"v_weights", matrix_to_json(l.v_weights)},
                              {"m_bias", matrix_to_json(l.m_bias)},
                              {"v_bias", matrix_to_json(l.v_bias)}});
        }
        nets.push_back(std::move(layers));
    }
    std::ostringstream rng_state;
    rng_state << rng_;
    return nlohmann::json{{"config", cfg}, {"step", step_}, {"rng", rng_state.str()}, {"networks", nets}};
}

Approximator Approximator::from_json(const nlohmann::json &j)
{
    Approximator out;
    const auto &cfg = j.at("config");
    out.config_.state_dim = cfg.at("state_dim").get<int>();
    out.config_.n_actions = cfg.at("n_actions").get<int>();
    out.config_.head = head_spec_from_json(cfg.at("head"));
    out.config_.hidden_units = cfg.at("hidden_units").get<int>();
    out.config_.hidden_layers = cfg.at("hidden_layers").get<int>();
    out.config_.grad_clip = cfg.at("grad_clip").get<double>();
    out.config_.sigma_floor = cfg.at("sigma_floor").get<double>();
    out.config_.adam_beta1 = cfg.at("adam_beta1").get<double>();
    out.config_.adam_beta2 = cfg.at("adam_beta2").get<double>();
    out.config_.adam_epsilon = cfg.at("adam_epsilon").get<double>();
    out.config_.loss = cfg.at("loss").get<std::string>() == "sample_nll" ? LossKind::sample_nll : LossKind::closed_form;
    out.config_.nll_samples = cfg.at("nll_samples").get<int>();
    out.config_.validate();
    out.step_ = j.at("step").get<std::int64_t>();
    std::istringstream rng_state(j.at("rng").get<std::string>());
    rng_state >> out.rng_;

    const auto &nets = j.at("networks");
    if (static_cast<int>(nets.size()) != out.config_.n_actions) {
        throw std::invalid_argument("checkpoint: network count does not match n_actions");
    }
    for (const auto &layers : nets) {
        Mlp net;
        for (const auto &lj : layers) {
            Mlp::Layer l;
            l.weights = matrix_from_json(lj.at("weights"));
            l.bias = matrix_from_json(lj.at("bias"));
            l.m_weights = matrix_from_json(lj.at("m_weights"));
            l.v_weights = matrix_from_json(lj.at("v_weights"));
            l.m_bias = matrix_from_json(lj.at("m_bias"));
            l.v_bias = matrix_from_json(lj.at("v_bias"));
            net.layers().push_back(std::move(l));
        }
        out.networks_.push_back(std::move(net));
    }
    return out;
}

void Approximator::save(const std::filesystem::path &path) const
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    os << to_json().dump();
}

Approximator Approximator::load(const std::filesystem::path &path)
{
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot read checkpoint " + path.string());
    }
    return from_json(nlohmann::json::parse(is));
}

}  // namespace distexp
