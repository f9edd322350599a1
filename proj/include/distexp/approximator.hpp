#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "distexp/bellman.hpp"
#include "distexp/dist.hpp"
#include "distexp/loss.hpp"

namespace distexp {

/// Output family of the network plus the family-specific sizes.
struct HeadSpec {
    Family family = Family::gaussian;
    int n_bins = 7;
    double z_min = -0.2;
    double z_max = 1.2;
    int n_components = 5;

    /// Number of raw network outputs the head consumes.
    int output_size() const;
    void validate() const;

    bool operator==(const HeadSpec &) const = default;
};

enum class LossKind { closed_form, sample_nll };

struct ApproximatorConfig {
    int state_dim = 1;
    int n_actions = 2;
    HeadSpec head;
    int hidden_units = 256;
    int hidden_layers = 3;
    double grad_clip = 5.0;
    double sigma_floor = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    LossKind loss = LossKind::closed_form;
    int nll_samples = 8;

    void validate() const;
    bool operator==(const ApproximatorConfig &) const = default;
};

struct TrainingExample {
    StateEncoding state;
    int action = 0;
    BellmanTarget target;
};

struct TrainStats {
    double mean_loss = 0.0;
    double grad_norm = 0.0;     // before clipping
    double clipped_norm = 0.0;  // after clipping
    bool applied = false;
    std::string diagnostics;    // set when the update was skipped
};

/// Fully connected ELU network with Adam moment state.
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd weights;
        Eigen::VectorXd bias;
        Eigen::MatrixXd m_weights, v_weights;
        Eigen::VectorXd m_bias, v_bias;
    };

    struct Gradients {
        std::vector<Eigen::MatrixXd> weights;
        std::vector<Eigen::VectorXd> bias;
    };

    struct Cache {
        std::vector<Eigen::MatrixXd> activations;  // input plus each hidden output
    };

    Mlp() = default;
    Mlp(int input_dim, int hidden_units, int hidden_layers, int output_dim, Rng &rng);

    /// Forward pass on a column-per-sample batch.
    Eigen::MatrixXd forward(const Eigen::MatrixXd &x, Cache *cache = nullptr) const;

    /// Accumulates parameter gradients for d(loss)/d(output) into grads.
    void backward(const Cache &cache, const Eigen::MatrixXd &grad_output, Gradients &grads) const;

    Gradients zero_gradients() const;
    void adam_update(const Gradients &grads, double lr, double beta1, double beta2, double eps, std::int64_t step);

    std::vector<Layer> &layers() { return layers_; }
    const std::vector<Layer> &layers() const { return layers_; }

private:
    std::vector<Layer> layers_;
};

/// Per-action networks mapping a state encoding to one ReturnDistribution.
class Approximator {
public:
    Approximator(ApproximatorConfig config, std::uint64_t seed);

    const ApproximatorConfig &config() const { return config_; }
    std::int64_t step() const { return step_; }

    ReturnDistribution predict(const StateEncoding &state, int action) const;
    /// One distribution per action at a single state.
    std::vector<ReturnDistribution> predict_all(const StateEncoding &state) const;
    /// One distribution per state for a single action.
    std::vector<ReturnDistribution> predict_batch(std::span<const StateEncoding> states, int action) const;

    /// Family loss summed over the minibatch, one clipped Adam update. Returns the
    /// mean pre-update loss; a non-finite loss or gradient skips the update.
    TrainStats train_step(std::span<const TrainingExample> batch, double lr);

    /// Maps raw head outputs to a distribution.
    ReturnDistribution head_to_dist(std::span<const double> raw) const;
    /// Chains a loss gradient w.r.t. distribution parameters back to raw outputs.
    std::vector<double> head_backward(std::span<const double> raw, std::span<const double> dist_grad) const;

    nlohmann::json to_json() const;
    static Approximator from_json(const nlohmann::json &j);
    void save(const std::filesystem::path &path) const;
    static Approximator load(const std::filesystem::path &path);

    const std::vector<Mlp> &networks() const { return networks_; }
    std::vector<Mlp> &networks() { return networks_; }

private:
    Approximator() = default;

    LossValue example_loss(const ReturnDistribution &prediction, const BellmanTarget &target);
    Eigen::MatrixXd encode_batch(std::span<const StateEncoding> states) const;
    void apply_head_init_bias();

    ApproximatorConfig config_;
    std::vector<Mlp> networks_;
    std::int64_t step_ = 0;
    Rng rng_;
};

nlohmann::json head_spec_to_json(const HeadSpec &h);
HeadSpec head_spec_from_json(const nlohmann::json &j);

}  // namespace distexp
