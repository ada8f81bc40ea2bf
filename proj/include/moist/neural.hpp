#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace moist {

/// A computation produced NaN or infinity.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Activation { Relu, Softmax, Sigmoid, Identity };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

/// Fully connected layer y = act(W x + b); weights are out_dim x in_dim row-major.
struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> weights;
    std::vector<double> biases;
    Activation activation = Activation::Identity;

    bool operator==(const DenseLayer&) const = default;
};

struct Network {
    std::vector<DenseLayer> layers;

    int input_dim() const { return layers.front().in_dim; }
    int output_dim() const { return layers.back().out_dim; }
    std::size_t parameter_count() const;

    /// Throws std::invalid_argument unless dims chain, shapes match, every
    /// parameter is finite and softmax/sigmoid only appear last.
    void validate() const;

    bool operator==(const Network&) const = default;
};

struct LayerSpec {
    int out_dim;
    Activation activation;
};

struct NetworkSpec {
    int input_dim;
    std::vector<LayerSpec> layers;
};

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
Network init_network(const NetworkSpec& spec, std::uint64_t seed);

/// acts[0] is the input, acts[k + 1] the output of layer k.
using Activations = std::vector<std::vector<double>>;

Activations forward(const Network& net, std::span<const double> x);

/// Convenience: the last entry of forward().
std::vector<double> predict_output(const Network& net, std::span<const double> x);

/// Parameter gradients with the same shapes as the network.
struct Gradients {
    struct Layer {
        std::vector<double> weights;
        std::vector<double> biases;
    };
    std::vector<Layer> layers;

    static Gradients zeros_like(const Network& net);
    void scale(double factor);
    void add(const Gradients& other, double factor = 1.0);
    bool all_zero() const;
};

/// Where the incoming gradient is taken. `PreActivation` skips the final
/// activation's derivative, which is how the fused softmax+cross-entropy and
/// sigmoid+binary-cross-entropy gradient (prediction - target) is supplied.
enum class GradientAt { Output, PreActivation };

/// Backpropagates `output_grad`, adding parameter gradients into `into`.
/// Returns the gradient with respect to the network input.
std::vector<double> backward(const Network& net, const Activations& acts, std::span<const double> output_grad,
                             Gradients& into, GradientAt at = GradientAt::Output);

/// -sum_k y_k ln(p_k) for a one-hot target, with p clamped to [1e-12, 1].
double cross_entropy(std::span<const double> probs, int target_class);

/// -[d ln p + (1 - d) ln(1 - p)], with p clamped to [1e-12, 1 - 1e-12].
double binary_cross_entropy(double p, int label);

/// Backward pass of the gradient reversal layer: -lambda * grad.
std::vector<double> grl_backward(std::span<const double> grad, double lambda);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    long step = 0;
    Gradients first_moment;
    Gradients second_moment;

    static AdamState for_network(const Network& net, const AdamConfig& config = {});
};

/// One bias-corrected Adam update of `net` in place.
void adam_step(AdamState& state, Network& net, const Gradients& grads);

/// Ordered layer records {inDim, outDim, activation, weights, biases}.
nlohmann::ordered_json network_to_json(const Network& net);
Network network_from_json(const nlohmann::ordered_json& j);

}  // namespace moist
