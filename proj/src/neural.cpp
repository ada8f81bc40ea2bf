#include "moist/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace moist {

namespace {

constexpr double kProbFloor = 1e-12;

void check_same_shape(const Network& net, const Gradients& g, const char* who) {
    if (g.layers.size() != net.layers.size())
        throw std::invalid_argument(std::string(who) + ": gradient layer count mismatch");
    for (std::size_t k = 0; k < net.layers.size(); ++k)
        if (g.layers[k].weights.size() != net.layers[k].weights.size() ||
            g.layers[k].biases.size() != net.layers[k].biases.size())
            throw std::invalid_argument(std::string(who) + ": gradient shape mismatch");
}

double sigmoid(double z) {
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

std::string_view activation_name(Activation a) noexcept {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Softmax: return "softmax";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    for (Activation a : {Activation::Relu, Activation::Softmax, Activation::Sigmoid, Activation::Identity})
        if (activation_name(a) == name)
            return a;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers)
        n += l.weights.size() + l.biases.size();
    return n;
}

void Network::validate() const {
    if (layers.empty())
        throw std::invalid_argument("network has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const DenseLayer& l = layers[k];
        if (l.in_dim < 1 || l.out_dim < 1)
            throw std::invalid_argument("layer dimensions must be positive");
        if (l.weights.size() != static_cast<std::size_t>(l.in_dim) * l.out_dim ||
            l.biases.size() != static_cast<std::size_t>(l.out_dim))
            throw std::invalid_argument("layer parameter shape mismatch");
        if (k + 1 < layers.size() && l.out_dim != layers[k + 1].in_dim)
            throw std::invalid_argument("layer dimensions do not chain");
        if (k + 1 < layers.size() && (l.activation == Activation::Softmax || l.activation == Activation::Sigmoid))
            throw std::invalid_argument("softmax/sigmoid may only be the final activation");
        for (double w : l.weights)
            if (!std::isfinite(w))
                throw std::invalid_argument("non-finite weight");
        for (double b : l.biases)
            if (!std::isfinite(b))
                throw std::invalid_argument("non-finite bias");
    }
}

Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
    if (spec.input_dim < 1 || spec.layers.empty())
        throw std::invalid_argument("init_network: empty specification");
    std::mt19937_64 rng(seed);
    Network net;
    int in = spec.input_dim;
    for (const LayerSpec& ls : spec.layers) {
        if (ls.out_dim < 1)
            throw std::invalid_argument("init_network: layer width must be positive");
        DenseLayer l;
        l.in_dim = in;
        l.out_dim = ls.out_dim;
        l.activation = ls.activation;
        const double limit = std::sqrt(6.0 / (in + ls.out_dim));
        std::uniform_real_distribution<double> dist(-limit, limit);
        l.weights.resize(static_cast<std::size_t>(in) * ls.out_dim);
        for (double& w : l.weights)
            w = dist(rng);
        l.biases.assign(ls.out_dim, 0.0);
        net.layers.push_back(std::move(l));
        in = ls.out_dim;
    }
    net.validate();
    return net;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        sum += out[i];
    }
    for (double& v : out)
        v /= sum;
    return out;
}

Activations forward(const Network& net, std::span<const double> x) {
    if (net.layers.empty() || x.size() != static_cast<std::size_t>(net.input_dim()))
        throw std::invalid_argument("forward: input dimension mismatch");
    Activations acts;
    acts.reserve(net.layers.size() + 1);
    acts.emplace_back(x.begin(), x.end());
    for (const DenseLayer& l : net.layers) {
        const std::vector<double>& in = acts.back();
        std::vector<double> z(l.out_dim);
        for (int o = 0; o < l.out_dim; ++o) {
            const double* w = l.weights.data() + static_cast<std::size_t>(o) * l.in_dim;
            double s = l.biases[o];
            for (int i = 0; i < l.in_dim; ++i)
                s += w[i] * in[i];
            z[o] = s;
        }
        switch (l.activation) {
            case Activation::Relu:
                for (double& v : z)
                    v = v > 0.0 ? v : 0.0;
                break;
            case Activation::Sigmoid:
                for (double& v : z)
                    v = sigmoid(v);
                break;
            case Activation::Softmax: z = softmax(z); break;
            case Activation::Identity: break;
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

std::vector<double> predict_output(const Network& net, std::span<const double> x) {
    return std::move(forward(net, x).back());
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers)
        g.layers.push_back({std::vector<double>(l.weights.size(), 0.0), std::vector<double>(l.biases.size(), 0.0)});
    return g;
}

void Gradients::scale(double factor) {
    for (auto& l : layers) {
        for (double& v : l.weights)
            v *= factor;
        for (double& v : l.biases)
            v *= factor;
    }
}

void Gradients::add(const Gradients& other, double factor) {
    if (other.layers.size() != layers.size())
        throw std::invalid_argument("Gradients::add: layer count mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (other.layers[k].weights.size() != layers[k].weights.size() ||
            other.layers[k].biases.size() != layers[k].biases.size())
            throw std::invalid_argument("Gradients::add: shape mismatch");
        for (std::size_t i = 0; i < layers[k].weights.size(); ++i)
            layers[k].weights[i] += factor * other.layers[k].weights[i];
        for (std::size_t i = 0; i < layers[k].biases.size(); ++i)
            layers[k].biases[i] += factor * other.layers[k].biases[i];
    }
}

bool Gradients::all_zero() const {
    for (const auto& l : layers) {
        for (double v : l.weights)
            if (v != 0.0)
                return false;
        for (double v : l.biases)
            if (v != 0.0)
                return false;
    }
    return true;
}

std::vector<double> backward(const Network& net, const Activations& acts, std::span<const double> output_grad,
                             Gradients& into, GradientAt at) {
    if (acts.size() != net.layers.size() + 1)
        throw std::invalid_argument("backward: activations do not belong to this network");
    if (output_grad.size() != static_cast<std::size_t>(net.output_dim()))
        throw std::invalid_argument("backward: output gradient dimension mismatch");
    check_same_shape(net, into, "backward");

    std::vector<double> grad(output_grad.begin(), output_grad.end());
    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const DenseLayer& l = net.layers[k];
        const std::vector<double>& out = acts[k + 1];
        const std::vector<double>& in = acts[k];
        if (out.size() != static_cast<std::size_t>(l.out_dim) || in.size() != static_cast<std::size_t>(l.in_dim))
            throw std::invalid_argument("backward: activation shape mismatch");

        // grad currently holds dL/d(output of layer k); turn it into dL/dz.
        const bool skip_activation = at == GradientAt::PreActivation && k + 1 == net.layers.size();
        if (!skip_activation) {
            switch (l.activation) {
                case Activation::Relu:
                    for (int o = 0; o < l.out_dim; ++o)
                        if (out[o] <= 0.0)
                            grad[o] = 0.0;
                    break;
                case Activation::Sigmoid:
                    for (int o = 0; o < l.out_dim; ++o)
                        grad[o] *= out[o] * (1.0 - out[o]);
                    break;
                case Activation::Softmax: {
                    double dot = 0;
                    for (int o = 0; o < l.out_dim; ++o)
                        dot += grad[o] * out[o];
                    for (int o = 0; o < l.out_dim; ++o)
                        grad[o] = out[o] * (grad[o] - dot);
                    break;
                }
                case Activation::Identity: break;
            }
        }

        auto& g = into.layers[k];
        std::vector<double> grad_in(l.in_dim, 0.0);
        for (int o = 0; o < l.out_dim; ++o) {
            const double go = grad[o];
            if (go == 0.0)
                continue;
            g.biases[o] += go;
            double* gw = g.weights.data() + static_cast<std::size_t>(o) * l.in_dim;
            const double* w = l.weights.data() + static_cast<std::size_t>(o) * l.in_dim;
            for (int i = 0; i < l.in_dim; ++i) {
                gw[i] += go * in[i];
                grad_in[i] += go * w[i];
            }
        }
        grad = std::move(grad_in);
    }
    return grad;
}

double cross_entropy(std::span<const double> probs, int target_class) {
    if (target_class < 0 || static_cast<std::size_t>(target_class) >= probs.size())
        throw std::invalid_argument("cross_entropy: class index out of range");
    return -std::log(std::clamp(probs[target_class], kProbFloor, 1.0));
}

double binary_cross_entropy(double p, int label) {
    const double q = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
    return label ? -std::log(q) : -std::log(1.0 - q);
}

std::vector<double> grl_backward(std::span<const double> grad, double lambda) {
    std::vector<double> out(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i)
        out[i] = -lambda * grad[i];
    return out;
}

AdamState AdamState::for_network(const Network& net, const AdamConfig& config) {
    return AdamState{config, 0, Gradients::zeros_like(net), Gradients::zeros_like(net)};
}

void adam_step(AdamState& state, Network& net, const Gradients& grads) {
    check_same_shape(net, grads, "adam_step");
    check_same_shape(net, state.first_moment, "adam_step");
    check_same_shape(net, state.second_moment, "adam_step");
    const AdamConfig& c = state.config;
    ++state.step;
    const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& param, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            param[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        update(net.layers[k].weights, grads.layers[k].weights, state.first_moment.layers[k].weights,
               state.second_moment.layers[k].weights);
        update(net.layers[k].biases, grads.layers[k].biases, state.first_moment.layers[k].biases,
               state.second_moment.layers[k].biases);
    }
}

nlohmann::ordered_json network_to_json(const Network& net) {
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const DenseLayer& l : net.layers) {
        nlohmann::ordered_json rec;
        rec["inDim"] = l.in_dim;
        rec["outDim"] = l.out_dim;
        rec["activation"] = activation_name(l.activation);
        rec["weights"] = l.weights;
        rec["biases"] = l.biases;
        layers.push_back(std::move(rec));
    }
    return layers;
}

Network network_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_array())
        throw std::invalid_argument("network JSON must be an array of layers");
    Network net;
    for (const auto& rec : j) {
        DenseLayer l;
        l.in_dim = rec.at("inDim").get<int>();
        l.out_dim = rec.at("outDim").get<int>();
        l.activation = parse_activation(rec.at("activation").get<std::string>());
        l.weights = rec.at("weights").get<std::vector<double>>();
        l.biases = rec.at("biases").get<std::vector<double>>();
        net.layers.push_back(std::move(l));
    }
    net.validate();
    return net;
}

}  // namespace moist
