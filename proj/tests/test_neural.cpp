#include <cmath>
#include <random>

#include "doctest.h"
#include "finite_diff.hpp"
#include "moist/neural.hpp"

using namespace moist;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v)
        x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("forward basics") {
    Network id;
    id.layers.push_back({3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}, Activation::Identity});
    const std::vector<double> x = {0.5, -2.0, 7.0};
    CHECK(predict_output(id, x) == x);

    Network sm;
    sm.layers.push_back({2, 3, std::vector<double>(6, 0.0), {0, 0, 0}, Activation::Softmax});
    for (double p : predict_output(sm, std::vector<double>{1.0, 2.0}))
        CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    Network sg;
    sg.layers.push_back({1, 1, {0.0}, {0.0}, Activation::Sigmoid});
    CHECK(predict_output(sg, std::vector<double>{4.0})[0] == 0.5);

    CHECK_THROWS_AS(forward(id, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("softmax stays on the simplex for large logits") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(2 + trial % 5);
        for (double& v : z)
            v = d(rng);
        const auto p = softmax(z);
        double s = 0;
        for (double v : p) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 1e-6);
    }
}

TEST_CASE("loss values") {
    CHECK(cross_entropy(std::vector<double>{1, 0, 0}, 0) == 0.0);
    CHECK(cross_entropy(std::vector<double>{1. / 3, 1. / 3, 1. / 3}, 2) == doctest::Approx(std::log(3.0)));
    CHECK(cross_entropy(std::vector<double>{0.7, 0.2, 0.1}, 1) == doctest::Approx(1.6094379124341003));
    CHECK(std::isfinite(cross_entropy(std::vector<double>{1, 0, 0}, 1)));
    CHECK(cross_entropy(std::vector<double>{1, 0, 0}, 1) == doctest::Approx(-std::log(1e-12)));

    CHECK(binary_cross_entropy(0.5, 1) == doctest::Approx(std::log(2.0)));
    CHECK(binary_cross_entropy(1.0 - 1e-12, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(binary_cross_entropy(1.0 - 1e-12, 1) < 1e-11);
    CHECK(binary_cross_entropy(0.9, 0) == doctest::Approx(2.302585092994046));
    CHECK(std::isfinite(binary_cross_entropy(0.0, 1)));
    CHECK(binary_cross_entropy(0.0, 0) >= 0.0);
}

TEST_CASE("gradient reversal") {
    const std::vector<double> g = {1.0, -2.0};
    CHECK(grl_backward(g, 0.5) == std::vector<double>{-0.5, 1.0});
    for (double v : grl_backward(g, 0.0))
        CHECK(v == 0.0);
    CHECK(grl_backward(g, 1.0) == std::vector<double>{-1.0, 2.0});
}

TEST_CASE("init_network shapes, bounds and determinism") {
    const NetworkSpec spec{63, {{32, Activation::Relu}}};
    const Network a = init_network(spec, 7);
    const Network b = init_network(spec, 7);
    const Network c = init_network(spec, 8);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    REQUIRE(a.layers.size() == 1);
    CHECK(a.layers[0].weights.size() == 2016);
    CHECK(a.layers[0].biases.size() == 32);
    const double limit = std::sqrt(6.0 / 95.0);
    for (double w : a.layers[0].weights)
        CHECK(std::abs(w) <= limit);
    for (double bias : a.layers[0].biases)
        CHECK(bias == 0.0);

    CHECK_THROWS_AS(init_network({0, {{3, Activation::Relu}}}, 1), std::invalid_argument);
    CHECK_THROWS_AS(init_network({4, {{3, Activation::Softmax}, {2, Activation::Relu}}}, 1), std::invalid_argument);
}

TEST_CASE("backward base cases") {
    Network lin;
    lin.layers.push_back({1, 1, {2.5}, {0.0}, Activation::Identity});
    const auto acts = forward(lin, std::vector<double>{3.0});
    Gradients g = Gradients::zeros_like(lin);
    const auto gin = backward(lin, acts, std::vector<double>{0.7}, g);
    CHECK(g.layers[0].weights[0] == doctest::Approx(3.0 * 0.7));
    CHECK(g.layers[0].biases[0] == doctest::Approx(0.7));
    CHECK(gin[0] == doctest::Approx(2.5 * 0.7));

    std::mt19937_64 rng(2);
    const Network net = init_network({5, {{4, Activation::Relu}, {3, Activation::Softmax}}}, 3);
    Gradients z = Gradients::zeros_like(net);
    backward(net, forward(net, random_vector(rng, 5)), std::vector<double>{0, 0, 0}, z);
    CHECK(z.all_zero());

    Gradients wrong = Gradients::zeros_like(init_network({5, {{2, Activation::Relu}}}, 1));
    CHECK_THROWS_AS(backward(net, forward(net, random_vector(rng, 5)), std::vector<double>{0, 0, 0}, wrong),
                    std::invalid_argument);
    CHECK_THROWS_AS(backward(net, forward(net, random_vector(rng, 5)), std::vector<double>{0, 0}, z),
                    std::invalid_argument);
}

TEST_CASE("backward matches finite differences") {
    std::mt19937_64 rng(4);
    const std::vector<NetworkSpec> specs = {
        {6, {{5, Activation::Relu}, {4, Activation::Identity}}},
        {6, {{5, Activation::Relu}, {3, Activation::Softmax}}},
        {6, {{4, Activation::Relu}, {1, Activation::Sigmoid}}},
        {7, {{6, Activation::Relu}, {5, Activation::Relu}, {3, Activation::Softmax}}},
    };
    for (int trial = 0; trial < 40; ++trial) {
        const NetworkSpec& spec = specs[trial % specs.size()];
        Network net = init_network(spec, 100 + trial);
        for (auto& l : net.layers)
            for (double& b : l.biases)
                b = random_vector(rng, 1, 0.3)[0];
        const auto x = random_vector(rng, spec.input_dim);
        const int out = net.output_dim();
        const Activation last = spec.layers.back().activation;

        // Generic linear read-out of the output through the full activation.
        const auto weights = random_vector(rng, out);
        auto linear_loss = [&] {
            const auto y = predict_output(net, x);
            double s = 0;
            for (int i = 0; i < out; ++i)
                s += weights[i] * y[i];
            return s;
        };
        Gradients analytic = Gradients::zeros_like(net);
        backward(net, forward(net, x), weights, analytic);
        CHECK(fd::worst_violation(analytic, fd::numeric_gradient(net, linear_loss), 1e-4, 1e-8) <= 0.0);

        // Fused output gradients.
        if (last == Activation::Softmax) {
            const int cls = trial % out;
            auto ce = [&] { return cross_entropy(predict_output(net, x), cls); };
            auto y = predict_output(net, x);
            y[cls] -= 1.0;
            Gradients fused = Gradients::zeros_like(net);
            backward(net, forward(net, x), y, fused, GradientAt::PreActivation);
            CHECK(fd::worst_violation(fused, fd::numeric_gradient(net, ce), 1e-4, 1e-8) <= 0.0);
        }
        if (last == Activation::Sigmoid) {
            const int d = trial % 2;
            auto bce = [&] { return binary_cross_entropy(predict_output(net, x)[0], d); };
            auto y = predict_output(net, x);
            y[0] -= d;
            Gradients fused = Gradients::zeros_like(net);
            backward(net, forward(net, x), y, fused, GradientAt::PreActivation);
            CHECK(fd::worst_violation(fused, fd::numeric_gradient(net, bce), 1e-4, 1e-8) <= 0.0);
        }
    }
}

TEST_CASE("adam") {
    Network net = init_network({3, {{2, Activation::Identity}}}, 5);
    const Network start = net;

    AdamState still = AdamState::for_network(net);
    for (int i = 0; i < 10; ++i)
        adam_step(still, net, Gradients::zeros_like(net));
    CHECK(net == start);

    Gradients g = Gradients::zeros_like(net);
    for (auto& l : g.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.37);
        std::fill(l.biases.begin(), l.biases.end(), -4.0);
    }
    AdamState st = AdamState::for_network(net);
    adam_step(st, net, g);
    CHECK(st.step == 1);
    for (std::size_t i = 0; i < net.layers[0].weights.size(); ++i)
        CHECK(net.layers[0].weights[i] - start.layers[0].weights[i] == doctest::Approx(-1e-3).epsilon(1e-6));
    for (double b : net.layers[0].biases)
        CHECK(b == doctest::Approx(1e-3).epsilon(1e-6));

    Network a = start, b = start;
    AdamState sa = AdamState::for_network(a), sb = AdamState::for_network(b);
    for (int i = 0; i < 25; ++i) {
        adam_step(sa, a, g);
        adam_step(sb, b, g);
    }
    CHECK(a == b);

    Gradients wrong = Gradients::zeros_like(init_network({2, {{2, Activation::Identity}}}, 1));
    CHECK_THROWS_AS(adam_step(st, net, wrong), std::invalid_argument);
}

TEST_CASE("network JSON round trip is exact") {
    const Network net = init_network({9, {{7, Activation::Relu}, {3, Activation::Softmax}}}, 12);
    const auto text = network_to_json(net).dump();
    const Network back = network_from_json(nlohmann::ordered_json::parse(text));
    CHECK(back == net);
    CHECK(network_to_json(back).dump() == text);
    const auto first = nlohmann::ordered_json::parse(text)[0];
    CHECK(first.begin().key() == "inDim");

    auto broken = nlohmann::ordered_json::parse(text);
    broken[1]["inDim"] = 8;
    CHECK_THROWS_AS(network_from_json(broken), std::invalid_argument);
}
