#include "ahce/hfm.hpp"

#include <algorithm>
#include <cmath>

namespace ahce::hfm {

DialoguePolicy::DialoguePolicy(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.size() != dimension()) throw std::invalid_argument("dialogue policy expects " + std::to_string(dimension()) + " parameters");
}

std::array<double, kActions> DialoguePolicy::logits(const Features& f) const {
    std::array<double, kActions> z{};
    for (int a = 0; a < kActions; ++a) {
        for (int j = 0; j < kFeatures; ++j) z[a] += theta_[a * kFeatures + j] * f[j];
    }
    return z;
}

std::array<double, kActions> DialoguePolicy::probabilities(const Features& f) const {
    auto z = logits(f);
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0;
    for (auto& v : z) {
        v = std::exp(v - m);
        total += v;
    }
    for (auto& v : z) v /= total;
    return z;
}

double DialoguePolicy::log_prob(const Features& f, DialogueAction a) const {
    const auto z = logits(f);
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0;
    for (double v : z) total += std::exp(v - m);
    return z[static_cast<int>(a)] - m - std::log(total);
}

void DialoguePolicy::add_grad_log_prob(const Features& f, DialogueAction a, double w, std::vector<double>& grad) const {
    const auto p = probabilities(f);
    for (int b = 0; b < kActions; ++b) {
        const double coeff = w * ((b == static_cast<int>(a) ? 1.0 : 0.0) - p[b]);
        for (int j = 0; j < kFeatures; ++j) grad[b * kFeatures + j] += coeff * f[j];
    }
}

DialogueAction DialoguePolicy::greedy(const Features& f) const {
    const auto z = logits(f);
    return static_cast<DialogueAction>(std::max_element(z.begin(), z.end()) - z.begin());
}

DialogueAction DialoguePolicy::sample(const Features& f, craftworld::Rng& rng) const {
    const auto p = probabilities(f);
    const double u = rng.uniform();
    double acc = 0;
    for (int a = 0; a < kActions - 1; ++a) {
        acc += p[a];
        if (u < acc) return static_cast<DialogueAction>(a);
    }
    return static_cast<DialogueAction>(kActions - 1);
}

nlohmann::json DialoguePolicy::to_json() const { return {{"parameters", theta_}}; }

DialoguePolicy DialoguePolicy::from_json(const nlohmann::json& doc) {
    return DialoguePolicy(doc.at("parameters").get<std::vector<double>>());
}

}  // namespace ahce::hfm
