#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ule::ns {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// One negative-sampling event: an input vector (context average, entity
// vector, or paragraph vector depending on the method) scored against one
// positive and several negative output vectors.
//
// loss = -log sigmoid(h.v+) - sum_neg log sigmoid(-h.v-)
double event_loss(std::span<const double> input, std::span<const double> positive,
                  std::span<const std::span<const double>> negatives);

struct EventGradients {
    std::vector<double> input;
    std::vector<double> positive;
    std::vector<std::vector<double>> negatives;
};

// Analytic gradients of event_loss. The trainers apply exactly these in their
// fused update loops; dedicated tests pin the two code paths together.
EventGradients event_gradients(std::span<const double> input, std::span<const double> positive,
                               std::span<const std::span<const double>> negatives);

}  // namespace ule::ns
