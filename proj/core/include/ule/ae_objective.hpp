#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ule/corpus.hpp"

namespace ule::ae {

// One-hidden-layer autoencoder over binary like vectors: logistic hidden and
// output units, cross-entropy reconstruction loss. Weight rows are per entity
// so the sparse input side stays O(likes * dim).
struct Params {
    std::size_t num_entities = 0;
    std::size_t hidden_dim = 0;
    std::vector<double> w_in;   // num_entities * hidden_dim
    std::vector<double> b_hidden;  // hidden_dim
    std::vector<double> w_out;  // num_entities * hidden_dim
    std::vector<double> b_out;  // num_entities

    void zero();
    static Params like(const Params& other);  // same shape, zero values
};

// Mean cross-entropy over the batch, computed from logits for stability.
double batch_loss(const Params& p, const LikeCorpus& corpus, std::span<const std::uint32_t> users);

// Accumulates d(batch_loss)/d(params) into grad (same shapes, caller zeroes).
// This is the gradient the trainer steps on.
void accumulate_batch_gradient(const Params& p, const LikeCorpus& corpus,
                               std::span<const std::uint32_t> users, Params& grad,
                               int threads = 1);

// Hidden activations for one user (the embedding row).
void hidden_activations(const Params& p, std::span<const std::uint32_t> likes,
                        std::span<double> out);

}  // namespace ule::ae
